from .blocks import Phase2Block, phase2_blocks, source_intervals
from .periods import Partition, Removal, block_partition, detect_periods, reinsert, remove_periods
from .protocol import DocxConfig, ExchangeMessage, LevelParams, docx_decode, docx_encode, plan_levels
