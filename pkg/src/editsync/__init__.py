"""Document exchange, sketching and streaming for strings at small edit distance."""
from .core import BitString, EditOp, EditScript, apply_script, ed_oracle, optimal_alignment, banded_align
from .errors import DecodeError, EditsyncError, FormatError, SizeError
from .hashing import Seed

__version__ = "0.1.0"
