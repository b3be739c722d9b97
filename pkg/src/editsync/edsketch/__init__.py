from .decode import Gap, SketchResult, intersect_alignments, reconstruct_gaps, sketch_decode
from .extract import EffectiveAlignment, extract_alignment
from .params import SketchParams
from .structures import MAGIC, EditSketch, SketchCopy, sketch_encode
from .stream import SketchStream, sketch_stream

__all__ = [
    "SketchParams", "EditSketch", "SketchCopy", "MAGIC", "sketch_encode", "sketch_stream", "SketchStream",
    "EffectiveAlignment", "extract_alignment", "intersect_alignments", "reconstruct_gaps",
    "Gap", "SketchResult", "sketch_decode",
]
