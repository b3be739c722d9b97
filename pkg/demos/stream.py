"""Streaming edit distance: both strings are read once, in chunks."""
import numpy as np

from editsync import BitString, Seed
from editsync.edsketch import SketchParams
from editsync.harness import plant_edits
from editsync.streaming import ChunkReader, sim_stream_ed_with_script, std_stream_ed

rng = np.random.default_rng(3)
s = BitString(rng.integers(0, 2, 1 << 18, dtype=np.uint8))
t = plant_edits(s, 20, rng)


def chunks(x, size=5000):
    raw = x.bits
    return ChunkReader(raw[i:i + size] for i in range(0, len(raw), size))


r = sim_stream_ed_with_script(chunks(s), chunks(t), 32)
print(f"simultaneous: distance {r.distance}, {len(r.script)} script ops, "
      f"peak state {r.stats.peak_state_words} words for K = 32")
print("over budget at K = 8:", sim_stream_ed_with_script(chunks(s), chunks(t), 8).over_budget)

small_s = BitString(s.bits[:2000])
small_t = plant_edits(small_s, 2, rng)
res = std_stream_ed(chunks(small_s, 300), chunks(small_t, 300), SketchParams(2048, 2, Seed.from_int(3)))
print("standard (sketch s, then t):", res.distance)
