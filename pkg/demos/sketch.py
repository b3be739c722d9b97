"""Edit-distance sketches: compare two strings from their sketches alone."""
from editsync import DecodeError, Seed, apply_script
from editsync.edsketch import SketchParams, sketch_decode, sketch_encode
from editsync.harness import CorpusSpec, ed_instance, gen_pair

n, K = 1 << 10, 3
seed = Seed.from_int(2)
params = SketchParams(n, K, seed)
s, t, d = gen_pair(CorpusSpec(n - K, K, master_seed=2), 0)

a, b = sketch_encode(s, params, "s"), sketch_encode(t, params, "t")
res = sketch_decode(a, b)
print(f"rho = {params.rho} walks, sketch = {a.size_bits()} bits")
print(f"decoded distance {res.distance}, true distance {d}")
print("script:", [str(op) for op in res.script])
print("script turns s into t:", apply_script(s, res.script) == t)

s, t = ed_instance(n, 4 * K, seed)
try:
    sketch_decode(sketch_encode(s, params, "s"), sketch_encode(t, params, "t"))
except DecodeError as e:
    print("over budget detected:", e)
