"""One-way document exchange: Bob recovers Alice's string from a short message."""
import numpy as np

from editsync import DecodeError, Seed
from editsync.docx import docx_decode, docx_encode
from editsync.harness import CorpusSpec, ed_instance, gen_pair
from editsync.ims import ims_decode, ims_encode

n, K = 1 << 16, 8
seed = Seed.from_int(1)
alice, bob, _ = gen_pair(CorpusSpec(n, K, master_seed=1), 0, with_ed=False)

for name, enc, dec in (("two-stage", docx_encode, docx_decode), ("IMS", ims_encode, ims_decode)):
    msg = enc(alice, K, seed)
    out = dec(msg, bob)
    print(f"{name:9s}: n = {n} bits, message = {msg.size_bits()} bits, recovered = {out == alice}")

# too many edits: decoding reports failure instead of returning a wrong string
alice, bob = ed_instance(n, 4 * K, seed)
try:
    docx_decode(docx_encode(alice, K, seed), bob)
except DecodeError as e:
    print("far inputs detected:", e)

print("message bits by length:", {f"2^{e}": docx_encode(
    np.random.default_rng(e).integers(0, 2, 1 << e, dtype=np.uint8), K, seed).size_bits() for e in (10, 12, 14)})
