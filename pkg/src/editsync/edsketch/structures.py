"""Per-walk structures of the edit sketch.

For every walk copy the image of the input is cut into ``leaves`` blocks of
``B`` bits and a complete binary tree is laid over them. Each tree node holds
a hash of its image block folded with the length of its preimage, so a leaf
whose image differs changes every node above it. P keeps one Hamming sketch
per tree level over the (hash, length) values; Q keeps the raw leaf images,
each limb tagged with the leaf hash so Q and P disagree on the same leaves.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..cgk import embed
from ..core import as_bits
from ..errors import FormatError
from ..hashing import Seed, mix64, mix64_np
from ..mismatch.hamsketch import HamParams, HamSketch, ham_build_many
from ..wire import Reader, Writer
from .params import SketchParams

MAGIC = b"ESK1"
VERSION = 1
ROLES = ("s", "t")


def walk_id(i: int) -> str:
    return f"esk{i}"


def node_salts(params: SketchParams) -> list[np.uint64]:
    return [np.uint64(params.seed.derive_int(f"esk/node/{l}")) for l in range(params.levels + 1)]


def p_params(params: SketchParams, i: int, level: int) -> HamParams:
    return HamParams(params.leaves >> level, params.capacity(level), params.sig_bits + params.len_bits,
                     params.seed, f"esk/{i}/P/{level}")


def q_params(params: SketchParams, i: int, limb: int) -> HamParams:
    return HamParams(params.leaves, params.capacity(0), 64, params.seed, f"esk/{i}/Q/{limb}")


# ---------------------------------------------------------------------------
# node values, shared by the batch and the streaming builders


def leaf_words(image: np.ndarray, params: SketchParams) -> np.ndarray:
    """(leaves, limbs) array of image chunks, least significant bit first."""
    blocks = image.reshape(-1, params.B).astype(np.uint64)
    cb, nl = params.chunk_bits, params.q_limbs
    padded = np.zeros((len(blocks), cb * nl), dtype=np.uint64)
    padded[:, : params.B] = blocks
    weights = np.uint64(1) << np.arange(cb, dtype=np.uint64)
    return (padded.reshape(len(blocks), nl, cb) * weights).sum(axis=2, dtype=np.uint64)


def leaf_hash(words: np.ndarray, eta: np.ndarray, salt: np.uint64) -> np.ndarray:
    h = np.full(len(words), salt, dtype=np.uint64)
    for l in range(words.shape[1]):
        h = mix64_np(h ^ words[:, l])
    return mix64_np(h ^ eta.astype(np.uint64))


def parent_hash(h_left: np.ndarray, h_right: np.ndarray, eta: np.ndarray, salt: np.uint64) -> np.ndarray:
    return mix64_np(mix64_np(mix64_np(h_left ^ salt) ^ h_right) ^ eta.astype(np.uint64))


def node_eta(first: np.ndarray, last: np.ndarray, W: int) -> np.ndarray:
    """Preimage length of nodes whose image starts at preimage ``first`` and ends at ``last``."""
    return np.where(first <= W, np.minimum(last, W) - first + 1, 0).astype(np.int64)


def p_values(h: np.ndarray, eta: np.ndarray, params: SketchParams) -> np.ndarray:
    sig = h >> np.uint64(64 - params.sig_bits)
    return (sig << np.uint64(params.len_bits)) | eta.astype(np.uint64)


def q_values(words: np.ndarray, h: np.ndarray, params: SketchParams) -> np.ndarray:
    """(limbs, leaves) array: tag in the high bits, image chunk below."""
    tag = (h >> np.uint64(64 - params.tag_bits)) << np.uint64(params.chunk_bits)
    return (words | tag[:, None]).T.copy()


# scalar forms of the same values, for one node at a time


def leaf_words_int(bits: list[int], params: SketchParams) -> list[int]:
    cb = params.chunk_bits
    word = int("".join(map(str, reversed(bits))), 2) if bits else 0
    return [(word >> (l * cb)) & ((1 << cb) - 1) for l in range(params.q_limbs)]


def leaf_hash_int(words: list[int], eta: int, salt: int) -> int:
    h = int(salt)
    for w in words:
        h = mix64(h ^ w)
    return mix64(h ^ eta)


def parent_hash_int(h_left: int, h_right: int, eta: int, salt: int) -> int:
    return mix64(mix64(mix64(h_left ^ int(salt)) ^ h_right) ^ eta)


def p_value_int(h: int, eta: int, params: SketchParams) -> int:
    return ((h >> (64 - params.sig_bits)) << params.len_bits) | eta


def q_values_int(words: list[int], h: int, params: SketchParams) -> list[int]:
    tag = (h >> (64 - params.tag_bits)) << params.chunk_bits
    return [w | tag for w in words]


def split_q(value: int, params: SketchParams) -> tuple[int, int]:
    return value >> params.chunk_bits, value & ((1 << params.chunk_bits) - 1)


# ---------------------------------------------------------------------------


@dataclass
class SketchCopy:
    R: int  # source characters the walk consumed
    P: list[HamSketch]
    Q: list[HamSketch]

    def write(self, w: Writer):
        w.uvar(self.R)
        for sk in self.P + self.Q:
            sk.write(w, include_params=False)

    @classmethod
    def read(cls, r: Reader, params: SketchParams, i: int) -> "SketchCopy":
        R = r.uvar()
        P = [HamSketch.read(r, params.seed, p_params(params, i, l)) for l in range(params.levels)]
        Q = [HamSketch.read(r, params.seed, q_params(params, i, l)) for l in range(params.q_limbs)]
        return cls(R, P, Q)


@dataclass
class EditSketch:
    params: SketchParams
    role: str
    length: int
    copies: list[SketchCopy] = field(default_factory=list)

    def _sections(self) -> list[bytes]:
        out = []
        for c in self.copies:
            w = Writer()
            c.write(w)
            out.append(w.bytes())
        return out

    def to_bytes(self) -> bytes:
        p = self.params
        secs = self._sections()
        w = Writer().raw(MAGIC).uvar(VERSION).uvar(ROLES.index(self.role))
        w.uvar(p.n).uvar(p.K).uvar(p.rho).text(repr(float(p.c_N))).raw(p.seed.value)
        w.uvar(self.length).uvar(8 * sum(len(s) for s in secs))
        for s in secs:
            w.blob(s)
        return w.bytes()

    def size_bits(self) -> int:
        return 8 * len(self.to_bytes())

    @classmethod
    def from_bytes(cls, data: bytes) -> "EditSketch":
        r = Reader(data)
        r.magic(MAGIC)
        if r.uvar() != VERSION:
            raise FormatError("unsupported sketch version")
        role_i = r.uvar()
        if role_i >= len(ROLES):
            raise FormatError("bad role tag")
        n, K, rho = r.uvar(), r.uvar(), r.uvar()
        try:
            c_N = float(r.text())
        except ValueError as exc:
            raise FormatError("bad c_N field") from exc
        seed = Seed(r.raw(32))
        params = SketchParams(n, K, seed, c_N=c_N, rho_override=rho)
        length, total = r.uvar(), r.uvar()
        copies, seen = [], 0
        for i in range(rho):
            blob = r.blob()
            seen += 8 * len(blob)
            sub = Reader(blob)
            copies.append(SketchCopy.read(sub, params, i))
            sub.done()
        r.done()
        if seen != total:
            raise FormatError("section size mismatch")
        return cls(params, ROLES[role_i], length, copies)

    def __eq__(self, other) -> bool:
        return isinstance(other, EditSketch) and self.to_bytes() == other.to_bytes()


# ---------------------------------------------------------------------------
# offline construction


def padded_source(x, params: SketchParams) -> np.ndarray:
    x = as_bits(x)
    if len(x) > params.n:
        raise ValueError(f"input of {len(x)} bits exceeds sketch length {params.n}")
    src = np.zeros(params.n, dtype=np.uint8)
    src[: len(x)] = x.array
    return src


def walk_arrays(src: np.ndarray, params: SketchParams, i: int) -> tuple[np.ndarray, np.ndarray, int]:
    """(image, preimage, R) of copy ``i``, padded to ``leaves * B`` steps."""
    W = params.n
    emb = embed(src, params.seed, walk_id(i), W)
    total = params.leaves * params.B
    image = np.zeros(total, dtype=np.uint8)
    pre = np.full(total, W + 1, dtype=np.int64)
    image[: 3 * W] = emb.image.array
    pre[: 3 * W] = emb.preimage
    R = min(int(emb.preimage[-1]), W)
    return image, pre, R


def build_copies(images: np.ndarray, pres: np.ndarray, Rs: list[int], params: SketchParams,
                 first: int = 0) -> list[SketchCopy]:
    """Copies ``first, first + 1, ...`` from stacked (copies, steps) image and preimage arrays."""
    W, B = params.n, params.B
    rho, total = images.shape
    salts = node_salts(params)
    words = leaf_words(images.reshape(-1), params)  # (rho * leaves, limbs)
    pre_b = pres.reshape(-1, B)
    eta = node_eta(pre_b[:, 0], pre_b[:, -1], W)
    h = leaf_hash(words, eta, salts[0])
    q = q_values(words, h, params).reshape(params.q_limbs, rho, -1)
    pv = []
    for level in range(params.levels):
        if level:
            blocks = pres.reshape(-1, B << level)
            eta = node_eta(blocks[:, 0], blocks[:, -1], W)
            h = parent_hash(h[0::2], h[1::2], eta, salts[level])
        pv.append(p_values(h, eta, params).reshape(rho, -1))
    hp, vals = [], []
    for k in range(rho):
        i = first + k
        for level in range(params.levels):
            hp.append(p_params(params, i, level))
            vals.append(pv[level][k])
        for l in range(params.q_limbs):
            hp.append(q_params(params, i, l))
            vals.append(q[l, k])
    built = ham_build_many(hp, vals)
    per = params.levels + params.q_limbs
    out = []
    for k in range(rho):
        chunk = built[k * per:(k + 1) * per]
        out.append(SketchCopy(Rs[k], chunk[: params.levels], chunk[params.levels:]))
    return out


def build_copy(image: np.ndarray, pre: np.ndarray, R: int, params: SketchParams, i: int) -> SketchCopy:
    return build_copies(image[None, :], pre[None, :], [R], params, i)[0]


def sketch_encode(x, params: SketchParams, role: str = "s") -> EditSketch:
    if role not in ROLES:
        raise ValueError("role must be 's' or 't'")
    src = padded_source(x, params)
    copies = []
    step = 32  # copies hashed together; bounds the temporary arrays
    for first in range(0, params.rho, step):
        walks = [walk_arrays(src, params, i) for i in range(first, min(first + step, params.rho))]
        copies += build_copies(np.stack([w[0] for w in walks]), np.stack([w[1] for w in walks]),
                               [w[2] for w in walks], params, first)
    return EditSketch(params, role, len(as_bits(x)), copies)
