"""Hierarchical block-signature document exchange.

The sender cuts ``s`` into ``2K`` blocks and keeps halving them until every
block fits in one signature word. The first level is sent as a plain list of
block signatures. Every further level folds the block signatures into a
sparse table of size ``(K log n)^c`` (XOR at a hashed slot) and sends only an
error-correcting redundancy of that table. At the bottom level the table
holds raw block contents instead of signatures.

The receiver matches each block it does not yet know against the ``2K + 1``
substrings of ``t`` starting within ``K`` of the block's own position. Blocks
that match are known from then on together with all their descendants. The
table redundancy supplies the signatures of the remaining blocks one level
down. A signature of the whole of ``s`` gates the final answer.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import BitString, as_bits
from .errors import DecodeError, FormatError, SizeError
from .hashing import KRHasher, PrefixHashes, Seed, UnivHasher
from .mismatch.ecc import EccRedundancy, bucket_count, ecc_decode, ecc_encode, field_prime
from .wire import Reader, Writer

MAGIC = b"IMS1"
SIG_EXPONENT = 3
UNKNOWN, FROM_KNOWN = -2, -1


@dataclass(frozen=True)
class ImsLayout:
    """Everything both sides derive from (n, K, c)."""

    n: int
    K: int
    c: int = SIG_EXPONENT

    @property
    def log_n(self) -> int:
        return max(1, math.ceil(math.log2(self.n)))

    @property
    def table_size(self) -> int:
        return (self.K * self.log_n) ** self.c

    @property
    def width(self) -> int:
        return min(61, math.ceil(math.log2(self.table_size)))

    @property
    def p(self) -> float:
        return float(self.K * self.log_n) ** -2

    def levels(self) -> list[tuple[np.ndarray, np.ndarray]]:
        """(starts, lengths) per level, 1-based starts; the last level holds the leaves."""
        m = 2 * self.K
        bounds = (np.arange(m + 1, dtype=np.int64) * self.n) // m
        starts, lens = bounds[:-1] + 1, np.diff(bounds)
        out = [(starts, lens)]
        while lens.max() > self.width:
            half = lens // 2
            starts = np.stack([starts, starts + half], axis=1).ravel()
            lens = np.stack([half, lens - half], axis=1).ravel()
            out.append((starts, lens))
        return out

    def level_count(self) -> int:
        return len(self.levels())

    def first_level_for_cap(self, max_block: int) -> int:
        """First (1-based) level whose blocks are all at most ``max_block`` long."""
        for lvl, (_, lens) in enumerate(self.levels(), 1):
            if lens.max() <= max_block:
                return lvl
        return self.level_count()

    def ecc_params(self, level: int) -> dict:
        k = 2 * self.K
        v = bucket_count(k, k, self.p)
        limbs = -(-self.width // (field_prime(v).bit_length() - 1))
        return dict(u=self.table_size, k=k, lam=k, v=v, limbs=limbs, label=f"ims/{level}")


def _contents(bits: np.ndarray, starts: np.ndarray, lens: np.ndarray, w: int) -> list[int]:
    """Leaf contents as integers, bit j of the block at bit position j."""
    if len(starts) == 0:
        return []
    off = np.arange(w, dtype=np.int64)
    idx = np.minimum(starts[:, None] - 1 + off[None, :], len(bits) - 1)
    vals = bits[idx].astype(np.int64) * (off[None, :] < lens[:, None])
    return (vals << off[None, :]).sum(axis=1).tolist()


def _unpack_content(val: int, length: int) -> list[int]:
    return [(val >> j) & 1 for j in range(length)]


class _Side:
    """Signature/content oracle over one bit array."""

    def __init__(self, bits: np.ndarray, f2: KRHasher):
        self.bits = bits
        self.pre = PrefixHashes(f2, bits.tobytes())

    def value(self, start: int, length: int, leaf: bool, w: int) -> int:
        if leaf:
            seg = self.bits[start - 1: start - 1 + length].astype(np.int64)
            return int((seg << np.arange(length, dtype=np.int64)).sum())
        return self.pre.sig(start, start + length - 1)


@dataclass(frozen=True)
class ImsMessage:
    n: int
    K: int
    c: int
    first_level: int
    seed: Seed
    top: tuple  # raw values of level 1 (empty unless first_level == 1)
    levels: tuple  # EccRedundancy per level first_level' .. L
    final_sig: int

    @property
    def layout(self) -> ImsLayout:
        return ImsLayout(self.n, self.K, self.c)

    def write(self, w: Writer, with_seed: bool = True):
        lay = self.layout
        w.raw(MAGIC).uvar(self.n).uvar(self.K).uvar(self.c).uvar(lay.level_count()).uvar(self.first_level)
        if with_seed:
            w.raw(self.seed.value)
        if self.top:
            packed = 0
            for j, x in enumerate(self.top):
                packed |= x << (j * lay.width)
            w.raw(packed.to_bytes(-(-len(self.top) * lay.width // 8), "little"))
        for red in self.levels:
            red.write_payload(w)
        w.fixed(self.final_sig, 8)

    def to_bytes(self) -> bytes:
        w = Writer()
        self.write(w)
        return w.bytes()

    def size_bits(self) -> int:
        return 8 * len(self.to_bytes())

    @classmethod
    def read(cls, r: Reader, seed: Seed | None = None) -> "ImsMessage":
        r.magic(MAGIC)
        n, K, c, L, first = (r.uvar() for _ in range(5))
        if K < 1 or n < 2 * K or not 1 <= first <= L:
            raise FormatError("inconsistent IMS header")
        lay = ImsLayout(n, K, c)
        if lay.level_count() != L:
            raise FormatError("level count does not match header")
        if seed is None:
            seed = Seed(r.raw(32))
        top = ()
        if first == 1:
            nbytes = -(-2 * K * lay.width // 8)
            packed = int.from_bytes(r.raw(nbytes), "little")
            mask = (1 << lay.width) - 1
            top = tuple((packed >> (j * lay.width)) & mask for j in range(2 * K))
        start = 2 if first == 1 else first
        levels = []
        for lvl in range(start, L + 1):
            prm = lay.ecc_params(lvl)
            levels.append(EccRedundancy.read_payload(r, prm["u"], prm["k"], prm["lam"], prm["v"],
                                                     prm["limbs"], prm["label"]))
        return cls(n, K, c, first, seed, top, tuple(levels), r.fixed(8))

    @classmethod
    def from_bytes(cls, data: bytes) -> "ImsMessage":
        r = Reader(data)
        out = cls.read(r)
        r.done()
        return out


def _final_hasher(seed: Seed) -> KRHasher:
    return KRHasher(seed, "ims/final", 61)


def ims_encode(s, K: int, seed: Seed, level_cap: int | None = None, c: int = SIG_EXPONENT) -> ImsMessage:
    """Encode ``s``. With ``level_cap`` set, levels whose blocks exceed that
    many bits are omitted (the receiver must then know most of ``s``)."""
    s = as_bits(s)
    n = len(s)
    if K < 1:
        raise ValueError("K must be positive")
    if n < 2 * K:
        raise SizeError(f"input of {n} bits is shorter than 2K = {2 * K}")
    lay = ImsLayout(n, K, c)
    w = lay.width
    levels = lay.levels()
    L = len(levels)
    first = 1 if level_cap is None else lay.first_level_for_cap(level_cap)
    bits = s.array
    side = _Side(bits, KRHasher(seed, "ims/f2", w))
    top = ()
    reds = []
    for lvl, (starts, lens) in enumerate(levels, 1):
        if lvl < first:
            continue
        leaf = lvl == L
        if leaf:
            vals = _contents(bits, starts, lens, w)
        else:
            vals = [side.pre.sig(int(a), int(a + b - 1)) for a, b in zip(starts, lens)]
        if lvl == 1:
            top = tuple(vals)
            continue
        f1 = UnivHasher(seed, f"ims/f1/{lvl}", len(vals), lay.table_size)
        table: dict[int, int] = {}
        for i, x in enumerate(vals, 1):
            j = f1(i)
            table[j] = table.get(j, 0) ^ x
        prm = lay.ecc_params(lvl)
        reds.append(ecc_encode(table, prm["k"], prm["lam"], lay.p, seed, sigma_bits=w,
                               label=prm["label"], u=prm["u"]))
    return ImsMessage(n, K, c, first, seed, top, tuple(reds), _final_hasher(seed).sign(s))


def ims_decode(msg: ImsMessage, t, known: np.ndarray | None = None, stats: dict | None = None) -> BitString:
    """Recover ``s`` from ``msg`` and ``t``; ``known`` optionally holds bits of
    ``s`` already recovered (-1 where unknown)."""
    t = as_bits(t)
    lay = msg.layout
    n, K, w = lay.n, lay.K, lay.width
    if abs(len(t) - n) > K and known is None:
        raise DecodeError("length difference exceeds the distance budget")
    seed = msg.seed
    f2 = KRHasher(seed, "ims/f2", w)
    tside = _Side(t.array, f2)
    kside = None
    if known is not None:
        known = np.asarray(known, dtype=np.int8)
        if len(known) != n:
            raise ValueError("known array must have length n")
        kside = _Side(np.where(known < 0, 0, known).astype(np.uint8), f2)
        unknown_prefix = np.concatenate([[0], np.cumsum(known < 0)])
    levels = lay.levels()
    L = len(levels)
    tlen = len(t)

    src = None
    reds = iter(msg.levels)
    unmatched_log = []
    for lvl, (starts, lens) in enumerate(levels, 1):
        if lvl < msg.first_level:
            continue
        leaf = lvl == L
        m = len(starts)
        if src is None:
            src = np.full(m, UNKNOWN, dtype=np.int64)
            if kside is not None:
                gaps = unknown_prefix[starts - 1 + lens] - unknown_prefix[starts - 1]
                src[gaps == 0] = FROM_KNOWN
        else:
            parent = np.repeat(src, 2)
            offs = np.zeros(m, dtype=np.int64)
            offs[1::2] = lens[0::2]
            src = np.where(parent >= 1, parent + offs, parent)

        def value(i):
            a, b = int(starts[i]), int(lens[i])
            return (kside if src[i] == FROM_KNOWN else tside).value(
                a if src[i] == FROM_KNOWN else int(src[i]), b, leaf, w)

        todo = np.flatnonzero(src == UNKNOWN)
        if lvl == 1:
            vals = {int(i): msg.top[i] for i in todo}
        else:
            try:
                red = next(reds)
            except StopIteration:
                raise FormatError("message has too few levels") from None
            f1 = UnivHasher(seed, f"ims/f1/{lvl}", m, lay.table_size)
            slots = [f1(i + 1) for i in range(m)]
            have: dict[int, int] = {}
            for i in np.flatnonzero(src != UNKNOWN):
                j = slots[i]
                have[j] = have.get(j, 0) ^ value(int(i))
            cands = {slots[i] for i in todo}
            table = ecc_decode(red, have, cands, seed)
            vals = {int(i): table.get(slots[i], 0) ^ have.get(slots[i], 0) for i in todo}
        unmatched_log.append(len(todo))
        if leaf:
            out = np.zeros(n, dtype=np.uint8)
            for i in range(m):
                a, b = int(starts[i]), int(lens[i])
                x = vals[i] if src[i] == UNKNOWN else value(i)
                if x >> b:
                    raise DecodeError("leaf content wider than its block")
                out[a - 1: a - 1 + b] = _unpack_content(x, b)
            break
        for i in todo:
            a, b = int(starts[i]), int(lens[i])
            target = vals[int(i)]
            for d in range(K + 1):
                hit = None
                for tp in ((a,) if d == 0 else (a - d, a + d)):
                    if 1 <= tp and tp + b - 1 <= tlen and tside.pre.sig(tp, tp + b - 1) == target:
                        hit = tp
                        break
                if hit is not None:
                    src[i] = hit
                    break
    if stats is not None:
        stats["unknown_per_level"] = unmatched_log
    result = BitString(out)
    if _final_hasher(seed).sign(result) != msg.final_sig:
        raise DecodeError("final signature mismatch")
    return result
