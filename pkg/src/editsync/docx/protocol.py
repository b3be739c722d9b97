"""Two-stage document exchange.

Stage one runs a few levels. Each level has two phases:

* thin out long runs of short-period content so that the walk of phase two
  keeps making progress (the receiver learns the period vector from an
  error-correcting redundancy and mirrors every removal);
* embed the string with a random walk, cut the image into blocks, and send a
  redundancy of the vector of (signature, length, shared-flag) per block.
  Blocks whose triples agree are copied from the receiver's string.

What is still unknown afterwards sits in a few short stretches. Stage two sends
the hierarchical block-signature message for the reduced string, minus the
levels with blocks longer than the last phase-two block, and the receiver
fills the remaining gaps with it. Removed periods are then put back, level by
level, and a signature of the whole input gates the result.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..core import BitString, as_bits
from ..errors import DecodeError, FormatError
from ..hashing import KRHasher, Seed
from ..ims import ImsMessage, ims_decode, ims_encode
from ..mismatch.ecc import EccRedundancy, bucket_count, ecc_decode, ecc_encode, field_prime
from ..wire import Reader, Writer
from .blocks import image_bounds, phase2_blocks, source_intervals
from .periods import apply_removals, block_partition, block_period, detect_periods, plan_removals, reinsert

MAGIC = b"EDX1"
VERSION = 1


@dataclass(frozen=True)
class DocxConfig:
    c1: float = 1.0
    c2: float = 1.0
    faithful: bool = False
    max_levels: int = 8

    @classmethod
    def aggressive(cls) -> "DocxConfig":
        """Small constants that make stage one run at desk-scale n."""
        return cls(0.25, 0.25)


@dataclass(frozen=True)
class LevelParams:
    level: int
    n_level: int  # effective size bound entering the level
    b: int
    bprime: int

    @property
    def theta(self) -> int:
        return self.b // 2


def plan_levels(n: int, K: int, cfg: DocxConfig = DocxConfig()) -> list[LevelParams]:
    """Stage-one levels both sides derive from (n, K, c1, c2).

    Desk mode runs a level only if it shrinks the effective size at least
    twofold; faithful mode uses the asymptotic stopping threshold.
    """
    log_k = math.log2(K) if K > 1 else 0.0
    sq = math.sqrt(math.log2(max(n, 2)))
    grow1 = 2 ** (cfg.c1 * (log_k + sq))
    grow2 = 2 ** ((cfg.c1 + cfg.c2) * (log_k + sq))
    threshold = (K * 2 ** sq) ** (10 * (cfg.c1 + cfg.c2))
    out = []
    n_l = n
    while len(out) < cfg.max_levels:
        b = max(2, math.ceil(math.sqrt(n_l) * grow1))
        bp = max(2, math.ceil(math.sqrt(n_l) * grow2))
        if cfg.faithful:
            run = threshold < bp < 3 * n
        else:
            run = K * bp <= n_l / 2 and b < n
        if not run:
            break
        out.append(LevelParams(len(out) + 1, n_l, b, bp))
        n_l = K * bp
    return out


def contraction_ratios(levels: list[LevelParams], K: int) -> list[float]:
    """log n_l / log n_(l+1) per stage-one level."""
    return [math.log(p.n_level) / math.log(K * p.bprime) for p in levels]


def _offsets(seed: Seed, p: LevelParams) -> tuple[int, int]:
    rng = seed.rng(f"docx/delta/{p.level}")
    d1 = int(rng.integers(math.ceil(p.b / 2), p.b + 1))
    d2 = int(rng.integers(math.ceil(p.bprime / 2), p.bprime + 1))
    return d1, d2


class _Ecc:
    """ECC parameters of one level, derivable by both sides."""

    def __init__(self, p: LevelParams, K: int, n: int, length: int, delta2: int):
        self.p = (K * max(1, math.ceil(math.log2(n)))) ** -2.0
        self.walk_len = length + K
        self.d = len(image_bounds(3 * self.walk_len, p.bprime, delta2))
        self.kU, self.kV = 2 * K, K
        self.lamU = max(self.kU, min(math.ceil(p.n_level / p.b) + 3 * K, 10 ** 9))
        self.lamV = max(self.kV, self.d)
        self.u_bits = max(1, p.theta.bit_length())
        vV = bucket_count(self.kV, self.lamV, self.p)
        limb = field_prime(vV).bit_length() - 1
        self.r_bits = p.bprime.bit_length()
        self.h_bits = min(61, max(24, 2 * limb - self.r_bits - 1))
        self.key_bits = self.h_bits + self.r_bits + 1

    def read(self, r: Reader, which: str, level: int, u: int) -> EccRedundancy:
        k, lam, bits = (self.kU, self.lamU, self.u_bits) if which == "U" else (self.kV, self.lamV, self.key_bits)
        v = bucket_count(k, lam, self.p)
        limbs = max(1, -(-bits // (field_prime(v).bit_length() - 1)))
        return EccRedundancy.read_payload(r, u, k, lam, v, limbs, f"docx/{which}/{level}")


@dataclass(frozen=True)
class ExchangeMessage:
    n: int
    K: int
    config: DocxConfig
    seed: Seed
    sections: tuple  # per level: bytes (offsets + two redundancy payloads)
    tail: object  # ImsMessage, or BitString when the reduced string is tiny
    final_sig: int

    def levels(self) -> list[LevelParams]:
        return plan_levels(self.n, self.K, self.config)

    def to_bytes(self) -> bytes:
        cfg = self.config
        w = Writer().raw(MAGIC).uvar(VERSION).uvar(self.n).uvar(self.K)
        w.uvar(round(cfg.c1 * 1000)).uvar(round(cfg.c2 * 1000)).uvar(int(cfg.faithful)).uvar(cfg.max_levels)
        w.raw(self.seed.value).uvar(len(self.sections))
        for sec in self.sections:
            w.blob(sec)
        if isinstance(self.tail, ImsMessage):
            w.uvar(1)
            self.tail.write(w, with_seed=False)
        else:
            w.uvar(0).uvar(len(self.tail)).raw(self.tail.to_bytes())
        return w.fixed(self.final_sig, 8).bytes()

    def size_bits(self) -> int:
        return 8 * len(self.to_bytes())

    @classmethod
    def from_bytes(cls, data: bytes) -> "ExchangeMessage":
        r = Reader(data)
        r.magic(MAGIC)
        if r.uvar() != VERSION:
            raise FormatError("unsupported exchange message version")
        n, K = r.uvar(), r.uvar()
        cfg = DocxConfig(r.uvar() / 1000, r.uvar() / 1000, bool(r.uvar()), r.uvar())
        seed = Seed(r.raw(32))
        if K < 1 or n < 1:
            raise FormatError("bad exchange header")
        nsec = r.uvar()
        if nsec != len(plan_levels(n, K, cfg)):
            raise FormatError("level count does not match parameters")
        sections = tuple(r.blob() for _ in range(nsec))
        if r.uvar() == 1:
            tail = ImsMessage.read(r, _ims_seed(seed))
        else:
            length = r.uvar()
            tail = BitString.unpack(r.raw((length + 7) // 8), length)
        final = r.fixed(8)
        r.done()
        return cls(n, K, cfg, seed, sections, tail, final)


def _ims_seed(seed: Seed) -> Seed:
    return Seed(seed.derive("docx/ims"))


def _final(seed: Seed) -> KRHasher:
    return KRHasher(seed, "docx/final", 61)


def _hasher(seed: Seed, level: int, bits: int) -> KRHasher:
    return KRHasher(seed, f"docx/h/{level}", bits)


def docx_encode(s, K: int, seed: Seed, config: DocxConfig = DocxConfig(), trace: dict | None = None) -> ExchangeMessage:
    s = as_bits(s)
    if K < 1:
        raise ValueError("K must be positive")
    n = len(s)
    x = s.array.copy()
    sections = []
    levels = plan_levels(n, K, config)
    for p in levels:
        d1, d2 = _offsets(seed, p)
        ecc = _Ecc(p, K, n, len(x), d2)
        part, w = detect_periods(x, p.b, p.theta, d1)
        redU = ecc_encode(w.tolist(), ecc.kU, ecc.lamU, ecc.p, seed, sigma_bits=ecc.u_bits,
                          label=f"docx/U/{p.level}")
        x = apply_removals(x, plan_removals(part, w))
        ecc = _Ecc(p, K, n, len(x), d2)
        blocks, _ = phase2_blocks(x, seed, f"docx/{p.level}", p.bprime, d2, ecc.walk_len,
                                  _hasher(seed, p.level, ecc.h_bits))
        keys = [blk.key(ecc.h_bits, ecc.r_bits) for blk in blocks]
        redV = ecc_encode(keys, ecc.kV, ecc.lamV, ecc.p, seed, sigma_bits=ecc.key_bits,
                          label=f"docx/V/{p.level}")
        wr = Writer().uvar(d1)
        redU.write_payload(wr)
        wr.uvar(d2)
        redV.write_payload(wr)
        sections.append(wr.bytes())
        if trace is not None:
            trace.setdefault("lengths", []).append(len(x))
    cap = levels[-1].bprime if levels else None
    if len(x) >= 2 * K:
        tail = ims_encode(BitString(x), K, _ims_seed(seed), level_cap=cap)
    else:
        tail = BitString(x)
    return ExchangeMessage(n, K, config, seed, tuple(sections), tail, _final(seed).sign(s))


def docx_decode(msg: ExchangeMessage, t, stats: dict | None = None) -> BitString:
    t = as_bits(t)
    n, K, seed = msg.n, msg.K, msg.seed
    if abs(len(t) - n) > K:
        raise DecodeError("length difference exceeds the distance budget")
    y = t.array.copy()
    xt = np.full(n, -1, dtype=np.int8)
    journals = []
    unknown = []
    for p, sec in zip(msg.levels(), msg.sections):
        r = Reader(sec)
        d1 = r.uvar()
        ecc = _Ecc(p, K, n, len(xt), 0)
        redU = ecc.read(r, "U", p.level, len(block_partition(len(xt), p.b, d1)))

        # phase one: rebuild the period vector, using y wherever x~ is incomplete
        part = block_partition(len(xt), p.b, d1)
        holes = np.concatenate([[0], np.cumsum(xt < 0)])
        lo = np.maximum(part.starts - p.theta, 1)
        hi = part.starts + part.lens - 1
        from_y = (holes[hi] - holes[lo - 1]) > 0
        xbits = np.where(xt < 0, 0, xt).astype(np.uint8)
        guess = np.zeros(len(part), dtype=np.int64)
        for j in range(len(part)):
            a, e = int(part.starts[j]), int(hi[j])
            if from_y[j]:
                guess[j] = block_period(y, a, min(e, len(y)), p.theta) if a <= len(y) else 0
            else:
                guess[j] = block_period(xbits, a, e, p.theta)
        cands = (np.flatnonzero(from_y) + 1).tolist()
        U = ecc_decode(redU, guess.tolist(), cands, seed)
        if any(not 0 <= w <= p.theta for w in U):
            raise DecodeError("recovered period out of range")
        journal = plan_removals(part, np.array(U, dtype=np.int64))
        journals.append(journal)
        y = apply_removals(y, journal)
        xt = apply_removals(xt, journal)

        # phase two: agree on walk blocks and copy the matching ones
        d2 = r.uvar()
        ecc = _Ecc(p, K, n, len(xt), d2)
        if len(y) > ecc.walk_len:
            raise DecodeError("received string too long for this level")
        redV = ecc.read(r, "V", p.level, ecc.d)
        r.done()
        blocks, _ = phase2_blocks(y, seed, f"docx/{p.level}", p.bprime, d2, ecc.walk_len,
                                  _hasher(seed, p.level, ecc.h_bits))
        mine = [blk.key(ecc.h_bits, ecc.r_bits) for blk in blocks]
        theirs = ecc_decode(redV, mine, range(1, len(mine) + 1), seed)
        len_mask = (1 << ecc.r_bits) - 1
        lengths = [(key >> 1) & len_mask for key in theirs]
        shared = [key & 1 for key in theirs]
        ypad = np.zeros(ecc.walk_len, dtype=np.int8)
        ypad[: len(y)] = y
        for j, (alo, ahi) in enumerate(source_intervals(lengths, shared)):
            if theirs[j] != mine[j] or lengths[j] == 0:
                continue
            top = min(ahi, len(xt))
            if top >= alo:
                blo = blocks[j].lo
                xt[alo - 1: top] = ypad[blo - 1: blo - 1 + top - alo + 1]
        unknown.append(int((xt < 0).sum()))

    if isinstance(msg.tail, ImsMessage):
        if msg.tail.n != len(xt):
            raise DecodeError("tail length disagrees with the reduced string")
        x = ims_decode(msg.tail, BitString(y), known=xt if msg.sections else None).array
    else:
        x = msg.tail.array
    for journal in reversed(journals):
        x = reinsert(x, journal)
    if stats is not None:
        stats["unknown_per_level"] = unknown
    result = BitString(x.astype(np.uint8))
    if len(result) != n or _final(seed).sign(result) != msg.final_sig:
        raise DecodeError("final signature mismatch")
    return result
