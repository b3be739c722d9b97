"""One-pass sketch from which the differing coordinates of two vectors are recovered.

Each coordinate ``(i, v)`` is added to three cells of an invertible lookup
table, one per subtable, chosen by a hash of the pair. Subtracting two
sketches cancels every coordinate the vectors share, leaving the differing
pairs, which are peeled off pure cells one at a time.

All fields are sums modulo a power of two, so sketches are linear and the
wire form only keeps as many bits per field as the domain needs.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import DecodeError, FormatError
from ..hashing import MASK64, Seed, mix64, mix64_np
from ..wire import Reader, Writer

CELLS_PER_DIFF = 8
SUBTABLES = 3
CHECK_BITS = 40


@dataclass(frozen=True)
class HamParams:
    n: int
    k: int
    val_bits: int
    seed: Seed
    label: str = "ham"

    def __post_init__(self):
        if self.n < 1 or self.k < 1 or not 1 <= self.val_bits <= 64:
            raise ValueError("bad sketch parameters")

    @property
    def width(self) -> int:
        return -(-CELLS_PER_DIFF * self.k // SUBTABLES)

    @property
    def cells(self) -> int:
        return self.width * SUBTABLES

    @property
    def key_bits(self) -> int:
        return self.n.bit_length() + 1

    def field_bytes(self) -> tuple[int, int, int, int]:
        """Wire bytes per cell for count, keysum, valsum and checksum."""
        return tuple(-(-b // 8) for b in (self.n.bit_length() + 2, self.key_bits, self.val_bits, CHECK_BITS))

    def salts(self) -> list[int]:
        return [self.seed.derive_int(f"ham/{self.label}/{t}") for t in range(SUBTABLES + 2)]


def _mask(bits: int) -> int:
    return (1 << bits) - 1


def _pack(arr: np.ndarray, nbytes: int) -> bytes:
    return np.ascontiguousarray(arr.astype("<u8").view(np.uint8).reshape(-1, 8)[:, :nbytes]).tobytes()


def _unpack(data: bytes, nbytes: int) -> np.ndarray:
    raw = np.frombuffer(data, dtype=np.uint8).reshape(-1, nbytes)
    full = np.zeros((len(raw), 8), dtype=np.uint8)
    full[:, :nbytes] = raw
    return full.view("<u8").reshape(-1).astype(np.uint64)


def _zigzag(x: np.ndarray) -> np.ndarray:
    x = x.astype(np.int64)
    return np.where(x >= 0, 2 * x, -2 * x - 1).astype(np.uint64)


def _unzigzag(z: np.ndarray) -> np.ndarray:
    z = z.astype(np.int64)
    return np.where(z % 2 == 0, z // 2, -(z + 1) // 2)


class HamSketch:
    def __init__(self, params: HamParams):
        self.params = params
        c = params.cells
        self.count = np.zeros(c, dtype=np.int64)
        self.keysum = np.zeros(c, dtype=np.uint64)
        self.valsum = np.zeros(c, dtype=np.uint64)
        self.checksum = np.zeros(c, dtype=np.uint64)
        self.verify = 0
        self._salts = params.salts()
        self._last = 0

    # scalar path, used while streaming
    def _fp(self, i: int, v: int, salt: int) -> int:
        return mix64(mix64(i ^ salt) ^ v)

    def _cells(self, i: int, v: int) -> list[int]:
        w = self.params.width
        return [t * w + self._fp(i, v, self._salts[t]) % w for t in range(SUBTABLES)]

    def add(self, i: int, v: int, sign: int = 1):
        i, v = int(i), int(v)
        if sign == 1:
            if i <= self._last:
                raise ValueError("stream indices must be strictly increasing")
            self._last = i
        check = self._fp(i, v, self._salts[SUBTABLES])
        for c in self._cells(i, v):
            self.count[c] += sign
            self.keysum[c] = np.uint64((int(self.keysum[c]) + sign * i) & MASK64)
            self.valsum[c] = np.uint64((int(self.valsum[c]) + sign * v) & MASK64)
            self.checksum[c] = np.uint64((int(self.checksum[c]) + sign * check) & MASK64)
        self.verify = (self.verify + sign * self._fp(i, v, self._salts[SUBTABLES + 1])) & MASK64

    # vectorised path, used for whole vectors
    def add_batch(self, idx: np.ndarray, vals: np.ndarray):
        idx = np.asarray(idx, dtype=np.uint64)
        vals = np.asarray(vals, dtype=np.uint64)
        if len(idx) == 0:
            return
        if len(idx) > 1 and np.any(np.diff(idx.astype(np.int64)) <= 0) or int(idx[0]) <= self._last:
            raise ValueError("indices must be strictly increasing")
        self._last = int(idx[-1])
        s = [np.uint64(x) for x in self._salts]
        w = np.uint64(self.params.width)

        def fp(salt):
            return mix64_np(mix64_np(idx ^ salt) ^ vals)

        check = fp(s[SUBTABLES])
        for t in range(SUBTABLES):
            c = (fp(s[t]) % w).astype(np.int64) + t * self.params.width
            np.add.at(self.count, c, 1)
            np.add.at(self.keysum, c, idx)
            np.add.at(self.valsum, c, vals)
            np.add.at(self.checksum, c, check)
        self.verify = (self.verify + int(fp(s[SUBTABLES + 1]).sum(dtype=np.uint64))) & MASK64

    def _fields(self):
        return _zigzag(self.count), self.keysum, self.valsum, self.checksum

    def masked(self) -> "HamSketch":
        """Copy reduced to the field widths used on the wire."""
        p = self.params
        out = HamSketch(p)
        out.count = self.count.copy()
        out.keysum = self.keysum & np.uint64(_mask(p.key_bits))
        out.valsum = self.valsum & np.uint64(_mask(p.val_bits))
        out.checksum = self.checksum & np.uint64(_mask(CHECK_BITS))
        out.verify = self.verify & _mask(CHECK_BITS)
        return out

    def __eq__(self, other) -> bool:
        a, b = self.masked(), other.masked()
        return (a.params == b.params and a.verify == b.verify and np.array_equal(a.count, b.count)
                and np.array_equal(a.keysum, b.keysum) and np.array_equal(a.valsum, b.valsum)
                and np.array_equal(a.checksum, b.checksum))

    def size_bits(self) -> int:
        return len(self.to_bytes(include_params=False)) * 8

    def write(self, w: Writer, include_params: bool = True):
        p = self.params
        if include_params:
            w.uvar(p.n).uvar(p.k).uvar(p.val_bits).text(p.label)
        m = self.masked()
        for arr, nb in zip(m._fields(), p.field_bytes()):
            w.raw(_pack(arr, nb))
        w.fixed(m.verify, p.field_bytes()[3])

    def to_bytes(self, include_params: bool = True) -> bytes:
        w = Writer()
        self.write(w, include_params)
        return w.bytes()

    @classmethod
    def read(cls, r: Reader, seed: Seed, params: HamParams | None = None) -> "HamSketch":
        if params is None:
            n, k, vbits = r.uvar(), r.uvar(), r.uvar()
            params = HamParams(n, k, vbits, seed, r.text())
        sk = cls(params)
        c = params.cells
        count, keysum, valsum, checksum = (_unpack(r.raw(c * nb), nb) for nb in params.field_bytes())
        sk.count = _unzigzag(count)
        sk.keysum, sk.valsum, sk.checksum = keysum, valsum, checksum
        sk.verify = r.fixed(params.field_bytes()[3])
        return sk

    @classmethod
    def from_bytes(cls, data: bytes, seed: Seed) -> "HamSketch":
        r = Reader(data)
        out = cls.read(r, seed)
        r.done()
        return out


def ham_sketch_stream(elements, params: HamParams) -> HamSketch:
    sk = HamSketch(params)
    for i, v in elements:
        sk.add(i, v)
    return sk


def ham_sketch_build(values, params: HamParams, start: int = 1) -> HamSketch:
    """Sketch of a dense vector; coordinate ``start + j`` holds ``values[j]``."""
    vals = np.asarray(values, dtype=np.uint64)
    sk = HamSketch(params)
    sk.add_batch(np.arange(start, start + len(vals), dtype=np.uint64), vals)
    return sk


def ham_build_many(params: list[HamParams], values: list[np.ndarray]) -> list[HamSketch]:
    """``ham_sketch_build`` for many dense vectors in one vectorised pass."""
    m = len(params)
    if m == 0:
        return []
    lens = np.array([len(v) for v in values], dtype=np.int64)
    owner = np.repeat(np.arange(m), lens)
    idx = (np.arange(int(lens.sum())) - np.repeat(np.cumsum(lens) - lens, lens) + 1).astype(np.uint64)
    vals = np.concatenate([np.asarray(v, dtype=np.uint64) for v in values]) if lens.sum() else np.zeros(0, np.uint64)
    salts = np.array([p.salts() for p in params], dtype=np.uint64)  # (m, SUBTABLES + 2)
    widths = np.array([p.width for p in params], dtype=np.uint64)
    cells = np.array([p.cells for p in params], dtype=np.int64)
    base = np.cumsum(cells) - cells
    total = int(cells.sum())
    count = np.zeros(total, dtype=np.int64)
    keysum = np.zeros(total, dtype=np.uint64)
    valsum = np.zeros(total, dtype=np.uint64)
    checksum = np.zeros(total, dtype=np.uint64)
    verify = np.zeros(m, dtype=np.uint64)

    def fp(t):
        return mix64_np(mix64_np(idx ^ salts[owner, t]) ^ vals)

    check = fp(SUBTABLES)
    w = widths[owner]
    for t in range(SUBTABLES):
        c = (fp(t) % w).astype(np.int64) + t * w.astype(np.int64) + base[owner]
        np.add.at(count, c, 1)
        np.add.at(keysum, c, idx)
        np.add.at(valsum, c, vals)
        np.add.at(checksum, c, check)
    np.add.at(verify, owner, fp(SUBTABLES + 1))
    out = []
    for k, p in enumerate(params):
        sk = HamSketch(p)
        sl = slice(int(base[k]), int(base[k] + cells[k]))
        sk.count, sk.keysum, sk.valsum, sk.checksum = count[sl], keysum[sl], valsum[sl], checksum[sl]
        sk.verify = int(verify[k])
        sk._last = int(lens[k])
        out.append(sk)
    return out


def ham_sketch_decode(sk_a: HamSketch, sk_b: HamSketch) -> list[tuple[int, int, int]]:
    """Differing coordinates as sorted (index, a_value, b_value); DecodeError if more than k."""
    got = ham_decode_many([(sk_a, sk_b)])[0]
    if isinstance(got, DecodeError):
        raise got
    return got


def ham_decode_many(pairs) -> list:
    """Decode many sketch pairs together; each result is a diff list or a DecodeError."""
    m = len(pairs)
    if m == 0:
        return []
    for a, b in pairs:
        if b.params.cells != a.params.cells or b.params.val_bits != a.params.val_bits:
            raise FormatError("sketches built with different parameters")
    params = [a.params for a, _ in pairs]
    cells = np.array([p.cells for p in params], dtype=np.int64)
    base = np.cumsum(cells) - cells
    owner_c = np.repeat(np.arange(m), cells)
    km = np.array([_mask(p.key_bits) for p in params], dtype=np.uint64)
    vm = np.array([_mask(p.val_bits) for p in params], dtype=np.uint64)
    cm = np.uint64(_mask(CHECK_BITS))
    nmax = np.array([p.n for p in params], dtype=np.uint64)
    widths = np.array([p.width for p in params], dtype=np.int64)
    salts = np.array([a._salts for a, _ in pairs], dtype=np.uint64)
    zero = np.uint64(0)
    cat = np.concatenate
    dc = cat([a.count - b.count for a, b in pairs])
    dk = cat([a.keysum - b.keysum for a, b in pairs]) & km[owner_c]
    dv = cat([a.valsum - b.valsum for a, b in pairs]) & vm[owner_c]
    dh = cat([a.checksum - b.checksum for a, b in pairs]) & cm
    side: list[dict] = [{1: {}, -1: {}} for _ in range(m)]
    errors: dict[int, DecodeError] = {}
    for _ in range(4 * int(cells.max()) + 16):
        cand = np.flatnonzero((dc == 1) | (dc == -1))
        if not len(cand):
            break
        own = owner_c[cand]
        sg = dc[cand]
        pos = sg == 1
        i = np.where(pos, dk[cand], (zero - dk[cand]) & km[own])
        v = np.where(pos, dv[cand], (zero - dv[cand]) & vm[own])
        chk = mix64_np(mix64_np(i ^ salts[own, SUBTABLES]) ^ v) & cm
        ok = (np.where(pos, chk, (zero - chk) & cm) == dh[cand]) & (i >= 1) & (i <= nmax[own])
        if not ok.any():
            break
        found = np.unique(np.stack([own[ok].astype(np.uint64), (sg[ok] > 0).astype(np.uint64), i[ok], v[ok]],
                                   axis=1), axis=0)
        own_f = found[:, 0].astype(np.int64)
        sg_f = np.where(found[:, 1] == 1, 1, -1)
        i_f, v_f = found[:, 2], found[:, 3]
        for o, s_, ii, vv in zip(own_f.tolist(), sg_f.tolist(), i_f.tolist(), v_f.tolist()):
            if ii in side[o][s_]:
                errors.setdefault(o, DecodeError("index recovered twice on one side"))
            side[o][s_][ii] = vv
        neg = sg_f < 0
        chk_f = mix64_np(mix64_np(i_f ^ salts[own_f, SUBTABLES]) ^ v_f)
        di = np.where(neg, i_f, zero - i_f)
        dvv = np.where(neg, v_f, zero - v_f)
        dch = np.where(neg, chk_f, zero - chk_f)
        w = widths[own_f]
        for t in range(SUBTABLES):
            cc = (mix64_np(mix64_np(i_f ^ salts[own_f, t]) ^ v_f) % w.astype(np.uint64)).astype(np.int64)
            cc += t * w + base[own_f]
            np.add.at(dc, cc, -sg_f)
            np.add.at(dk, cc, di)
            np.add.at(dv, cc, dvv)
            np.add.at(dh, cc, dch)
        dk &= km[owner_c]
        dv &= vm[owner_c]
        dh &= cm
    left = np.flatnonzero((dc != 0) | (dk != 0) | (dv != 0) | (dh != 0))
    for o in np.unique(owner_c[left]).tolist():
        errors.setdefault(o, DecodeError("sketch difference could not be fully peeled"))
    out = []
    for o, (sk_a, sk_b) in enumerate(pairs):
        if o in errors:
            out.append(errors[o])
            continue
        got = side[o]
        if got[1].keys() != got[-1].keys():
            out.append(DecodeError("unpaired coordinate in sketch difference"))
            continue
        diffs = sorted((i, got[1][i], got[-1][i]) for i in got[1])
        if len(diffs) > params[o].k:
            out.append(DecodeError(f"{len(diffs)} differences exceed budget {params[o].k}"))
            continue
        vs = int(salts[o, SUBTABLES + 1])
        ver = sum(mix64(mix64(i ^ vs) ^ x) - mix64(mix64(i ^ vs) ^ y) for i, x, y in diffs)
        if (ver - (sk_a.verify - sk_b.verify)) & _mask(CHECK_BITS):
            out.append(DecodeError("verification sum mismatch"))
            continue
        out.append(diffs)
    return out
