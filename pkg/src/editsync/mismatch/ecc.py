"""Recovery of a vector from a close one when the differences lie in a known set.

The sender hashes indices into ``v`` buckets and keeps, per bucket, the sum of
the values that fall there. Only the syndromes of that bucket vector are sent
(a Reed-Solomon code in syndrome form over a prime field larger than ``v``),
plus a 64-bit checksum of the whole vector. The receiver rebuilds the bucket
vector of its own copy; the difference is non-zero in at most ``k`` buckets,
all of which are images of candidate indices, so the error locator is only
evaluated on those.

Vectors may be dense (a sequence) or sparse (``dict`` index -> value, with
1-based indices and implicit zeros).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import DecodeError, FormatError
from ..hashing import MASK64, Seed, UnivHasher, mix64
from ..wire import Reader, Writer
from .fields import PrimeField, berlekamp_massey, next_prime, solve_linear

MIN_FIELD_BITS = 16
V_CAP = (1 << 31) - (1 << 20)


def bucket_count(k: int, lam: int, p: float) -> int:
    v = k * k / p if lam == k else 4 * k * lam / p
    return max(2, min(V_CAP, math.ceil(v)))


def _items(vec):
    if isinstance(vec, dict):
        return [(int(i), int(x)) for i, x in vec.items() if x]
    arr = vec.tolist() if isinstance(vec, np.ndarray) else list(vec)
    return [(i, int(x)) for i, x in enumerate(arr, 1) if x]


def field_prime(v: int) -> int:
    return next_prime(max(v, 1 << MIN_FIELD_BITS))


def _limbs(x: int, L: int, bits: int) -> list[int]:
    mask = (1 << bits) - 1
    return [(x >> (bits * l)) & mask for l in range(L)]


def _entry_sum(i: int, x: int, L: int, bits: int) -> int:
    h = mix64(i)
    for limb in _limbs(x, L, bits):
        h = mix64(h ^ limb)
    return h


@dataclass(frozen=True)
class EccRedundancy:
    u: int
    k: int
    lam: int
    v: int
    limbs: int
    synd: tuple  # limbs x 2k field elements
    checksum: int
    label: str = "ecc"

    @property
    def q(self) -> int:
        return field_prime(self.v)

    @property
    def limb_bits(self) -> int:
        """Limbs are strictly below q, so limb sums never alias."""
        return self.q.bit_length() - 1

    def hasher(self, seed: Seed) -> UnivHasher:
        return UnivHasher(seed, self.label, self.u, self.v)

    def payload_bits(self) -> int:
        return len(self.synd) * len(self.synd[0]) * self.q.bit_length() + 64 if self.synd else 64

    def write(self, w: Writer):
        w.uvar(self.u).uvar(self.k).uvar(self.lam).uvar(self.v).uvar(self.limbs).text(self.label)
        self.write_payload(w)

    def write_payload(self, w: Writer):
        """Syndromes and checksum only; the receiver knows the parameters."""
        nbytes = (self.q.bit_length() + 7) // 8
        for row in self.synd:
            for s in row:
                w.fixed(s, nbytes)
        w.fixed(self.checksum, 8)

    @classmethod
    def read(cls, r: Reader) -> "EccRedundancy":
        u, k, lam, v, limbs = (r.uvar() for _ in range(5))
        label = r.text()
        return cls.read_payload(r, u, k, lam, v, limbs, label)

    @classmethod
    def read_payload(cls, r: Reader, u, k, lam, v, limbs, label) -> "EccRedundancy":
        q = field_prime(v)
        nbytes = (q.bit_length() + 7) // 8
        synd = tuple(tuple(r.fixed(nbytes) for _ in range(2 * k)) for _ in range(limbs))
        if any(s >= q for row in synd for s in row):
            raise FormatError("syndrome out of field range")
        return cls(u, k, lam, v, limbs, synd, r.fixed(8), label)

    def to_bytes(self) -> bytes:
        w = Writer()
        self.write(w)
        return w.bytes()

    @classmethod
    def from_bytes(cls, data: bytes) -> "EccRedundancy":
        r = Reader(data)
        out = cls.read(r)
        r.done()
        return out


def _syndromes(items, f, L: int, k: int, q: int, bits: int):
    """limbs x 2k syndromes sum_i limb_l(x_i) * f(i)^m and the checksum."""
    S = np.zeros((L, 2 * k), dtype=np.int64)
    check = 0
    if not items:
        return S, check
    xs = np.array([f(i) for i, _ in items], dtype=np.int64)
    vals = np.array([_limbs(x, L, bits) for _, x in items], dtype=np.int64).T
    pw = xs % q
    for m in range(2 * k):
        S[:, m] = ((vals * pw[None, :]) % q).sum(axis=1) % q
        pw = pw * xs % q
    for i, x in items:
        check = (check + _entry_sum(i, x, L, bits)) & MASK64
    return S, check


def ecc_encode(a, k: int, lam: int, p: float, seed: Seed, sigma_bits: int | None = None,
               label: str = "ecc", u: int | None = None) -> EccRedundancy:
    items = _items(a)
    u = u if u is not None else (len(a) if not isinstance(a, dict) else None)
    if u is None:
        raise ValueError("sparse input needs an explicit dimension u")
    if not 1 <= k <= lam or not 0 < p < 1:
        raise ValueError("need lam >= k >= 1 and 0 < p < 1")
    if sigma_bits is None:
        sigma_bits = max([x.bit_length() for _, x in items] + [1])
    v = bucket_count(k, lam, p)
    bits = field_prime(v).bit_length() - 1
    L = max(1, -(-sigma_bits // bits))
    red = EccRedundancy(u, k, lam, v, L, (), 0, label)
    S, check = _syndromes(items, red.hasher(seed), L, k, red.q, bits)
    return EccRedundancy(u, k, lam, v, L, tuple(map(tuple, S.tolist())), check, label)


def ecc_recover(red: EccRedundancy, b, candidates, seed: Seed) -> dict:
    """Entries of ``a`` that differ from ``b``, as {index: value}."""
    items = _items(b)
    bmap = dict(items)
    q, L, k, bits = red.q, red.limbs, red.k, red.limb_bits
    if any(x >> (L * bits) for _, x in items):
        raise DecodeError("receiver vector has values wider than the code")
    f = red.hasher(seed)
    Sb, check_b = _syndromes(items, f, L, k, q, bits)
    D = (np.array(red.synd, dtype=np.int64).reshape(L, 2 * k) - Sb) % q
    if not D.any():
        if check_b != red.checksum:
            raise DecodeError("checksum mismatch with zero syndrome difference")
        return {}
    F = PrimeField(q)
    coef = [1 + seed.derive_int(f"ecc/mix/{red.label}/{l}") % (q - 1) for l in range(L)]
    T = [sum(c * int(D[l, m]) for l, c in enumerate(coef)) % q for m in range(2 * k)]
    lam_poly, deg = berlekamp_massey(F, T)
    if deg > k or deg == 0:
        raise DecodeError("more differing buckets than the budget")
    # x^deg * Lambda(1/x), low-first; its roots are the differing buckets
    rev = [lam_poly[deg - i] if deg - i < len(lam_poly) else 0 for i in range(deg + 1)]
    by_bucket: dict[int, list[int]] = {}
    for i in candidates:
        by_bucket.setdefault(f(int(i)), []).append(int(i))
    roots = []
    for x, idxs in by_bucket.items():
        acc = 0
        for c in reversed(rev):
            acc = (acc * x + c) % q
        if acc == 0:
            if len(idxs) > 1:
                raise DecodeError("two candidates share a differing bucket")
            roots.append((x, idxs[0]))
    if len(roots) != deg:
        raise DecodeError("error locator roots do not match candidates")
    X = [x for x, _ in roots]
    A = [[pow(x, m, q) for x in X] for m in range(1, deg + 1)]
    changes = {}
    deltas = []
    for l in range(L):
        vals = solve_linear(F, A, [int(D[l, m]) for m in range(deg)])
        if vals is None:
            raise DecodeError("singular value system")
        for m in range(deg, 2 * k):
            if sum(v * pow(x, m + 1, q) for x, v in zip(X, vals)) % q != D[l, m]:
                raise DecodeError("syndromes inconsistent with recovered values")
        deltas.append(vals)
    check = check_b
    limb_max = 1 << bits
    for j, (_, i) in enumerate(roots):
        old = bmap.get(i, 0)
        new = 0
        for l, limb in enumerate(_limbs(old, L, bits)):
            nl = (limb + deltas[l][j]) % q
            if nl >= limb_max:
                raise DecodeError("recovered symbol out of range")
            new |= nl << (bits * l)
        if old:
            check = (check - _entry_sum(i, old, L, bits)) & MASK64
        if new:
            check = (check + _entry_sum(i, new, L, bits)) & MASK64
        changes[i] = new
    if check != red.checksum:
        raise DecodeError("checksum mismatch after recovery")
    return changes


def ecc_decode(red: EccRedundancy, b, candidates, seed: Seed):
    """Recover ``a``; same container type as ``b``. Raises DecodeError."""
    changes = ecc_recover(red, b, candidates, seed)
    if isinstance(b, dict):
        out = {i: x for i, x in b.items() if x}
        for i, x in changes.items():
            if x:
                out[i] = x
            else:
                out.pop(i, None)
        return out
    out = [int(x) for x in b]
    for i, x in changes.items():
        out[i - 1] = x
    return np.array(out) if isinstance(b, np.ndarray) else out
