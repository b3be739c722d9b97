"""Seeded randomness and hash families shared by all protocols.

Every random choice is derived from a 256-bit :class:`Seed` and a textual
stream label, so both parties of a protocol regenerate identical functions
from the seed carried in a message header.
"""
from __future__ import annotations

import hashlib
import os
from dataclasses import dataclass

import numpy as np

MERSENNE61 = (1 << 61) - 1
MASK64 = (1 << 64) - 1


@dataclass(frozen=True)
class Seed:
    value: bytes

    def __post_init__(self):
        if len(self.value) != 32:
            raise ValueError("seed must be exactly 32 bytes")

    @classmethod
    def from_hex(cls, text: str) -> "Seed":
        text = text.strip().lower()
        if len(text) != 64:
            raise ValueError("seed must be 64 hex characters")
        return cls(bytes.fromhex(text))

    @classmethod
    def from_int(cls, x: int) -> "Seed":
        """Convenience for tests and experiments: expand a small integer."""
        return cls(hashlib.blake2b(x.to_bytes(16, "little", signed=True), digest_size=32).digest())

    @classmethod
    def random(cls) -> "Seed":
        return cls(os.urandom(32))

    def hex(self) -> str:
        return self.value.hex()

    def derive(self, label: str, nbytes: int = 32) -> bytes:
        return hashlib.blake2b(label.encode(), key=self.value, digest_size=nbytes).digest()

    def derive_int(self, label: str, bits: int = 64) -> int:
        return int.from_bytes(self.derive(label, (bits + 7) // 8), "little") & ((1 << bits) - 1)

    def rng(self, label: str) -> np.random.Generator:
        return np.random.Generator(np.random.Philox(key=self.derive_int(label, 128)))

    def __repr__(self) -> str:
        return f"Seed({self.hex()[:12]}...)"


def prf_bits(seed: Seed, stream_id: str, count: int) -> np.ndarray:
    """``count`` pseudorandom bits (uint8 array) for stream ``stream_id``.

    Philox is a counter-based keyed function; the key is the seed hashed with
    the stream label, so distinct labels give unrelated streams.
    """
    if count < 0:
        raise ValueError("count must be non-negative")
    if count == 0:
        return np.zeros(0, dtype=np.uint8)
    gen = np.random.Philox(key=seed.derive_int("prf/" + stream_id, 128))
    words = gen.random_raw((count + 63) // 64).astype("<u8")
    return np.unpackbits(words.view(np.uint8), bitorder="little")[:count]


class KRHasher:
    """Karp-Rabin polynomial hash over GF(2^61 - 1), truncated to ``range_bits``.

    ``sign`` of the empty string is 0. Appending one bit costs one
    multiply-add; substring signatures come from prefix tables.
    """

    def __init__(self, seed: Seed, label: str, range_bits: int = 61):
        if not 1 <= range_bits <= 61:
            raise ValueError("range_bits must be in [1, 61]")
        self.base = 2 + seed.derive_int("kr/" + label, 64) % (MERSENNE61 - 4)
        self.range_bits = range_bits
        self._mask = (1 << range_bits) - 1

    def extend(self, h: int, bit: int) -> int:
        """Full-width state after appending ``bit``."""
        return (h * self.base + bit + 1) % MERSENNE61

    def truncate(self, h: int) -> int:
        return h & self._mask

    def sign(self, bits) -> int:
        h = 0
        base = self.base
        for b in bytes(getattr(bits, "bits", bits)):
            h = (h * base + b + 1) % MERSENNE61
        return h & self._mask

    def prefix(self, bits) -> "PrefixHashes":
        return PrefixHashes(self, bytes(getattr(bits, "bits", bits)))


class PrefixHashes:
    """Prefix table answering substring signatures in O(1)."""

    def __init__(self, hasher: KRHasher, raw: bytes):
        self.hasher = hasher
        p, base = MERSENNE61, hasher.base
        pre = [0] * (len(raw) + 1)
        pw = [1] * (len(raw) + 1)
        h, q = 0, 1
        for k, b in enumerate(raw, 1):
            h = (h * base + b + 1) % p
            q = q * base % p
            pre[k] = h
            pw[k] = q
        self._pre = pre
        self._pw = pw

    def __len__(self) -> int:
        return len(self._pre) - 1

    def full(self, i: int, j: int) -> int:
        """Untruncated signature of bits ``i..j`` (1-based, inclusive)."""
        if j < i:
            return 0
        return (self._pre[j] - self._pre[i - 1] * self._pw[j - i + 1]) % MERSENNE61

    def sig(self, i: int, j: int) -> int:
        return self.full(i, j) & self.hasher._mask


class UnivHasher:
    """Carter-Wegman family ``((a*i + b) mod p) mod v`` onto ``[1..v]``.

    Pairwise collision probability is at most 2/v for ``v`` far below
    ``p = 2^61 - 1``.
    """

    def __init__(self, seed: Seed, label: str, u: int, v: int):
        if u < 1 or v < 1:
            raise ValueError("domain and range must be positive")
        self.u, self.v = u, v
        self.a = 1 + seed.derive_int("univ/a/" + label, 64) % (MERSENNE61 - 1)
        self.b = seed.derive_int("univ/b/" + label, 64) % MERSENNE61

    def __call__(self, i: int) -> int:
        if not 1 <= i <= self.u:
            raise ValueError(f"index {i} outside [1..{self.u}]")
        return (self.a * i + self.b) % MERSENNE61 % self.v + 1


def univ_eval(h: UnivHasher, i: int) -> int:
    return h(i)


def kr_sign(h: KRHasher, s) -> int:
    return h.sign(s)


# 64-bit mixing (splitmix64 finaliser) for table hashing; a scalar and a
# numpy form that agree bit for bit.

_M1 = 0xBF58476D1CE4E5B9
_M2 = 0x94D049BB133111EB
_GOLD = 0x9E3779B97F4A7C15


def mix64(x: int) -> int:
    x = (x + _GOLD) & MASK64
    x = ((x ^ (x >> 30)) * _M1) & MASK64
    x = ((x ^ (x >> 27)) * _M2) & MASK64
    return x ^ (x >> 31)


def mix64_np(x: np.ndarray) -> np.ndarray:
    x = x.astype(np.uint64) + np.uint64(_GOLD)
    x = (x ^ (x >> np.uint64(30))) * np.uint64(_M1)
    x = (x ^ (x >> np.uint64(27))) * np.uint64(_M2)
    return x ^ (x >> np.uint64(31))
