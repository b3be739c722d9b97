from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

from ..hashing import Seed

SIG_BITS = 40
TAG_MIN = 12


def ceil_log2(n: int) -> int:
    return max(1, math.ceil(math.log2(max(n, 2))))


@dataclass(frozen=True)
class SketchParams:
    """Sizes for one edit sketch.

    ``n`` bounds the input length; shorter inputs are zero-padded to ``n``
    before walking and the true length travels in the sketch header.
    """

    n: int
    K: int
    seed: Seed
    c_rho: float = 1.0
    c_N: float = 1.0
    rho_override: int | None = None

    def __post_init__(self):
        if self.n < 2 or self.K < 1:
            raise ValueError("need n >= 2 and K >= 1")
        if self.n >= 1 << 24:
            raise ValueError("inputs longer than 2^24 bits are not supported")

    @cached_property
    def log_n(self) -> int:
        return ceil_log2(self.n)

    @cached_property
    def rho(self) -> int:
        if self.rho_override is not None:
            return self.rho_override
        return max(1, math.ceil(self.c_rho * self.K ** 2 * self.log_n))

    @cached_property
    def B(self) -> int:
        return 4 * self.log_n

    @cached_property
    def leaves(self) -> int:
        d = -(-3 * self.n // self.B)
        return 1 << (d - 1).bit_length()

    @cached_property
    def levels(self) -> int:
        """Number of stored tree levels below the root (leaves are level 0)."""
        return self.leaves.bit_length() - 1

    @cached_property
    def N_raw(self) -> int:
        return math.ceil(self.c_N * self.K ** 6 * self.log_n ** 2)

    @cached_property
    def N(self) -> int:
        return min(self.N_raw, self.leaves)

    @property
    def cap_binds(self) -> bool:
        return self.N_raw > self.leaves

    def capacity(self, level: int) -> int:
        return min(self.N, self.leaves >> level)

    # value layouts
    @cached_property
    def len_bits(self) -> int:
        return (self.n + 1).bit_length()

    @cached_property
    def sig_bits(self) -> int:
        return min(SIG_BITS, 64 - self.len_bits)

    @cached_property
    def q_limbs(self) -> int:
        return -(-self.B // (64 - TAG_MIN))

    @cached_property
    def chunk_bits(self) -> int:
        return -(-self.B // self.q_limbs)

    @cached_property
    def tag_bits(self) -> int:
        return 64 - self.chunk_bits

    def with_rho(self, rho: int) -> "SketchParams":
        return SketchParams(self.n, self.K, self.seed, self.c_rho, self.c_N, rho)
