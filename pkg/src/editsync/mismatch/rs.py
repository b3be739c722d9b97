"""Systematic Reed-Solomon code over GF(2^16)."""
from __future__ import annotations

from dataclasses import dataclass, field

from ..errors import DecodeError
from .fields import berlekamp_massey, gf2_16, poly_eval, solve_linear


@dataclass(frozen=True)
class RSCode:
    data_len: int
    parity_len: int
    _gen: tuple = field(default=(), repr=False, compare=False)

    def __post_init__(self):
        if self.data_len < 1 or self.parity_len < 0:
            raise ValueError("bad code dimensions")
        if self.data_len + self.parity_len >= (1 << 16):
            raise ValueError("codeword longer than the field allows")
        F = gf2_16()
        g = [1]  # high-first coefficients
        for i in range(1, self.parity_len + 1):
            a = F.alpha(i)
            nxt = g + [0]
            for k, c in enumerate(g):
                nxt[k + 1] ^= F.mul(c, a)
            g = nxt
        object.__setattr__(self, "_gen", tuple(g))

    @classmethod
    def for_errors(cls, data_len: int, k: int) -> "RSCode":
        return cls(data_len, 2 * k)

    @property
    def length(self) -> int:
        return self.data_len + self.parity_len


def rs_encode(code: RSCode, data) -> list[int]:
    data = [int(x) for x in data]
    if len(data) != code.data_len:
        raise ValueError("data length mismatch")
    if any(not 0 <= x < (1 << 16) for x in data):
        raise ValueError("symbols must be 16-bit")
    F = gf2_16()
    gen = code._gen
    r = code.parity_len
    rem = data + [0] * r
    for i in range(code.data_len):
        c = rem[i]
        if c:
            for k in range(1, r + 1):
                rem[i + k] ^= F.mul(gen[k], c)
    return rem[code.data_len:]


def rs_correct(code: RSCode, data, parity) -> list[int]:
    """Return the corrected data symbols or raise DecodeError."""
    F = gf2_16()
    cw = [int(x) for x in data] + [int(x) for x in parity]
    if len(cw) != code.length:
        raise ValueError("codeword length mismatch")
    N, r = code.length, code.parity_len
    low_first = cw[::-1]
    synd = [poly_eval(F, low_first, F.alpha(i)) for i in range(1, r + 1)]
    if not any(synd):
        return cw[: code.data_len]
    lam, L = berlekamp_massey(F, synd)
    if 2 * L > r:
        raise DecodeError("too many symbol errors")
    positions = [idx for idx in range(N) if poly_eval(F, lam, F.alpha(-(N - 1 - idx))) == 0]
    if len(positions) != L:
        raise DecodeError("error locator has wrong root count")
    X = [F.alpha(N - 1 - idx) for idx in positions]
    A = [[F.pow(x, i) for x in X] for i in range(1, L + 1)]
    vals = solve_linear(F, A, synd[:L])
    if vals is None:
        raise DecodeError("singular error-value system")
    for i in range(L + 1, r + 1):
        acc = 0
        for x, v in zip(X, vals):
            acc ^= F.mul(v, F.pow(x, i))
        if acc != synd[i - 1]:
            raise DecodeError("syndromes inconsistent with error pattern")
    for idx, v in zip(positions, vals):
        cw[idx] ^= v
    return cw[: code.data_len]
