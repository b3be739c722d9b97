"""Finite fields and Berlekamp-Massey, shared by the Reed-Solomon codecs."""
from __future__ import annotations

from functools import lru_cache


class GF2_16:
    """GF(2^16) with primitive polynomial x^16 + x^12 + x^3 + x + 1."""

    order = 1 << 16
    poly = 0x1100B

    def __init__(self):
        exp = [0] * (2 * self.order)
        log = [0] * self.order
        x = 1
        for k in range(self.order - 1):
            exp[k] = x
            log[x] = k
            x <<= 1
            if x & self.order:
                x ^= self.poly
        for k in range(self.order - 1, 2 * self.order):
            exp[k] = exp[k - (self.order - 1)]
        self.exp, self.log = exp, log

    zero, one = 0, 1

    def add(self, a, b):
        return a ^ b

    sub = add

    def neg(self, a):
        return a

    def mul(self, a, b):
        if a == 0 or b == 0:
            return 0
        return self.exp[self.log[a] + self.log[b]]

    def inv(self, a):
        if a == 0:
            raise ZeroDivisionError("inverse of zero")
        return self.exp[(self.order - 1) - self.log[a]]

    def pow(self, a, e):
        if a == 0:
            return 0 if e else 1
        return self.exp[(self.log[a] * e) % (self.order - 1)]

    def alpha(self, k):
        return self.exp[k % (self.order - 1)]


@lru_cache(maxsize=1)
def gf2_16() -> GF2_16:
    return GF2_16()


class PrimeField:
    def __init__(self, q: int):
        self.q = q

    zero, one = 0, 1

    def add(self, a, b):
        return (a + b) % self.q

    def sub(self, a, b):
        return (a - b) % self.q

    def neg(self, a):
        return -a % self.q

    def mul(self, a, b):
        return a * b % self.q

    def inv(self, a):
        if a % self.q == 0:
            raise ZeroDivisionError("inverse of zero")
        return pow(a, -1, self.q)

    def pow(self, a, e):
        return pow(a, e, self.q)


@lru_cache(maxsize=None)
def next_prime(x: int) -> int:
    from sympy import nextprime

    return int(nextprime(x))


def berlekamp_massey(F, seq):
    """Shortest connection polynomial C (C[0] = 1) generating ``seq``."""
    C, B = [F.one], [F.one]
    L, m, b = 0, 1, F.one
    for n, s in enumerate(seq):
        d = s
        for i in range(1, L + 1):
            d = F.add(d, F.mul(C[i], seq[n - i]))
        if d == 0:
            m += 1
            continue
        coef = F.mul(d, F.inv(b))
        T = list(C)
        if len(C) < len(B) + m:
            C = C + [F.zero] * (len(B) + m - len(C))
        for i, bi in enumerate(B):
            C[i + m] = F.sub(C[i + m], F.mul(coef, bi))
        if 2 * L <= n:
            L, B, b, m = n + 1 - L, T, d, 1
        else:
            m += 1
    return C[: L + 1], L


def poly_eval(F, coeffs, x):
    """Evaluate sum coeffs[i] x^i."""
    acc = F.zero
    for c in reversed(coeffs):
        acc = F.add(F.mul(acc, x), c)
    return acc


def solve_linear(F, A, y):
    """Gaussian elimination; returns None when the system is singular."""
    n = len(A)
    M = [list(row) + [v] for row, v in zip(A, y)]
    for col in range(n):
        piv = next((r for r in range(col, n) if M[r][col] != 0), None)
        if piv is None:
            return None
        M[col], M[piv] = M[piv], M[col]
        inv = F.inv(M[col][col])
        M[col] = [F.mul(v, inv) for v in M[col]]
        for r in range(n):
            if r != col and M[r][col] != 0:
                f = M[r][col]
                M[r] = [F.sub(a, F.mul(f, b)) for a, b in zip(M[r], M[col])]
    return [M[r][n] for r in range(n)]
