"""Bit strings, edit scripts, alignments and the exact reference aligners.

Indices are 1-based throughout the public API: ``s[1]`` is the first bit,
an edit op at ``pos`` refers to the ``pos``-th symbol of the string as it
stands when the op is applied, and alignment edges ``(i, j)`` pair ``s[i]``
with ``t[j]``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, NamedTuple, Sequence

import numpy as np

from .errors import AlignmentError, ScriptError, SizeError

ORACLE_CAP = 1 << 16


class BitString:
    """Immutable bit sequence stored as one byte (0 or 1) per bit."""

    __slots__ = ("_bits",)

    def __init__(self, bits: "str | bytes | bytearray | Iterable[int] | np.ndarray | BitString" = b""):
        if isinstance(bits, BitString):
            raw = bits._bits
        elif isinstance(bits, str):
            if bits.strip("01"):
                raise ValueError(f"not a bit string: {bits[:32]!r}")
            raw = bits.encode().translate(_ASCII_TO_BIT)
        elif isinstance(bits, (bytes, bytearray)):
            raw = bytes(bits)
            if raw.translate(None, b"\x00\x01"):
                raise ValueError("bit bytes must be 0 or 1")
        elif isinstance(bits, np.ndarray):
            raw = np.ascontiguousarray(bits, dtype=np.uint8).tobytes()
            if raw.translate(None, b"\x00\x01"):
                raise ValueError("bit array must be 0 or 1")
        else:
            raw = bytes(bytearray(int(b) for b in bits))
            if raw.translate(None, b"\x00\x01"):
                raise ValueError("bits must be 0 or 1")
        self._bits = raw

    @classmethod
    def _wrap(cls, raw: bytes) -> "BitString":
        obj = cls.__new__(cls)
        obj._bits = raw
        return obj

    @classmethod
    def from_bytes(cls, data: bytes) -> "BitString":
        """Expand each byte into 8 bits, most significant first."""
        arr = np.unpackbits(np.frombuffer(bytes(data), dtype=np.uint8))
        return cls._wrap(arr.tobytes())

    def to_bytes(self) -> bytes:
        """Inverse of :meth:`from_bytes`; the length must be a multiple of 8."""
        if len(self) % 8:
            raise ValueError("length is not a whole number of bytes")
        return self.packed()

    def packed(self) -> bytes:
        """Bits packed 8 per byte, MSB first, zero-padded at the end."""
        return np.packbits(np.frombuffer(self._bits, dtype=np.uint8)).tobytes()

    @classmethod
    def unpack(cls, data: bytes, length: int) -> "BitString":
        arr = np.unpackbits(np.frombuffer(data, dtype=np.uint8))[:length]
        if len(arr) != length:
            raise ValueError("packed data shorter than declared length")
        return cls._wrap(arr.tobytes())

    @property
    def bits(self) -> bytes:
        return self._bits

    @property
    def array(self) -> np.ndarray:
        return np.frombuffer(self._bits, dtype=np.uint8)

    def __len__(self) -> int:
        return len(self._bits)

    def __iter__(self):
        return iter(self._bits)

    def __getitem__(self, i: int) -> int:
        if not isinstance(i, (int, np.integer)):
            raise TypeError("use substr() for ranges; indexing is 1-based")
        if not 1 <= i <= len(self._bits):
            raise IndexError(f"bit index {i} outside [1..{len(self._bits)}]")
        return self._bits[i - 1]

    def substr(self, i: int, j: int) -> "BitString":
        """Bits ``i..j`` inclusive (1-based); empty when ``j < i``."""
        if j < i:
            return BitString._wrap(b"")
        if i < 1 or j > len(self._bits):
            raise IndexError(f"range [{i}..{j}] outside [1..{len(self._bits)}]")
        return BitString._wrap(self._bits[i - 1 : j])

    def __add__(self, other: "BitString") -> "BitString":
        return BitString._wrap(self._bits + BitString(other)._bits)

    def __eq__(self, other: object) -> bool:
        if isinstance(other, BitString):
            return self._bits == other._bits
        if isinstance(other, str):
            return str(self) == other
        return NotImplemented

    def __hash__(self) -> int:
        return hash(self._bits)

    def __str__(self) -> str:
        return self._bits.translate(_BIT_TO_ASCII).decode()

    def __repr__(self) -> str:
        text = str(self)
        if len(text) > 40:
            text = text[:37] + "..."
        return f"BitString({text!r}, len={len(self)})"


_ASCII_TO_BIT = bytes.maketrans(b"01", b"\x00\x01")
_BIT_TO_ASCII = bytes.maketrans(b"\x00\x01", b"01")


def as_bits(x) -> BitString:
    return x if isinstance(x, BitString) else BitString(x)


class EditOp(NamedTuple):
    kind: str  # "ins", "del" or "sub"
    pos: int
    bit: int | None = None

    def __str__(self) -> str:
        if self.kind == "del":
            return f"Delete@{self.pos}"
        name = "Insert" if self.kind == "ins" else "Substitute"
        return f"{name}@{self.pos} '{self.bit}'"


INS, DEL, SUB = "ins", "del", "sub"


@dataclass(frozen=True)
class EditScript:
    ops: tuple[EditOp, ...] = ()

    def __len__(self) -> int:
        return len(self.ops)

    def __iter__(self):
        return iter(self.ops)

    def to_records(self) -> list[dict]:
        return [{"op": op.kind, "pos": op.pos, "bit": op.bit} for op in self.ops]

    @classmethod
    def from_records(cls, records: Iterable[dict]) -> "EditScript":
        ops = []
        for rec in records:
            kind = rec["op"]
            if kind not in (INS, DEL, SUB):
                raise ScriptError(f"unknown op kind {kind!r}")
            bit = rec.get("bit")
            ops.append(EditOp(kind, int(rec["pos"]), None if bit is None else int(bit)))
        return cls(tuple(ops))


def apply_script(s, script: EditScript | Sequence[EditOp]) -> BitString:
    buf = bytearray(as_bits(s).bits)
    for op in script:
        n = len(buf)
        if op.kind == INS:
            if not 1 <= op.pos <= n + 1 or op.bit not in (0, 1):
                raise ScriptError(f"bad insert {op} on length {n}")
            buf.insert(op.pos - 1, op.bit)
        elif op.kind == DEL:
            if not 1 <= op.pos <= n:
                raise ScriptError(f"bad delete {op} on length {n}")
            del buf[op.pos - 1]
        elif op.kind == SUB:
            if not 1 <= op.pos <= n or op.bit not in (0, 1):
                raise ScriptError(f"bad substitute {op} on length {n}")
            buf[op.pos - 1] = op.bit
        else:
            raise ScriptError(f"unknown op kind {op.kind!r}")
    return BitString._wrap(bytes(buf))


# ---------------------------------------------------------------------------
# alignments


def check_alignment(s: BitString, t: BitString, edges: Sequence[tuple[int, int]]) -> None:
    pi = pj = 0
    for i, j in edges:
        if i <= pi or j <= pj:
            raise AlignmentError(f"edge {(i, j)} crosses or repeats after {(pi, pj)}")
        if i > len(s) or j > len(t):
            raise AlignmentError(f"edge {(i, j)} out of range")
        if s[i] != t[j]:
            raise AlignmentError(f"edge {(i, j)} joins unequal bits")
        pi, pj = i, j


def alignment_cost(n: int, m: int, edges: Sequence[tuple[int, int]]) -> int:
    cost = 0
    pi = pj = 0
    for i, j in list(edges) + [(n + 1, m + 1)]:
        cost += max(i - pi - 1, j - pj - 1)
        pi, pj = i, j
    return cost


def alignment_to_script(s, t, edges: Sequence[tuple[int, int]]) -> EditScript:
    """Edit script realising an alignment.

    Unmatched bits between consecutive edges are paired into substitutions
    left to right; the surplus on the longer side becomes deletions or
    insertions.
    """
    s, t = as_bits(s), as_bits(t)
    check_alignment(s, t, edges)
    ops: list[EditOp] = []
    pos = 1  # where the next unconsumed bit of s sits in the working string
    pi = pj = 0
    for i, j in list(edges) + [(len(s) + 1, len(t) + 1)]:
        gs, gt = i - pi - 1, j - pj - 1
        for k in range(min(gs, gt)):
            a, b = s[pi + 1 + k], t[pj + 1 + k]
            if a != b:
                ops.append(EditOp(SUB, pos, b))
            pos += 1
        for _ in range(gs - gt):
            ops.append(EditOp(DEL, pos))
        for k in range(gs, gt):
            ops.append(EditOp(INS, pos, t[pj + 1 + k]))
            pos += 1
        pos += 1  # the matched bit itself
        pi, pj = i, j
    return EditScript(tuple(ops))


# ---------------------------------------------------------------------------
# exact DP oracle

_INF = np.int32(1 << 29)


def _window(lo_p: int, row_p: np.ndarray, a: int, b: int) -> np.ndarray:
    out = np.full(b - a + 1, _INF, dtype=np.int32)
    lo = max(a, lo_p)
    hi = min(b, lo_p + len(row_p) - 1)
    if lo <= hi:
        out[lo - a : hi - a + 1] = row_p[lo - lo_p : hi - lo_p + 1]
    return out


def _banded_table(sa: np.ndarray, ta: np.ndarray, w: int):
    """Rows of the DP table restricted to |i - j| <= w, as (lo, values)."""
    n, m = len(sa), len(ta)
    rows = [(0, np.arange(0, min(m, w) + 1, dtype=np.int32))]
    for i in range(1, n + 1):
        lo, hi = max(0, i - w), min(m, i + w)
        if lo > hi:
            rows.append((lo, np.empty(0, dtype=np.int32)))
            continue
        lo_p, prev = rows[-1]
        up = _window(lo_p, prev, lo, hi) + 1
        diag = _window(lo_p, prev, lo - 1, hi - 1)
        jj = np.arange(max(lo, 1), hi + 1)
        off = max(lo, 1) - lo
        diag[off:] += (ta[jj - 1] != sa[i - 1]).astype(np.int32)
        if lo == 0:
            diag[0] = _INF
        best = np.minimum(up, diag)
        if lo == 0:
            best[0] = i
        idx = np.arange(lo, hi + 1, dtype=np.int32)
        row = np.minimum.accumulate(best - idx) + idx
        rows.append((lo, np.minimum(row, _INF).astype(np.int32)))
    return rows


def _cell(rows, i: int, j: int) -> int:
    lo, row = rows[i]
    k = j - lo
    if 0 <= k < len(row):
        return int(row[k])
    return int(_INF)


def optimal_alignment(s, t) -> tuple[int, list[tuple[int, int]]]:
    """Exact edit distance and one optimal alignment by dynamic programming.

    The table is computed inside a diagonal band that doubles until the
    distance fits in it, which makes the result exact and keeps memory at
    O((n + m) * distance).
    """
    s, t = as_bits(s), as_bits(t)
    n, m = len(s), len(t)
    if n > ORACLE_CAP or m > ORACLE_CAP:
        raise SizeError(f"oracle cap is {ORACLE_CAP} bits per string")
    sa, ta = s.array, t.array
    w = max(abs(n - m), 8)
    while True:
        rows = _banded_table(sa, ta, w)
        dist = _cell(rows, n, m)
        if dist <= w or w >= max(n, m):
            break
        w *= 2
    edges: list[tuple[int, int]] = []
    i, j, d = n, m, dist
    while i > 0 or j > 0:
        if j > 0 and _cell(rows, i, j - 1) + 1 == d:
            j, d = j - 1, d - 1
        elif i > 0 and _cell(rows, i - 1, j) + 1 == d:
            i, d = i - 1, d - 1
        else:
            same = sa[i - 1] == ta[j - 1]
            if same:
                edges.append((i, j))
            else:
                d -= 1
            i, j = i - 1, j - 1
    edges.reverse()
    return dist, edges


def ed_oracle(s, t) -> tuple[int, EditScript]:
    s, t = as_bits(s), as_bits(t)
    dist, edges = optimal_alignment(s, t)
    script = alignment_to_script(s, t, edges)
    assert len(script) == dist
    return dist, script


# ---------------------------------------------------------------------------
# Landau-Vishkin banded alignment


def common_prefix(a: bytes, i: int, b: bytes, j: int, limit: int | None = None) -> int:
    """Length of the longest common prefix of ``a[i:]`` and ``b[j:]`` (0-based)."""
    cap = min(len(a) - i, len(b) - j)
    if limit is not None:
        cap = min(cap, limit)
    if cap <= 0:
        return 0
    step = 64
    k = 0
    while k + step <= cap and a[i + k : i + k + step] == b[j + k : j + k + step]:
        k += step
        step = min(step * 2, 1 << 16)
    while step > 1:
        step //= 2
        if k + step <= cap and a[i + k : i + k + step] == b[j + k : j + k + step]:
            k += step
    while k < cap and a[i + k] == b[j + k]:
        k += 1
    return k


def banded_align(s, t, k_max: int) -> tuple[int, list[tuple[int, int]]] | None:
    """Optimal alignment when ``ed(s, t) <= k_max``, else ``None``.

    Furthest-reaching diagonals with O(k_max^2) stored frontier values; the
    work outside the slides is O(k_max^2).
    """
    s, t = as_bits(s), as_bits(t)
    a, b = s.bits, t.bits
    n, m = len(a), len(b)
    target = m - n
    if abs(target) > k_max:
        return None
    neg = -(1 << 60)
    # front[e][d] = furthest row i on diagonal d (j = i + d) with cost <= e
    front: list[dict[int, int]] = []
    start: list[dict[int, int]] = []
    for e in range(k_max + 1):
        cur: dict[int, int] = {}
        beg: dict[int, int] = {}
        for d in range(-min(e, n), min(e, m) + 1):
            if e == 0:
                i = 0
            else:
                prev = front[e - 1]
                i = max(
                    prev.get(d, neg) + 1,
                    prev.get(d - 1, neg),
                    prev.get(d + 1, neg) + 1,
                    max(0, -d),
                )
            i = min(i, n, m - d)
            if i < max(0, -d):
                continue
            beg[d] = i
            i += common_prefix(a, i, b, i + d)
            cur[d] = i
        front.append(cur)
        start.append(beg)
        if cur.get(target, neg) >= n:
            return e, _lv_traceback(front, start, target, e, n)
    return None


def _lv_traceback(front, start, d: int, e: int, n: int) -> list[tuple[int, int]]:
    neg = -(1 << 60)
    edges: list[tuple[int, int]] = []
    i = n
    while True:
        b = start[e][d]
        for r in range(i, b, -1):
            edges.append((r, r + d))
        if e == 0:
            break
        prev = front[e - 1]
        if prev.get(d, neg) >= b:
            i = b
        elif prev.get(d, neg) >= b - 1:
            i = b - 1
        elif prev.get(d - 1, neg) >= b:
            d, i = d - 1, b
        elif prev.get(d + 1, neg) >= b - 1:
            d, i = d + 1, b - 1
        else:
            break  # started on the DP border: the rest is pure indels
        e -= 1
    edges.reverse()
    return edges
