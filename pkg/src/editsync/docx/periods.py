"""Short-period detection and removal for the first phase of each level.

A block ``x[a..e]`` is periodic with period ``w`` when ``x[i] == x[i - w]``
for every ``i`` in the block, which looks ``w`` characters back before the
block. Runs of consecutive blocks sharing one period are thinned: all but the
first and last block of the run may be removed, in a whole number of periods,
and the journal entry ``(pos, length, w)`` is enough to put them back.
"""
from __future__ import annotations

from typing import NamedTuple

import numpy as np


class Partition(NamedTuple):
    starts: np.ndarray  # 1-based
    lens: np.ndarray

    def __len__(self) -> int:
        return len(self.starts)


class Removal(NamedTuple):
    pos: int  # 1-based start in the string before removal
    length: int
    w: int


def block_partition(n: int, b: int, delta: int) -> Partition:
    """First block ``delta`` long, then blocks of ``b``; the last may be shorter."""
    if n <= 0:
        return Partition(np.zeros(0, dtype=np.int64), np.zeros(0, dtype=np.int64))
    bounds = [0] + list(range(min(delta, n), n, b))
    if bounds[-1] != n:
        bounds.append(n)
    bounds = np.array(bounds, dtype=np.int64)
    return Partition(bounds[:-1] + 1, np.diff(bounds))


def z_array(seq) -> list[int]:
    n = len(seq)
    z = [0] * n
    if n:
        z[0] = n
    l = r = 0
    for i in range(1, n):
        if i < r:
            z[i] = min(r - i, z[i - l])
        while i + z[i] < n and seq[z[i]] == seq[i + z[i]]:
            z[i] += 1
        if i + z[i] > r:
            l, r = i, i + z[i]
    return z


def block_period(x: np.ndarray, a: int, e: int, theta: int) -> int:
    """Smallest ``w <= theta`` with ``x[i] == x[i-w]`` on ``[a..e]`` (1-based), else 0."""
    blen = e - a + 1
    reach = min(theta, a - 1)
    if blen <= 0 or reach <= 0:
        return 0
    # reversed window: r[k] = x[e - k]; the condition reads r[k] == r[k + w] for k < blen
    window = x[a - 1 - reach: e][::-1].tobytes()
    z = z_array(window)
    for w in range(1, reach + 1):
        if z[w] >= blen:
            return w
    return 0


def detect_periods(x, b: int, theta: int, delta: int, only=None) -> tuple[Partition, np.ndarray]:
    """Period length per block (0 when none); ``only`` restricts which blocks are examined."""
    x = np.asarray(getattr(x, "array", x), dtype=np.uint8)
    part = block_partition(len(x), b, delta)
    w = np.zeros(len(part), dtype=np.int64)
    todo = range(len(part)) if only is None else only
    for j in todo:
        a = int(part.starts[j])
        w[j] = block_period(x, a, a + int(part.lens[j]) - 1, theta)
    return part, w


def plan_removals(part: Partition, w: np.ndarray) -> list[Removal]:
    """Removals implied by the period vector, left to right, in original coordinates."""
    out = []
    j, m = 0, len(part)
    while j < m:
        if w[j] == 0:
            j += 1
            continue
        k = j
        while k + 1 < m and w[k + 1] == w[j]:
            k += 1
        if k - j + 1 >= 3:
            per = int(w[j])
            middle = int(part.lens[j + 1: k].sum())
            length = (middle // per) * per
            if length:
                out.append(Removal(int(part.starts[j + 1]), length, per))
        j = k + 1
    return out


def apply_removals(arr: np.ndarray, removals: list[Removal]) -> np.ndarray:
    """Delete the journaled ranges (clipped to the array) from ``arr``."""
    if not removals:
        return arr
    keep = np.ones(len(arr), dtype=bool)
    for r in removals:
        keep[r.pos - 1: r.pos - 1 + r.length] = False
    return arr[keep]


def remove_periods(x, part: Partition, w: np.ndarray):
    """(reduced string, journal) for one level."""
    x = np.asarray(getattr(x, "array", x), dtype=np.uint8)
    journal = plan_removals(part, w)
    return apply_removals(x, journal), journal


def reinsert(reduced: np.ndarray, journal: list[Removal]) -> np.ndarray:
    """Undo ``apply_removals`` by copying each removed stretch from one period back."""
    out = list(np.asarray(reduced).tolist())
    # positions in the journal refer to the pre-removal string; later removals
    # sit to the right, so rebuild left to right
    for r in journal:
        p = r.pos - 1
        fill = []
        for k in range(r.length):
            src = p + k - r.w
            fill.append(out[src] if src < p else fill[src - p])
        out[p:p] = fill
    return np.array(out, dtype=np.asarray(reduced).dtype)
