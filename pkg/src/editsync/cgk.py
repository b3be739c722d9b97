"""Randomized walk embedding of edit space into Hamming space.

A walk over ``s`` writes one output bit per step, always the current source
bit ``s[i]``, and advances ``i`` iff the shared random bit
``r[(2j - 1) + s[i]]`` is set. After ``3n`` steps the image is cut, padding
with zeros once the source is exhausted.

Indices in this module are 1-based to match the rest of the package.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import BitString, as_bits
from .hashing import Seed, prf_bits


@dataclass(frozen=True)
class Embedded:
    image: BitString
    preimage: np.ndarray  # preimage[j-1] = source index read at step j (n+1 once exhausted)
    truncated: bool
    n: int

    def __len__(self) -> int:
        return len(self.image)

    @property
    def steps(self) -> int:
        """Number of steps that actually read a source bit."""
        return int(np.searchsorted(self.preimage, self.n + 1))


@dataclass(frozen=True)
class WalkTrace:
    states: np.ndarray  # shape (3n, 2), columns (i0, i1)
    progress_steps: int

    @property
    def shifts(self) -> np.ndarray:
        return self.states[:, 0] - self.states[:, 1]


def walk_bits(seed: Seed, walk_id, n: int) -> np.ndarray:
    """The 6n shared random bits of one walk."""
    return prf_bits(seed, f"cgk/{walk_id}/{n}", 6 * n)


def _next_one(row: np.ndarray) -> np.ndarray:
    """nxt[j] = smallest j' >= j with row[j'] == 1, or len(row) if none (0-based)."""
    m = len(row)
    idx = np.where(row.astype(bool), np.arange(m), m)
    return np.minimum.accumulate(idx[::-1])[::-1]


def embed_preimage(src: np.ndarray, r: np.ndarray) -> tuple[np.ndarray, bool]:
    """Preimage map (1-based source index per step) for source bits ``src``."""
    n = len(src)
    steps = 3 * n
    rr = r[: 2 * steps].reshape(steps, 2)
    nxt = (_next_one(rr[:, 0]).tolist(), _next_one(rr[:, 1]).tolist())
    counts = np.zeros(n + 1, dtype=np.int64)
    pos = 0  # 0-based step at which the current character is first read
    sb = src.tolist()
    i = 0
    while i < n and pos < steps:
        x = nxt[sb[i]][pos]
        if x >= steps:
            counts[i] = steps - pos
            pos = steps
            break
        counts[i] = x - pos + 1
        pos = x + 1
        i += 1
    truncated = i < n
    if pos < steps:
        counts[n] = steps - pos
    pre = np.repeat(np.arange(1, n + 2, dtype=np.int64), counts)
    return pre, truncated


def _image_from(src: np.ndarray, pre: np.ndarray) -> BitString:
    padded = np.concatenate([src, np.zeros(1, dtype=np.uint8)])
    return BitString(padded[pre - 1])


def embed(s, seed: Seed, walk_id="0", n: int | None = None) -> Embedded:
    """Embed ``s``. ``n`` overrides the walk length for unequal-length pairs;
    the source is then zero-padded to ``n`` characters."""
    s = as_bits(s)
    n = len(s) if n is None else n
    if n < 1 or n < len(s):
        raise ValueError("walk length must cover the input")
    src = np.zeros(n, dtype=np.uint8)
    src[: len(s)] = s.array
    pre, truncated = embed_preimage(src, walk_bits(seed, walk_id, n))
    return Embedded(_image_from(src, pre), pre, truncated, n)


def paired_walk(s, t, seed: Seed, walk_id="0"):
    """Embed ``s`` and ``t`` under one walk; shorter input is zero-padded."""
    s, t = as_bits(s), as_bits(t)
    n = max(len(s), len(t), 1)
    es = embed(s, seed, walk_id, n)
    et = embed(t, seed, walk_id, n)
    states = np.stack([es.preimage, et.preimage], axis=1)
    live = (es.preimage <= n) & (et.preimage <= n)
    rr = walk_bits(seed, walk_id, n).reshape(3 * n, 2)
    steps = np.arange(3 * n)
    a, b = es.image.array, et.image.array
    moved = (rr[steps, a] | rr[steps, b]).astype(bool)
    diff = a != b
    progress = int(np.count_nonzero(live & diff & moved))
    return es, et, WalkTrace(states, progress)


def hamming(a: Embedded, b: Embedded) -> int:
    return int(np.count_nonzero(a.image.array != b.image.array))


def preimage_interval(e: Embedded, j_lo: int, j_hi: int) -> tuple[int, int]:
    if not 1 <= j_lo <= j_hi <= len(e.preimage):
        raise ValueError("image interval out of range")
    return int(min(e.preimage[j_lo - 1], e.n)), int(min(e.preimage[j_hi - 1], e.n))
