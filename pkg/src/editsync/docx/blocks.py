"""Blocks of the second phase: cut the walk image into fixed-size pieces and
map each piece back to the source characters it copied."""
from __future__ import annotations

from typing import NamedTuple

import numpy as np

from ..cgk import embed
from ..hashing import KRHasher, PrefixHashes, Seed


class Phase2Block(NamedTuple):
    sig: int
    length: int  # r_j, number of source characters
    shared: int  # E_j, first character shared with the previous block
    lo: int  # 1-based source interval [lo, lo + length - 1] in the padded source
    image_lo: int
    image_hi: int

    def key(self, sig_bits: int, len_bits: int) -> int:
        """(h, r, E) packed into one integer."""
        return (((self.sig << len_bits) | self.length) << 1) | self.shared


def image_bounds(total: int, bprime: int, delta: int) -> list[tuple[int, int]]:
    edges = [0] + list(range(min(delta, total), total, bprime))
    if edges[-1] != total:
        edges.append(total)
    return [(a + 1, b) for a, b in zip(edges[:-1], edges[1:])]


def phase2_blocks(x, seed: Seed, walk_id, bprime: int, delta: int, walk_len: int | None = None,
                  hasher: KRHasher | None = None) -> tuple[list[Phase2Block], bool]:
    """Blocks of ``x`` (zero-padded to ``walk_len``) and the walk's truncation flag."""
    x = np.asarray(getattr(x, "array", x), dtype=np.uint8)
    N = max(len(x), 1) if walk_len is None else walk_len
    src = np.zeros(N, dtype=np.uint8)
    src[: len(x)] = x
    emb = embed(src, seed, walk_id, N)
    hasher = hasher or KRHasher(seed, f"docx/h/{walk_id}", 40)
    pre = PrefixHashes(hasher, src.tobytes())
    out = []
    prev_hi = 0
    for jlo, jhi in image_bounds(3 * N, bprime, delta):
        lo = int(emb.preimage[jlo - 1])
        hi = min(int(emb.preimage[jhi - 1]), N)
        if lo > N:
            out.append(Phase2Block(0, 0, 0, N + 1, jlo, jhi))
            continue
        shared = int(lo == prev_hi)
        out.append(Phase2Block(pre.sig(lo, hi), hi - lo + 1, shared, lo, jlo, jhi))
        prev_hi = hi
    return out, emb.truncated


def source_intervals(lengths, shared) -> list[tuple[int, int]]:
    """Rebuild 1-based source intervals from (r_j, E_j) alone."""
    out = []
    end = 0
    for r, e in zip(lengths, shared):
        if r == 0:
            out.append((end + 1, end))
            continue
        start = end + 1 - int(e)
        end = start + int(r) - 1
        out.append((start, end))
    return out
