"""Combine the per-walk alignments into an optimal one."""
from __future__ import annotations

from typing import NamedTuple

import numpy as np

from ..core import BitString, EditScript, alignment_to_script, banded_align
from ..errors import DecodeError
from .extract import EffectiveAlignment, decode_differences, extract_alignment
from .structures import EditSketch


def intersect_alignments(alignments: list[EffectiveAlignment]) -> list[tuple[int, int, int]]:
    """Edges shared by every alignment, as runs ``(u, v, length)``.

    One sweep over ``u``: each alignment contributes at most one active
    cluster at any position, so an edge is common exactly when one shift
    ``u - v`` is held by all of them at once.
    """
    if not alignments:
        raise ValueError("need at least one alignment")
    need = len(alignments)
    events: dict[int, list[tuple[int, int]]] = {}
    for al in alignments:
        for u, v, eta in al.clusters:
            events.setdefault(u, []).append((u - v, 1))
            events.setdefault(u + eta, []).append((u - v, -1))
    active: dict[int, int] = {}
    out: list[list[int]] = []
    xs = sorted(events)
    for x, nxt in zip(xs, xs[1:] + [None]):
        for shift, d in events[x]:
            active[shift] = active.get(shift, 0) + d
            if not active[shift]:
                del active[shift]
        if nxt is None:
            break
        full = [sh for sh, c in active.items() if c == need]
        if full:
            sh = full[0]
            if out and out[-1][0] + out[-1][2] == x and out[-1][0] - out[-1][1] == sh:
                out[-1][2] += nxt - x
            else:
                out.append([x, x - sh, nxt - x])
    return [tuple(r) for r in out]


class Gap(NamedTuple):
    s_lo: int
    s_hi: int
    t_lo: int
    t_hi: int
    s_frag: BitString
    t_frag: BitString


def _known_chars(alignments, n: int, s_len: int, t_len: int):
    sv = np.full(n + 1, -1, dtype=np.int8)
    tv = np.full(n + 1, -1, dtype=np.int8)
    sv[s_len + 1:] = 0  # zero padding up to the walk length
    tv[t_len + 1:] = 0
    for al in alignments:
        for side, idx, bit in al.singletons:
            (sv if side == "s" else tv)[idx] = bit
        for u, v, bit in al.matched:
            sv[u] = tv[v] = bit
    # a character seen on one end of an edge is known on the other end too
    pairs = []
    for al in alignments:
        if al.clusters:
            c = np.array(al.clusters, dtype=np.int64)
            rep = np.repeat(np.arange(len(c)), c[:, 2])
            off = np.arange(len(rep)) - np.repeat(np.cumsum(c[:, 2]) - c[:, 2], c[:, 2])
            pairs.append((c[rep, 0] + off, c[rep, 1] + off))
    changed = True
    while changed:
        changed = False
        for u, v in pairs:
            a, b = sv[u], tv[v]
            if np.any((a >= 0) & (b >= 0) & (a != b)):
                raise DecodeError("alignments disagree on a character")
            fa, fb = (a < 0) & (b >= 0), (b < 0) & (a >= 0)
            if fa.any():
                sv[u[fa]] = b[fa]
                changed = True
            if fb.any():
                tv[v[fb]] = a[fb]
                changed = True
    return sv, tv


def reconstruct_gaps(alignments, anchors, n: int, s_len: int, t_len: int) -> list[Gap]:
    """Both sides of every stretch between anchor runs, all characters recovered."""
    sv, tv = _known_chars(alignments, n, s_len, t_len)
    gaps = []
    ps = pt = 0
    for u, v, eta in list(_clip(anchors, s_len, t_len)) + [(s_len + 1, t_len + 1, 0)]:
        if u - ps > 1 or v - pt > 1:
            a, b = sv[ps + 1: u], tv[pt + 1: v]
            if np.any(a < 0) or np.any(b < 0):
                raise DecodeError(f"characters between {(ps, pt)} and {(u, v)} could not be recovered")
            gaps.append(Gap(ps + 1, u - 1, pt + 1, v - 1, BitString(a.astype(np.uint8)),
                            BitString(b.astype(np.uint8))))
        ps, pt = u + eta - 1, v + eta - 1
    return gaps


def _clip(anchors, s_len: int, t_len: int):
    for u, v, eta in anchors:
        eta = min(eta, s_len - u + 1, t_len - v + 1)
        if eta > 0:
            yield u, v, eta


class SketchResult(NamedTuple):
    distance: int
    script: EditScript
    edges: list[tuple[int, int]]
    walks_used: int


def sketch_decode(sk_s: EditSketch, sk_t: EditSketch) -> SketchResult:
    p = sk_s.params
    if sk_t.params != p:
        raise DecodeError("sketches were built with different parameters")
    good = []
    decoded = decode_differences(sk_s, sk_t, range(p.rho))
    for i in range(p.rho):
        try:
            good.append(extract_alignment(sk_s, sk_t, i, decoded[i]))
        except DecodeError:
            continue
    if not good:
        raise DecodeError("no walk copy could be decoded")
    s_len, t_len = sk_s.length, sk_t.length
    anchors = list(_clip(intersect_alignments(good), s_len, t_len))
    gaps = reconstruct_gaps(good, anchors, p.n, s_len, t_len)
    budget = p.K
    edges: list[tuple[int, int]] = []
    pieces = iter(gaps)
    gap = next(pieces, None)
    for u, v, eta in anchors + [(s_len + 1, t_len + 1, 0)]:
        if gap is not None and gap.s_hi < u and gap.t_hi < v:
            got = banded_align(gap.s_frag, gap.t_frag, budget)
            if got is None:
                raise DecodeError(f"edit distance exceeds {p.K}")
            budget -= got[0]
            edges.extend((gap.s_lo + a - 1, gap.t_lo + b - 1) for a, b in got[1])
            gap = next(pieces, None)
        edges.extend((u + r, v + r) for r in range(eta))
    # characters inside anchor runs are not known; any consistent filler works
    s_hat = np.zeros(s_len, dtype=np.uint8)
    t_hat = np.zeros(t_len, dtype=np.uint8)
    for g in gaps:
        s_hat[g.s_lo - 1: g.s_hi] = g.s_frag.array
        t_hat[g.t_lo - 1: g.t_hi] = g.t_frag.array
    script = alignment_to_script(BitString(s_hat), BitString(t_hat), edges)
    return SketchResult(len(script), script, edges, len(good))
