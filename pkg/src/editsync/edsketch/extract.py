"""Recover one walk's alignment from a pair of sketches.

The leaves whose images differ are found from Q, and their source intervals
from the P levels by walking down from the root ``[1..R]``: a left child
starts where its parent starts, a right child ends where its parent ends.
Inside a flagged leaf the walk is replayed from the two image blocks and the
shared random bits. Between flagged leaves both images agree, so both walks
read equal characters with equal increments: each such gap is one diagonal
run of edges, possibly cut short when one side runs out of source.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..cgk import walk_bits
from ..errors import DecodeError
from ..mismatch.hamsketch import ham_decode_many
from .params import SketchParams
from .structures import EditSketch, split_q, walk_id


@dataclass
class EffectiveAlignment:
    clusters: list[tuple[int, int, int]]  # (u, v, run length)
    singletons: list[tuple[str, int, int]]  # (side, index, bit)
    matched: list[tuple[int, int, int]] = field(default_factory=list)  # edges whose bit was seen

    def edges(self):
        for u, v, eta in self.clusters:
            for r in range(eta):
                yield u + r, v + r

    def edge_count(self) -> int:
        return sum(c[2] for c in self.clusters)

    def check(self):
        """Structural invariants: runs are ordered and non-crossing, singletons avoid edges."""
        pu = pv = 0
        for u, v, eta in self.clusters:
            if eta < 1 or u <= pu or v <= pv:
                raise DecodeError(f"cluster {(u, v, eta)} crosses its predecessor")
            pu, pv = u + eta - 1, v + eta - 1
        us = {u for u, _ in self.edges()}
        vs = {v for _, v in self.edges()}
        for side, idx, bit in self.singletons:
            if (idx in us if side == "s" else idx in vs) or bit not in (0, 1):
                raise DecodeError(f"bad singleton {(side, idx, bit)}")


def _add_run(runs: list[list[int]], u: int, v: int, eta: int):
    """Append edges ``(u + r, v + r)``, skipping any overlap with the last run."""
    if runs:
        lu, lv, le = runs[-1]
        if u - lu == v - lv and lu <= u < lu + le:
            skip = lu + le - u
            u, v, eta = u + skip, v + skip, eta - skip
        if eta <= 0:
            return
        if lu + le == u and lv + le == v:
            runs[-1][2] += eta
            return
    if eta > 0:
        runs.append([u, v, eta])


def _covered(runs: list[list[int]], col: int, idx: list[int]) -> np.ndarray:
    if not runs or not idx:
        return np.zeros(len(idx), dtype=bool)
    r = np.array(runs, dtype=np.int64)
    starts, lens = r[:, col], r[:, 2]
    q = np.array(idx, dtype=np.int64)
    k = np.searchsorted(starts, q, side="right") - 1
    return (k >= 0) & (q < starts[np.maximum(k, 0)] + lens[np.maximum(k, 0)])


def decode_differences(sk_s: EditSketch, sk_t: EditSketch, walks) -> dict:
    """Peel the Q and P sketches of several walks in one batch."""
    pairs, owners = [], []
    for i in walks:
        cs, ct = sk_s.copies[i], sk_t.copies[i]
        pairs += list(zip(cs.Q, ct.Q)) + list(zip(cs.P, ct.P))
        owners.append((i, len(cs.Q) + len(cs.P)))
    got = ham_decode_many(pairs)
    out, at = {}, 0
    for i, c in owners:
        out[i] = got[at:at + c]
        at += c
    return out


def _checked(d):
    if isinstance(d, DecodeError):
        raise d
    return d


def _flagged(sk_s: EditSketch, sk_t: EditSketch, i: int, decoded=None):
    p = sk_s.params
    if decoded is None:
        decoded = decode_differences(sk_s, sk_t, [i])[i]
    nq = len(sk_s.copies[i].Q)
    limbs = [{z: (a, b) for z, a, b in _checked(d)} for d in decoded[:nq]]
    leaves = sorted(set().union(*limbs))
    images = {}
    for z in leaves:
        pair = []
        for side in (0, 1):
            tags, word = set(), 0
            for l, d in enumerate(limbs):
                if z not in d:
                    raise DecodeError(f"leaf {z} differs in some limbs only")
                tag, chunk = split_q(d[z][side], p)
                tags.add(tag)
                word |= chunk << (l * p.chunk_bits)
            if len(tags) != 1:
                raise DecodeError(f"leaf {z} has inconsistent tags")
            pair.append([(word >> k) & 1 for k in range(p.B)])
        images[z] = pair
    mask = (1 << p.len_bits) - 1
    etas = []
    for level in range(p.levels):
        d = _checked(decoded[nq + level])
        etas.append({j: (a & mask, b & mask) for j, a, b in d})
    if p.levels and set(etas[0]) != set(leaves):
        raise DecodeError("P and Q disagree on which leaves differ")
    return leaves, images, etas


def _interval(z: int, etas, side: int, R: int, p: SketchParams) -> tuple[int, int, int]:
    """(x, y, eta) of leaf ``z`` on one side; eta = 0 for a leaf past the source."""
    x, y = 1, R
    eta = R
    for level in range(p.levels - 1, -1, -1):
        j = ((z - 1) >> level) + 1
        if j not in etas[level]:
            raise DecodeError(f"ancestor {j} at level {level} of leaf {z} not flagged")
        eta = etas[level][j][side]
        if eta == 0:
            return p.n + 1, p.n, 0
        if j % 2 == 1:
            x, y = x, x + eta - 1
        else:
            x, y = y - eta + 1, y
    return x, y, eta


def _replay(bits: np.ndarray, starts: np.ndarray, iv: np.ndarray, rr: np.ndarray, W: int):
    """Replay every flagged block of one side at once.

    ``bits`` is (blocks, B), ``iv`` holds (x, y, eta) rows. Returns the states
    read at each step and the state after each block.
    """
    steps = starts[:, None] + np.arange(bits.shape[1])
    live = steps < len(rr)
    inc = np.where(live, rr[np.minimum(steps, len(rr) - 1), bits], 0).astype(np.int64)
    x, y, eta = iv[:, 0], iv[:, 1], iv[:, 2]
    cur = np.where(eta > 0, x, W + 1)
    walked = cur[:, None] + np.concatenate((np.zeros((len(bits), 1), dtype=np.int64), np.cumsum(inc, axis=1)), axis=1)
    states = np.where(live, np.minimum(walked[:, :-1], W + 1), W + 1)
    if np.any(bits[states > W]):
        raise DecodeError("set bit past the end of the source")
    count = (states <= W).sum(axis=1)
    last = states[np.arange(len(states)), np.maximum(count - 1, 0)]
    real = eta > 0
    if np.any(real & ((count == 0) | (states[:, 0] != x) | (last != y))):
        raise DecodeError("replayed block disagrees with its recovered interval")
    if np.any(~real & (count > 0)):
        raise DecodeError("block with empty preimage read source bits")
    after = np.where(live[:, -1], np.minimum(walked[:, -1], W + 1), W + 1)
    return states, after


def extract_alignment(sk_s: EditSketch, sk_t: EditSketch, i: int, decoded=None) -> EffectiveAlignment:
    p = sk_s.params
    if sk_t.params != p:
        raise DecodeError("sketches were built with different parameters")
    W, B = p.n, p.B
    R = (sk_s.copies[i].R, sk_t.copies[i].R)
    if min(R) < W:
        raise DecodeError("walk was truncated before reading the whole source")
    leaves, images, etas = _flagged(sk_s, sk_t, i, decoded)
    rr = walk_bits(p.seed, walk_id(i), W).reshape(3 * W, 2)

    runs: list[list[int]] = []
    seen = ({}, {})  # index -> bit, per side
    extra: list[tuple[str, int, int]] = []

    def gap(a, e):
        ls, lt = e[0] - a[0], e[1] - a[1]
        if ls < 0 or lt < 0:
            raise DecodeError("walk moved backwards across a gap")
        run = min(ls, lt)
        if ls != lt:
            short = 0 if ls < lt else 1
            if e[short] != W + 1:
                raise DecodeError("gap lengths differ without an exhausted side")
            long_ = 1 - short
            for idx in range(a[long_] + run, e[long_]):
                extra.append(("st"[long_], idx, 0))
        _add_run(runs, a[0], a[1], run)

    L = len(leaves)
    zs = np.asarray(leaves, dtype=np.int64)
    starts = (zs - 1) * B
    st, af, bb = [], [], []
    for side in (0, 1):
        iv = np.array([_interval(z, etas, side, R[side], p) for z in leaves], dtype=np.int64).reshape(L, 3)
        bits = np.array([images[z][side] for z in leaves], dtype=np.int64).reshape(L, B)
        states, aft = _replay(bits, starts, iv, rr, W)
        st.append(states)
        af.append(aft.tolist())
        bb.append(bits)

    us, vs = st[0].ravel(), st[1].ravel()
    bs, bt = bb[0].ravel(), bb[1].ravel()
    for side, idx, bits in ((0, us, bs), (1, vs, bt)):
        ok = idx <= W
        seen[side].update(zip(idx[ok].tolist(), bits[ok].tolist()))
    hit = np.flatnonzero((us <= W) & (vs <= W) & (bs == bt))
    eu, ev = us[hit], vs[hit]
    keep = np.ones(len(hit), dtype=bool)
    keep[1:] = (eu[1:] != eu[:-1]) | (ev[1:] != ev[:-1])
    hit, eu, ev = hit[keep], eu[keep], ev[keep]
    matched = list(zip(eu.tolist(), ev.tolist(), bs[hit].tolist()))
    cut = np.flatnonzero((np.diff(eu) != 1) | (np.diff(ev) != 1)) + 1
    seg = np.concatenate((np.zeros(1, dtype=np.int64), cut)) if len(hit) else np.zeros(0, dtype=np.int64)
    seg_len = np.diff(np.append(seg, len(hit))).tolist()
    seg_block = (hit[seg] // B).tolist() if len(hit) else []
    seg_u, seg_v = eu[seg].tolist() if len(hit) else [], ev[seg].tolist() if len(hit) else []

    first_s, first_t = st[0][:, 0].tolist(), st[1][:, 0].tolist()
    after = (1, 1)
    prev = 0
    k = 0
    for j, z in enumerate(leaves):
        first = (first_s[j], first_t[j])
        if z == prev + 1:
            if first != after:
                raise DecodeError("adjacent blocks do not join up")
        else:
            gap(after, first)
        while k < len(seg_block) and seg_block[k] == j:
            _add_run(runs, seg_u[k], seg_v[k], seg_len[k])
            k += 1
        after = (af[0][j], af[1][j])
        prev = z
    if prev < p.leaves:
        gap(after, (R[0] + 1, R[1] + 1))
    elif after != (R[0] + 1, R[1] + 1) and after != (W + 1, W + 1):
        raise DecodeError("walk does not end where the sketches say")

    singles = []
    for side in (0, 1):
        items = sorted(seen[side].items())
        hit = _covered(runs, side, [idx for idx, _ in items])
        singles += [("st"[side], idx, bit) for (idx, bit), h in zip(items, hit) if not h]
    return EffectiveAlignment([tuple(r) for r in runs], singles + extra, matched)
