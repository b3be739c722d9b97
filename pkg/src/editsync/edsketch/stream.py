"""One-pass construction of an edit sketch.

Every walk copy advances as far as it can on each arriving bit. A leaf is
sealed as soon as its last image step is written, and a tree node as soon as
its right child is sealed, so each Hamming sketch receives its coordinates in
increasing order through the streaming ``add`` path.
"""
from __future__ import annotations

import numpy as np

from ..mismatch.hamsketch import HamSketch
from .params import SketchParams
from .structures import (ROLES, EditSketch, SketchCopy, leaf_hash_int, leaf_words_int, node_salts, p_params,
                         p_value_int, parent_hash_int, q_params, q_values_int, walk_id)


class _Tape:
    """The walk's random bits, generated 4096 at a time and forgotten once passed."""

    BLOCK = 64

    def __init__(self, seed, label: str):
        self._gen = np.random.Philox(key=seed.derive_int("prf/" + label, 128))
        self._base = 0
        self._bits = np.zeros(0, dtype=np.uint8)

    def __getitem__(self, k: int) -> int:
        while k >= self._base + len(self._bits):
            self._base += len(self._bits)
            words = self._gen.random_raw(self.BLOCK).astype("<u8")
            self._bits = np.unpackbits(words.view(np.uint8), bitorder="little")
        return int(self._bits[k - self._base])


class _Walk:
    def __init__(self, params: SketchParams, i: int, salts):
        self.p, self.i, self.salts = params, i, salts
        W = params.n
        self.steps = 3 * W
        self.tape = _Tape(params.seed, f"cgk/{walk_id(i)}/{W}")
        self.j = 0
        self.leaf: list[int] = []
        self.first = self.last_pre = 0
        self.sealed = 0
        self.R = W
        self.Q = [HamSketch(q_params(params, i, l)) for l in range(params.q_limbs)]
        self.P = [HamSketch(p_params(params, i, l)) for l in range(params.levels)]
        self.pending: list[tuple | None] = [None] * (params.levels + 1)  # (hash, first pre) of a left child

    def _step(self, bit: int, pre: int):
        if not self.leaf:
            self.first = pre
        self.leaf.append(bit)
        self.last_pre = pre
        self.j += 1
        if len(self.leaf) == self.p.B:
            self._seal()

    def feed(self, idx: int, bit: int):
        while self.j < self.steps:
            j = self.j
            if j == self.steps - 1:
                self.R = idx
            self._step(bit, idx)
            if self.tape[2 * j + bit]:
                return

    def _eta(self, first: int, last: int) -> int:
        W = self.p.n
        return min(last, W) - first + 1 if first <= W else 0

    def _seal(self):
        p = self.p
        z = self.sealed
        words = leaf_words_int(self.leaf, p)
        eta = self._eta(self.first, self.last_pre)
        h = leaf_hash_int(words, eta, self.salts[0])
        for l, val in enumerate(q_values_int(words, h, p)):
            self.Q[l].add(z + 1, val)
        self.leaf = []
        self.sealed += 1
        self._node(0, z, h, eta, self.first)

    def _node(self, level: int, j: int, h: int, eta: int, first: int):
        if level >= self.p.levels:
            return
        self.P[level].add(j + 1, p_value_int(h, eta, self.p))
        if j % 2 == 0:
            self.pending[level] = (h, first)
            return
        left, left_first = self.pending[level]
        self.pending[level] = None
        up = level + 1
        if up >= self.p.levels:
            return
        pe = self._eta(left_first, self.last_pre)
        self._node(up, j // 2, parent_hash_int(left, h, pe, self.salts[up]), pe, left_first)

    def finish(self) -> SketchCopy:
        W = self.p.n
        if self.j < self.steps:
            self.R = W
        while self.sealed < self.p.leaves:
            self._step(0, W + 1)
        return SketchCopy(min(self.R, W), self.P, self.Q)


class SketchStream:
    """Feed bits with ``push``; ``finish`` returns the sealed sketch."""

    def __init__(self, params: SketchParams, role: str = "s"):
        if role not in ROLES:
            raise ValueError("role must be 's' or 't'")
        self.params, self.role = params, role
        salts = node_salts(params)
        self.walks = [_Walk(params, i, salts) for i in range(params.rho)]
        self.count = 0

    def push(self, bit: int):
        if self.count >= self.params.n:
            raise ValueError(f"input exceeds sketch length {self.params.n}")
        self.count += 1
        for w in self.walks:
            w.feed(self.count, int(bit))

    def extend(self, bits):
        for b in bits:
            self.push(b)

    def finish(self) -> EditSketch:
        length = self.count
        while self.count < self.params.n:
            self.push(0)
        return EditSketch(self.params, self.role, length, [w.finish() for w in self.walks])


def sketch_stream(bits, params: SketchParams, role: str = "s") -> EditSketch:
    st = SketchStream(params, role)
    st.extend(bits)
    return st.finish()
