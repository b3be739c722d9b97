import numpy as np
import pytest

from editsync.cgk import embed
from editsync.core import BitString, apply_script, ed_oracle
from editsync.edsketch import (
    EditSketch, EffectiveAlignment, SketchParams, extract_alignment, intersect_alignments, reconstruct_gaps,
    sketch_decode, sketch_encode, sketch_stream,
)
from editsync.edsketch.structures import walk_id
from editsync.errors import DecodeError, FormatError
from editsync.harness import CorpusSpec, ed_instance, gen_pair, plant_edits
from editsync.hashing import Seed

SEED = Seed.from_int(41)


def pair(n, k, rng):
    s = BitString(rng.integers(0, 2, n - k, dtype=np.uint8))
    return s, plant_edits(s, k, rng)


def test_params_shape():
    p = SketchParams(1 << 12, 4, SEED)
    assert p.leaves & (p.leaves - 1) == 0
    assert p.leaves * p.B >= 3 * p.n
    assert 1 << p.levels == p.leaves
    assert p.capacity(0) == min(p.N, p.leaves)
    with pytest.raises(ValueError):
        SketchParams(1, 1, SEED)


def test_encode_deterministic_and_wire():
    rng = np.random.default_rng(0)
    s, _ = pair(300, 0, rng)
    p = SketchParams(300, 3, SEED, rho_override=6)
    a = sketch_encode(s, p)
    assert sketch_encode(s, p).to_bytes() == a.to_bytes()
    back = EditSketch.from_bytes(a.to_bytes())
    assert back == a and back.to_bytes() == a.to_bytes()
    with pytest.raises(FormatError):
        EditSketch.from_bytes(b"XXXX" + a.to_bytes()[4:])


def test_size_accounting():
    s, _ = pair(1 << 12, 0, np.random.default_rng(1))
    sk = sketch_encode(s, SketchParams(1 << 12, 4, SEED, rho_override=8))
    parts = sum(h.size_bits() for c in sk.copies for h in list(c.P) + list(c.Q))
    assert len(sk.copies) == 8
    assert parts <= sk.size_bits() <= 2 * parts


@pytest.mark.parametrize("n", [2, 37, 300, 1024])
def test_stream_equals_batch(n):
    rng = np.random.default_rng(n)
    s = BitString(rng.integers(0, 2, max(1, n - 3), dtype=np.uint8))
    p = SketchParams(n, 2, SEED, rho_override=5)
    assert sketch_stream(s, p, "t").to_bytes() == sketch_encode(s, p, "t").to_bytes()


def test_extract_identical():
    s = BitString(np.random.default_rng(2).integers(0, 2, 256, dtype=np.uint8))
    p = SketchParams(256, 2, SEED, rho_override=3)
    a = sketch_encode(s, p)
    al = extract_alignment(a, sketch_encode(s, p, "t"), 0)
    assert al.clusters == [(1, 1, 256)] and al.singletons == []


def test_extract_one_substitution():
    rng = np.random.default_rng(3)
    s = rng.integers(0, 2, 256, dtype=np.uint8)
    t = s.copy()
    t[100] ^= 1
    p = SketchParams(256, 2, Seed.from_int(3))
    a, b = sketch_encode(BitString(s), p), sketch_encode(BitString(t), p, "t")
    counts = []
    for i in range(p.rho):
        try:
            al = extract_alignment(a, b, i)
        except DecodeError:
            continue
        al.check()
        for u, v in al.edges():
            assert s[u - 1] == t[v - 1]
        counts.append(len(al.clusters))
    # a walk that steps over the flip in lockstep splits the diagonal once
    assert min(counts) == 2


def test_extracted_edges_are_walk_states():
    rng = np.random.default_rng(4)
    n, checked = 128, 0
    for trial in range(25):
        s, t = pair(n, int(rng.integers(0, 3)), rng)
        p = SketchParams(n, 2, Seed.from_int(trial), rho_override=8)
        a, b = sketch_encode(s, p), sketch_encode(t, p, "t")
        s0, t0 = np.zeros(n, np.uint8), np.zeros(n, np.uint8)
        s0[:len(s)], t0[:len(t)] = s.array, t.array
        for i in range(p.rho):
            try:
                al = extract_alignment(a, b, i)
            except DecodeError:
                continue
            states = set(zip(embed(s0, p.seed, walk_id(i), n).preimage.tolist(),
                             embed(t0, p.seed, walk_id(i), n).preimage.tolist()))
            for u, v in al.edges():
                assert (u, v) in states and s0[u - 1] == t0[v - 1]
            for side, idx, bit in al.singletons:
                assert (s0 if side == "s" else t0)[idx - 1] == bit
            checked += 1
    assert checked >= 150


def test_intersect_examples():
    al = EffectiveAlignment([(1, 1, 5), (7, 8, 3)], [])
    assert intersect_alignments([al, al, al]) == [(1, 1, 5), (7, 8, 3)]
    other = EffectiveAlignment([(6, 6, 1), (10, 12, 2)], [])
    assert intersect_alignments([al, other]) == []
    shifted = EffectiveAlignment([(3, 3, 4), (8, 9, 5)], [])
    got = intersect_alignments([al, shifted])
    assert got == [(3, 3, 3), (8, 9, 2)]


def test_intersect_is_subset_of_each():
    rng = np.random.default_rng(5)
    for _ in range(50):
        als = []
        for _ in range(int(rng.integers(1, 5))):
            u = v = 1
            runs = []
            while u < 200:
                eta = int(rng.integers(1, 30))
                runs.append((u, v, eta))
                u += eta + int(rng.integers(1, 4))
                v += eta + int(rng.integers(1, 4))
            als.append(EffectiveAlignment(runs, []))
        common = EffectiveAlignment(intersect_alignments(als), [])
        edges = set(common.edges())
        want = set.intersection(*(set(a.edges()) for a in als))
        assert edges == want


def test_gaps_none_when_anchored():
    al = EffectiveAlignment([(1, 1, 6)], [])
    assert reconstruct_gaps([al], [(1, 1, 6)], 6, 6, 6) == []


def test_gaps_three_cases():
    # s = 0110, t = 0100, anchors cover the first two characters
    a = EffectiveAlignment([(1, 1, 2), (4, 4, 1)], [("s", 3, 1)], matched=[(4, 4, 0)])
    b = EffectiveAlignment([(1, 1, 2), (4, 3, 1)], [("s", 3, 1), ("t", 4, 0)])
    anchors = intersect_alignments([a, b])
    assert anchors == [(1, 1, 2)]
    (gap,) = reconstruct_gaps([a, b], anchors, 4, 4, 4)
    # s[3] from a singleton, s[4]/t[4] from a matched edge, t[3] from its partner s[4]
    assert (gap.s_lo, gap.s_hi, gap.t_lo, gap.t_hi) == (3, 4, 3, 4)
    assert str(gap.s_frag) == "10" and str(gap.t_frag) == "00"
    bare = EffectiveAlignment([(1, 1, 2), (4, 3, 1)], [("t", 4, 0)])
    with pytest.raises(DecodeError):
        reconstruct_gaps([bare], [(1, 1, 2)], 4, 4, 4)


def test_gap_fragments_are_true_substrings():
    rng = np.random.default_rng(6)
    seen = 0
    for trial in range(15):
        s, t = pair(256, int(rng.integers(1, 3)), rng)
        p = SketchParams(256, 2, Seed.from_int(100 + trial))
        a, b = sketch_encode(s, p), sketch_encode(t, p, "t")
        als = []
        for i in range(p.rho):
            try:
                als.append(extract_alignment(a, b, i))
            except DecodeError:
                pass
        anchors = intersect_alignments(als)
        for g in reconstruct_gaps(als, anchors, p.n, len(s), len(t)):
            assert g.s_frag == BitString(s.bits[g.s_lo - 1:g.s_hi])
            assert g.t_frag == BitString(t.bits[g.t_lo - 1:g.t_hi])
            seen += 1
    assert seen > 0


def test_decode_identical():
    s = BitString(np.random.default_rng(7).integers(0, 2, 200, dtype=np.uint8))
    p = SketchParams(256, 2, SEED)
    res = sketch_decode(sketch_encode(s, p), sketch_encode(s, p, "t"))
    assert res.distance == 0 and len(res.script) == 0


def test_decode_planted():
    spec = CorpusSpec(508, 3, master_seed=8)
    ok = 0
    for trial in range(8):
        s, t, d = gen_pair(spec, trial)
        p = SketchParams(512, 3, Seed.from_int(trial))
        try:
            res = sketch_decode(sketch_encode(s, p), sketch_encode(t, p, "t"))
        except DecodeError:
            continue
        assert res.distance >= d
        ok += res.distance == d and apply_script(s, res.script) == t
    assert ok >= 7


def test_decode_over_budget():
    for trial in range(4):
        s, t = ed_instance(512, 12, Seed.from_int(trial))
        p = SketchParams(512, 3, Seed.from_int(trial))
        with pytest.raises(DecodeError):
            sketch_decode(sketch_encode(s, p), sketch_encode(t, p, "t"))


def test_decode_rejects_mismatched_params():
    s = BitString("0110" * 16)
    a = sketch_encode(s, SketchParams(64, 2, SEED, rho_override=2))
    b = sketch_encode(s, SketchParams(64, 2, Seed.from_int(0), rho_override=2), "t")
    with pytest.raises(DecodeError):
        sketch_decode(a, b)
