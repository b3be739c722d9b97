import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from editsync.hashing import KRHasher, Seed, UnivHasher, kr_sign, mix64, mix64_np, prf_bits, univ_eval

A, B = Seed.from_int(1), Seed.from_int(2)


def test_seed_hex():
    assert Seed.from_hex(A.hex()) == A
    assert len(A.hex()) == 64
    with pytest.raises(ValueError):
        Seed.from_hex("abc")
    with pytest.raises(ValueError):
        Seed(b"short")


def test_prf_bits_basics():
    assert len(prf_bits(A, "cgk/0", 0)) == 0
    x = prf_bits(A, "cgk/0", 64)
    assert np.array_equal(x, prf_bits(A, "cgk/0", 64))
    assert set(x.tolist()) <= {0, 1}
    # a longer request extends the shorter one
    assert np.array_equal(prf_bits(A, "cgk/0", 200)[:64], x)


def test_prf_seeds_disagree_binomially():
    a, b = prf_bits(A, "cgk/0", 10_000), prf_bits(B, "cgk/0", 10_000)
    # mean 5000, sd 50; six sigma is 300
    assert abs(int(np.count_nonzero(a != b)) - 5000) <= 300


def test_prf_stream_ids_uncorrelated():
    a = prf_bits(A, "x", 20_000).astype(float)
    b = prf_bits(A, "y", 20_000).astype(float)
    assert abs(np.corrcoef(a, b)[0, 1]) < 0.05


def test_kr_empty_and_determinism():
    h = KRHasher(A, "t", 30)
    assert kr_sign(h, b"") == 0
    assert h.sign([0, 1, 1]) == h.sign([0, 1, 1])
    assert h.sign([0]) != h.sign([0, 0])


def test_kr_collisions():
    h = KRHasher(A, "coll", 30)
    rng = np.random.default_rng(3)
    xs = rng.integers(0, 2, (100_000, 2, 64), dtype=np.uint8)
    hits = 0
    for a, b in xs:
        if not np.array_equal(a, b) and h.sign(a.tobytes()) == h.sign(b.tobytes()):
            hits += 1
    assert hits <= 3


@settings(max_examples=100, deadline=None)
@given(st.lists(st.integers(0, 1), min_size=1, max_size=60), st.data())
def test_prefix_signatures(bits, data):
    h = KRHasher(B, "pre", 40)
    table = h.prefix(bits)
    i = data.draw(st.integers(1, len(bits)))
    j = data.draw(st.integers(i - 1, len(bits)))
    assert table.sig(i, j) == h.sign(bits[i - 1: j])
    # incremental extension agrees with the from-scratch value on every prefix
    state = 0
    for k, b in enumerate(bits, 1):
        state = h.extend(state, b)
        assert h.truncate(state) == h.sign(bits[:k])


def test_univ_range_and_stability():
    h = UnivHasher(A, "u", 10_000, 1000)
    assert univ_eval(h, 1) == univ_eval(h, 1)
    vals = [h(i) for i in range(1, 10_001)]
    assert min(vals) >= 1 and max(vals) <= 1000
    with pytest.raises(ValueError):
        h(0)


def test_univ_collision_rate():
    u, v = 10_000, 1000
    rng = np.random.default_rng(4)
    pairs = rng.integers(1, u + 1, (20_000, 2))
    pairs = pairs[pairs[:, 0] != pairs[:, 1]]
    hits = 0
    for s in range(10):
        h = UnivHasher(Seed.from_int(100 + s), "rate", u, v)
        hits += sum(h(int(a)) == h(int(b)) for a, b in pairs)
    rate = hits / (10 * len(pairs))
    assert 0.5 / v <= rate <= 2 / v


def test_mix64_scalar_matches_numpy():
    xs = np.random.default_rng(5).integers(0, 2**63, 1000, dtype=np.uint64) * np.uint64(2)
    got = mix64_np(xs)
    assert [mix64(int(x)) for x in xs] == got.tolist()
