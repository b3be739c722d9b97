import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from editsync.errors import DecodeError
from editsync.hashing import Seed
from editsync.mismatch import (
    EccRedundancy, HamParams, HamSketch, RSCode, ecc_decode, ecc_encode, ham_build_many, ham_decode_many,
    ham_sketch_build, ham_sketch_decode, ham_sketch_stream, rs_correct, rs_encode,
)

from oracles import differences

SEED = Seed.from_int(11)


# Reed-Solomon over GF(2^16)

def test_rs_no_errors():
    code = RSCode.for_errors(32, 4)
    data = list(range(100, 132))
    assert rs_correct(code, data, rs_encode(code, data)) == data


def test_rs_corrects_k_errors():
    code = RSCode.for_errors(32, 4)
    rng = np.random.default_rng(0)
    for _ in range(100):
        data = rng.integers(0, 1 << 16, 32).tolist()
        parity = rs_encode(code, data)
        bad = list(data)
        for i in rng.choice(32, 4, replace=False):
            bad[i] ^= int(rng.integers(1, 1 << 16))
        assert rs_correct(code, bad, parity) == data


def test_rs_beyond_capacity_is_mostly_detected():
    code = RSCode.for_errors(32, 4)
    rng = np.random.default_rng(1)
    detected = silent = 0
    for _ in range(100):
        data = rng.integers(0, 1 << 16, 32).tolist()
        parity = rs_encode(code, data)
        bad = list(data)
        for i in rng.choice(32, code.parity_len, replace=False):
            bad[i] ^= int(rng.integers(1, 1 << 16))
        try:
            silent += rs_correct(code, bad, parity) != data
        except DecodeError:
            detected += 1
    assert detected >= 95 and detected + silent == 100


# bucket ECC with a known candidate set

def _vectors(rng, u, planted, span=64):
    a = rng.integers(0, 256, u).tolist()
    S = sorted((rng.choice(u, span, replace=False) + 1).tolist())
    b = list(a)
    for i in S[:planted]:
        b[i - 1] = (b[i - 1] + int(rng.integers(1, 256))) % 256
    return a, b, S


def test_ecc_identity():
    a = list(range(50))
    red = ecc_encode(a, 2, 4, 2 ** -10, SEED)
    assert ecc_decode(red, a, [], SEED) == a


def test_ecc_roundtrip_and_wire():
    rng = np.random.default_rng(2)
    a, b, S = _vectors(rng, 4096, 8)
    red = EccRedundancy.from_bytes(ecc_encode(a, 8, 64, 2 ** -10, SEED, sigma_bits=8).to_bytes())
    assert ecc_decode(red, b, S, SEED) == a


def test_ecc_sparse_dict():
    a = {3: 9, 70: 1}
    b = {3: 9, 70: 2, 99: 5}
    red = ecc_encode(a, 2, 8, 2 ** -10, SEED, u=128)
    assert ecc_decode(red, b, [70, 99, 5], SEED) == a


@pytest.mark.slow
def test_ecc_statistics():
    rng = np.random.default_rng(3)
    exact = detected = 0
    for trial in range(200):
        sd = Seed.from_int(trial)
        a, b, S = _vectors(rng, 4096, int(rng.integers(1, 9)))
        red = ecc_encode(a, 8, 64, 2 ** -10, sd, sigma_bits=8)
        exact += ecc_decode(red, b, S, sd) == a
        a, b, S = _vectors(rng, 4096, 9)
        try:
            ecc_decode(ecc_encode(a, 8, 64, 2 ** -10, sd, sigma_bits=8), b, S, sd)
        except DecodeError:
            detected += 1
    assert exact >= 198
    assert detected >= 198


# IBLT Hamming sketch

def _pair(rng, n, diffs, bits=40):
    a = rng.integers(0, 1 << bits, n, dtype=np.uint64)
    b = a.copy()
    idx = rng.choice(n, diffs, replace=False)
    b[idx] ^= rng.integers(1, 1 << bits, diffs, dtype=np.uint64)
    return a, b


def test_ham_equal_vectors():
    a = np.arange(100, dtype=np.uint64)
    p = HamParams(100, 4, 40, SEED)
    assert ham_sketch_decode(ham_sketch_build(a, p), ham_sketch_build(a, p)) == []


@settings(max_examples=50, deadline=None)
@given(st.integers(1, 300), st.integers(0, 6), st.integers(0, 10 ** 6))
def test_ham_recovers_differences(n, d, salt):
    rng = np.random.default_rng(salt)
    d = min(d, n)
    a, b = _pair(rng, n, d)
    p = HamParams(n, 6, 40, Seed.from_int(salt))
    got = ham_sketch_decode(ham_sketch_build(a, p), ham_sketch_build(b, p))
    assert got == differences(a.tolist(), b.tolist())


def test_ham_stream_equals_batch_and_wire():
    rng = np.random.default_rng(4)
    a, b = _pair(rng, 500, 5)
    p = HamParams(500, 8, 40, SEED)
    batch = ham_sketch_build(a, p)
    streamed = ham_sketch_stream(((i + 1, int(x)) for i, x in enumerate(a)), p)
    assert batch.to_bytes() == streamed.to_bytes()
    back = HamSketch.from_bytes(batch.to_bytes(), SEED)
    assert back.to_bytes() == batch.to_bytes()
    assert ham_sketch_decode(back, ham_sketch_build(b, p)) == differences(a.tolist(), b.tolist())
    assert batch.size_bits() == 8 * len(batch.to_bytes(include_params=False))


def test_ham_batch_helpers_agree():
    rng = np.random.default_rng(5)
    params = [HamParams(200, 4, 30, SEED, f"l{i}") for i in range(6)]
    vals = [rng.integers(0, 1 << 30, 200, dtype=np.uint64) for _ in params]
    many = ham_build_many(params, vals)
    single = [ham_sketch_build(v, p) for v, p in zip(vals, params)]
    assert [m.to_bytes() for m in many] == [s.to_bytes() for s in single]
    other = [v.copy() for v in vals]
    other[2][:10] ^= np.uint64(1)
    got = ham_decode_many(list(zip(single, [ham_sketch_build(v, p) for v, p in zip(other, params)])))
    assert isinstance(got[2], DecodeError)
    assert all(g == [] for i, g in enumerate(got) if i != 2)


def test_ham_spec_rates():
    rng = np.random.default_rng(6)
    n, k = 1 << 14, 16
    exact = detected = 0
    trials = 200
    for trial in range(trials):
        p = HamParams(n, k, 40, Seed.from_int(trial))
        a, b = _pair(rng, n, 8)
        exact += ham_sketch_decode(ham_sketch_build(a, p), ham_sketch_build(b, p)) == differences(a.tolist(), b.tolist())
        a, b = _pair(rng, n, 2 * k)
        try:
            ham_sketch_decode(ham_sketch_build(a, p), ham_sketch_build(b, p))
        except DecodeError:
            detected += 1
    assert exact >= 0.99 * trials
    assert detected >= 0.99 * trials
