import pytest
from hypothesis import given, settings, strategies as st

from editsync.core import (
    BitString, EditOp, EditScript, alignment_cost, alignment_to_script, apply_script, banded_align,
    check_alignment, ed_oracle, optimal_alignment,
)
from editsync.errors import AlignmentError, ScriptError, SizeError

from oracles import all_strings, apply_ops, edit_distance, edit_distance_band, edit_distance_np

bits = st.lists(st.integers(0, 1), max_size=40)


def test_bitstring_roundtrips():
    b = BitString("0110")
    assert len(b) == 4 and str(b) == "0110"
    assert b[1] == 0 and b[2] == 1
    assert BitString.from_bytes(b"\xa5").bits == bytes([1, 0, 1, 0, 0, 1, 0, 1])
    assert BitString.from_bytes(b"\x00\xff").to_bytes() == b"\x00\xff"
    with pytest.raises(ValueError):
        BitString("012")
    assert list(BitString("1101")) == [1, 1, 0, 1]


def test_oracle_identical():
    d, script = ed_oracle("0101", "0101")
    assert d == 0 and len(script) == 0


def test_oracle_append():
    d, script = ed_oracle("0101", "01011")
    assert d == 1
    assert [str(op) for op in script] == ["Insert@5 '1'"]


def test_oracle_two_ops():
    assert edit_distance([0, 1, 0, 1], [0, 0, 1, 1]) == 2
    d, script = ed_oracle("0101", "0011")
    assert d == 2 and len(script) == 2
    assert apply_script("0101", script) == BitString("0011")


def test_apply_examples():
    assert apply_script("0101", []) == BitString("0101")
    assert apply_script("0101", [EditOp("del", 1)]) == BitString("101")
    _, script = ed_oracle("0011", "0101")
    assert apply_script("0011", script) == BitString("0101")


def test_apply_rejects_bad_ops():
    with pytest.raises(ScriptError):
        apply_script("01", [EditOp("del", 3)])
    with pytest.raises(ScriptError):
        apply_script("01", [EditOp("ins", 1, 2)])
    with pytest.raises(ScriptError):
        EditScript.from_records([{"op": "swap", "pos": 1}])


def test_script_records_roundtrip():
    script = EditScript((EditOp("sub", 2, 1), EditOp("del", 1), EditOp("ins", 3, 0)))
    assert EditScript.from_records(script.to_records()) == script


def test_alignment_to_script_examples():
    assert len(alignment_to_script("0110", "0110", [(1, 1), (2, 2), (3, 3), (4, 4)])) == 0
    # "01" vs "10" with s[1] matched to t[2]: delete the leading 0, append a 0
    script = alignment_to_script("01", "10", [(2, 1)])
    assert len(script) == 2 and apply_script("01", script) == BitString("10")
    d, edges = optimal_alignment("0011", "0101")
    assert len(alignment_to_script("0011", "0101", edges)) == d


def test_check_alignment_rejects():
    with pytest.raises(AlignmentError):
        check_alignment(BitString("01"), BitString("01"), [(1, 2)])
    with pytest.raises(AlignmentError):
        check_alignment(BitString("00"), BitString("00"), [(2, 2), (1, 1)])


def test_oracle_cap():
    from editsync.core import ORACLE_CAP

    with pytest.raises(SizeError):
        ed_oracle(BitString([0] * (ORACLE_CAP + 1)), "0")


def test_exhaustive_small():
    strings = list(all_strings(4))
    for a in strings:
        for b in strings:
            d, script = ed_oracle(a, b)
            assert d == edit_distance(a, b)
            assert list(apply_script(a, script).bits) == b


@settings(max_examples=200, deadline=None)
@given(bits, bits)
def test_oracle_matches_reference(a, b):
    d, script = ed_oracle(a, b)
    assert d == edit_distance(a, b)
    assert apply_ops(a, [(op.kind, op.pos, op.bit) for op in script]) == b
    _, edges = optimal_alignment(a, b)
    assert alignment_cost(len(a), len(b), edges) == d


@settings(max_examples=200, deadline=None)
@given(bits, bits, st.integers(0, 12))
def test_banded_align(a, b, k):
    d = edit_distance(a, b)
    got = banded_align(a, b, k)
    if d > k:
        assert got is None
    else:
        assert got[0] == d
        assert alignment_cost(len(a), len(b), got[1]) == d


@settings(max_examples=200, deadline=None)
@given(bits, bits)
def test_vectorised_oracle_agrees(a, b):
    assert edit_distance_np(a, b) == edit_distance(a, b)


@settings(max_examples=200, deadline=None)
@given(bits, bits, st.integers(0, 12))
def test_banded_oracle_exact_within_band(a, b, w):
    d = edit_distance(a, b)
    got = edit_distance_band(a, b, w)
    assert got >= d
    if d <= w:
        assert got == d
