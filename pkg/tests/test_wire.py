import pytest
from hypothesis import given, strategies as st

from editsync.errors import FormatError
from editsync.wire import Reader, Writer


@given(st.lists(st.integers(0, 2 ** 70)), st.integers(-(2 ** 40), 2 ** 40), st.binary(max_size=50), st.text(max_size=20))
def test_roundtrip(nums, signed, blob, text):
    w = Writer().raw(b"MAG1")
    for x in nums:
        w.uvar(x)
    w.svar(signed).blob(blob).text(text).fixed(0xBEEF, 2)
    r = Reader(w.bytes())
    r.magic(b"MAG1")
    assert [r.uvar() for _ in nums] == nums
    assert r.svar() == signed and r.blob() == blob and r.text() == text and r.fixed(2) == 0xBEEF
    r.done()


def test_errors():
    with pytest.raises(FormatError):
        Reader(b"ABCD").magic(b"WXYZ")
    with pytest.raises(FormatError):
        Reader(b"\x05ab").blob()
    with pytest.raises(FormatError):
        Reader(b"x").done()
