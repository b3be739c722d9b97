"""Little-endian, length-prefixed binary encoding used by all artifacts."""
from __future__ import annotations

from .errors import FormatError


class Writer:
    def __init__(self):
        self._parts: list[bytes] = []

    def raw(self, data: bytes) -> "Writer":
        self._parts.append(bytes(data))
        return self

    def uvar(self, x: int) -> "Writer":
        if x < 0:
            raise ValueError("uvar needs a non-negative integer")
        out = bytearray()
        while True:
            byte = x & 0x7F
            x >>= 7
            if x:
                out.append(byte | 0x80)
            else:
                out.append(byte)
                break
        self._parts.append(bytes(out))
        return self

    def svar(self, x: int) -> "Writer":
        return self.uvar(2 * x if x >= 0 else -2 * x - 1)

    def blob(self, data: bytes) -> "Writer":
        self.uvar(len(data))
        return self.raw(data)

    def text(self, s: str) -> "Writer":
        return self.blob(s.encode())

    def fixed(self, x: int, nbytes: int) -> "Writer":
        return self.raw(int(x).to_bytes(nbytes, "little"))

    def bytes(self) -> bytes:
        return b"".join(self._parts)

    def __len__(self) -> int:
        return sum(len(p) for p in self._parts)


class Reader:
    def __init__(self, data: bytes):
        self.data = memoryview(bytes(data))
        self.pos = 0

    def raw(self, n: int) -> bytes:
        if self.pos + n > len(self.data):
            raise FormatError("truncated input")
        out = bytes(self.data[self.pos: self.pos + n])
        self.pos += n
        return out

    def uvar(self) -> int:
        x = shift = 0
        while True:
            if self.pos >= len(self.data):
                raise FormatError("truncated varint")
            byte = self.data[self.pos]
            self.pos += 1
            x |= (byte & 0x7F) << shift
            shift += 7
            if not byte & 0x80:
                return x
            if shift > 700:
                raise FormatError("varint too long")

    def svar(self) -> int:
        z = self.uvar()
        return z // 2 if z % 2 == 0 else -(z + 1) // 2

    def blob(self) -> bytes:
        return self.raw(self.uvar())

    def text(self) -> str:
        return self.blob().decode()

    def fixed(self, nbytes: int) -> int:
        return int.from_bytes(self.raw(nbytes), "little")

    def magic(self, expected: bytes):
        got = self.raw(len(expected))
        if got != expected:
            raise FormatError(f"bad magic {got!r}, expected {expected!r}")

    def done(self):
        if self.pos != len(self.data):
            raise FormatError("trailing bytes")
