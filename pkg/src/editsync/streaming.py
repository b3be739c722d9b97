"""Edit distance over streams.

``sim_stream_ed`` reads ``s`` and ``t`` together in chunks of ``K`` bits and
keeps, for each diagonal ``d = j - i`` in ``[-K, K]``, only its current score
and the furthest rows reached at the two scores below it. Slides along a
diagonal stop at the data read so far; a diagonal whose slide hit that
boundary is picked up again in the next phase from where it stopped, so the
capped table is always ``min(true value, boundary)`` and nothing is lost.

``std_stream_ed`` is the one-way variant: it sketches ``s``, then ``t``, and
compares the sketches.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

import numpy as np

from .core import BitString, EditOp, EditScript, as_bits
from .errors import StreamError

NEG = -(1 << 60)


# ---------------------------------------------------------------------------
# LCP over a pair of short windows


class LcpIndex:
    """Longest common prefix of any two suffixes of ``a`` and ``b``.

    Each window is packed into one integer, least significant bit first, so a
    query is a shift, an xor and a lowest-set-bit lookup.
    """

    def __init__(self, a, b):
        self.a = as_bits(a).bits
        self.b = as_bits(b).bits
        self._A = _pack(self.a)
        self._B = _pack(self.b)

    def query(self, i: int, j: int) -> int:
        """LCP of ``a[i..]`` and ``b[j..]`` (1-based)."""
        room = min(len(self.a) - i + 1, len(self.b) - j + 1)
        if room <= 0:
            return 0
        x = (self._A >> (i - 1)) ^ (self._B >> (j - 1))
        if not x:
            return room
        return min(room, (x & -x).bit_length() - 1)


def _pack(bits: bytes) -> int:
    if not bits:
        return 0
    return int.from_bytes(np.packbits(np.frombuffer(bits, dtype=np.uint8), bitorder="little").tobytes(), "little")


def lcp_build(a, b) -> LcpIndex:
    return LcpIndex(a, b)


def lcp_query(index: LcpIndex, i: int, j: int) -> int:
    return index.query(i, j)


# ---------------------------------------------------------------------------
# readers


_ASCII_BITS = bytes.maketrans(b"01", b"\x00\x01")


class ChunkReader:
    """Hands out a bit source in pieces; files may be read as raw bytes expanded to bits.

    Strings, lists and arrays are whole bit sequences. Any other iterable is
    taken as a stream of chunks, each chunk a bit sequence.
    """

    def __init__(self, source, chunk_bits: int = 4096):
        if isinstance(source, (BitString, bytes, bytearray, str, np.ndarray, list, tuple)):
            data = as_bits(source).bits
            self._it = iter([data[k: k + chunk_bits] for k in range(0, len(data), chunk_bits)])
        else:
            self._it = iter(source)
        self._buf = b""
        self.consumed = 0

    @classmethod
    def from_file(cls, path, byte_mode: bool = False, chunk_bytes: int = 1 << 16) -> "ChunkReader":
        def gen():
            with open(Path(path), "rb") as fh:
                while True:
                    block = fh.read(chunk_bytes)
                    if not block:
                        return
                    if byte_mode:
                        yield np.unpackbits(np.frombuffer(block, dtype=np.uint8)).tobytes()
                    else:
                        text = block.translate(None, b" \t\r\n")
                        if text.translate(None, b"01"):
                            raise StreamError(f"{path}: expected a text of 0/1 characters")
                        yield text.translate(_ASCII_BITS)
        return cls(gen())

    def read(self, k: int) -> bytes:
        while len(self._buf) < k:
            try:
                piece = next(self._it)
            except StopIteration:
                break
            self._buf += bytes(getattr(piece, "bits", piece))
        out, self._buf = self._buf[:k], self._buf[k:]
        self.consumed += len(out)
        return out


def _reader(x, chunk_bits: int = 4096) -> ChunkReader:
    return x if isinstance(x, ChunkReader) else ChunkReader(x, chunk_bits)


# ---------------------------------------------------------------------------
# simultaneous streaming


@dataclass
class StreamStats:
    phases: int = 0
    peak_state_words: int = 0
    peak_window: int = 0
    max_processed: int = 0
    processed: list[int] = field(default_factory=list)


@dataclass
class StreamResult:
    distance: int | None  # None when the distance exceeds K
    script: EditScript | None
    stats: StreamStats

    @property
    def over_budget(self) -> bool:
        return self.distance is None


# how the start row of a score level was reached
_OWN, _FROM_LEFT, _FROM_RIGHT, _ORIGIN = range(4)


class _Engine:
    def __init__(self, K: int, keep_script: bool):
        if K < 0:
            raise ValueError("K must be non-negative")
        self.K = K
        size = 2 * K + 1
        # score, furthest row one score below, and two scores below
        self.e = [0] * size
        self.last = [NEG] * size
        self.prev = [NEG] * size
        self.last[K] = -1  # lets diagonal 0 start at row 0 with score 0
        self.buckets: list[list[int]] = [[] for _ in range(K + 2)]
        self.buckets[0] = list(range(size))
        self.keep = keep_script
        self.records: list[dict[int, tuple]] = [{} for _ in range(size)] if keep_script else []
        self.ps = self.pt = 0  # bits of s and t read so far
        self.sw, self.tw = bytearray(), bytearray()
        self.sbase = self.tbase = 1  # global index of each window's first bit
        self.stats = StreamStats(processed=[0] * size)

    def cap(self, d: int, ps: int, pt: int) -> int:
        return min(ps, pt - d)

    def _value(self, dd: int, e: int, ps: int, pt: int) -> int:
        """Row reached by diagonal index ``dd`` with score ``e`` (``e`` one below the caller's)."""
        if not 0 <= dd < len(self.e) or e < 0:
            return NEG
        have = self.e[dd]
        if have == e:
            return self.cap(dd - self.K, ps, pt)
        if have == e + 1:
            return self.last[dd]
        if have == e + 2:
            return self.prev[dd]
        raise AssertionError("neighbouring scores differ by more than one")

    def feed(self, a: bytes, b: bytes):
        old_s, old_t = self.ps, self.pt
        self.sw += a
        self.tw += b
        self.ps += len(a)
        self.pt += len(b)
        self.stats.phases += 1
        self.stats.peak_window = max(self.stats.peak_window, len(self.sw) + len(self.tw))
        self._phase(old_s, old_t)
        keep_from = max(1, min(self.ps, self.pt) - 2 * self.K + 1)
        if keep_from > self.sbase:
            del self.sw[: keep_from - self.sbase]
            self.sbase = keep_from
        if keep_from > self.tbase:
            del self.tw[: keep_from - self.tbase]
            self.tbase = keep_from

    def _phase(self, old_s: int, old_t: int):
        K, ps, pt = self.K, self.ps, self.pt
        lcp = LcpIndex(bytes(self.sw), bytes(self.tw))
        for e in range(K + 1):
            todo, self.buckets[e] = self.buckets[e], []
            for dd in todo:
                d = dd - K
                self.stats.processed[dd] += 1
                row = self._level(dd, d, e, ps, pt, old_s, old_t, lcp)
                cap = self.cap(d, ps, pt)
                if row is not None and row >= cap:
                    self.buckets[e].append(dd)  # waits at the boundary
                    continue
                self.prev[dd], self.last[dd] = self.last[dd], NEG if row is None else row
                self.e[dd] = e + 1
                self.buckets[e + 1].append(dd)
            words = 3 * len(self.e) + sum(len(bk) for bk in self.buckets[: K + 1])
            self.stats.peak_state_words = max(self.stats.peak_state_words, words)
        self.buckets[K + 1] = []  # scores above K are dropped for good

    def _level(self, dd, d, e, ps, pt, old_s, old_t, lcp):
        """Furthest row on diagonal ``d`` with score ``e`` (None if unreachable), capped."""
        if e < abs(d):
            return None
        own = self.last[dd]
        cands = [
            (own + 1 if own != NEG else NEG, _OWN),
            (self._value(dd - 1, e - 1, ps, pt), _FROM_LEFT),
            (self._value(dd + 1, e - 1, ps, pt) + 1, _FROM_RIGHT),
        ]
        if e == 0:
            cands = [(0, _ORIGIN)]
        start, src = max(cands, key=lambda c: c[0])
        lo = max(0, -d)
        if start < lo:
            start, src = lo, _ORIGIN
        cap = self.cap(d, ps, pt)
        if self.keep:
            self._record(dd, d, e, start, src)
        if start >= cap:
            return cap
        # rows up to the previous boundary are known to match already
        r = max(start, self.cap(d, old_s, old_t))
        if r >= cap:
            return cap
        run = lcp.query(r + 1 - self.sbase + 1, r + d + 1 - self.tbase + 1)
        return min(r + run, cap)

    def _record(self, dd, d, e, start, src):
        bit = None
        if src in (_OWN, _FROM_LEFT):
            k = start + d - self.tbase
            if 0 <= k < len(self.tw):
                bit = self.tw[k]
            elif k < 0:
                # the cell scrolled out of the window; it was recorded when it was read
                old = self.records[dd].get(e)
                if old is not None and old[:2] == (src, start):
                    return
        self.records[dd][e] = (src, start, bit)

    def finish(self):
        n, m = self.ps, self.pt
        d = m - n
        if abs(d) > self.K:
            return None, None
        dd = d + self.K
        e = self.e[dd]
        if e > self.K or self.cap(d, n, m) != n:
            return None, None
        script = self._traceback(dd, e) if self.keep else None
        return e, script

    def _traceback(self, dd: int, e: int) -> EditScript:
        steps = []
        while e > 0:
            src, start, bit = self.records[dd][e]
            d = dd - self.K
            if src == _OWN:
                steps.append(("sub", start, bit))
            elif src == _FROM_LEFT:
                steps.append(("ins", start, bit))
                dd -= 1
            elif src == _FROM_RIGHT:
                steps.append(("del", start, None))
                dd += 1
            else:
                raise AssertionError("traceback reached an origin above score 0")
            e -= 1
        ops, offset = [], 0
        for kind, start, bit in reversed(steps):
            if bit is None and kind != "del":
                raise AssertionError("edit bit was never observed")
            if kind == "sub":
                ops.append(EditOp("sub", start + offset, bit))
            elif kind == "del":
                ops.append(EditOp("del", start + offset))
                offset -= 1
            else:
                ops.append(EditOp("ins", start + 1 + offset, bit))
                offset += 1
        return EditScript(tuple(ops))


def _drive(s_stream, t_stream, K: int, keep_script: bool) -> StreamResult:
    sr, tr = _reader(s_stream), _reader(t_stream)
    eng = _Engine(K, keep_script)
    step = max(K, 1)
    while True:
        a, b = sr.read(step), tr.read(step)
        if not a and not b and eng.stats.phases:
            break
        if any(x > 1 for x in a + b):
            raise StreamError("streams must carry bits")
        eng.feed(a, b)
        if abs(eng.ps - eng.pt) > K and (len(a) < step or len(b) < step):
            # one side has ended and the length gap alone exceeds the budget
            return StreamResult(None, None, _seal(eng.stats))
    dist, script = eng.finish()
    return StreamResult(dist, script, _seal(eng.stats))


def _seal(stats: StreamStats) -> StreamStats:
    stats.max_processed = max(stats.processed, default=0)
    return stats


def sim_stream_ed(s_stream, t_stream, K: int) -> StreamResult:
    """Exact ``ed(s, t)`` when it is at most ``K``; ``distance`` is None otherwise."""
    return _drive(s_stream, t_stream, K, keep_script=False)


def sim_stream_ed_with_script(s_stream, t_stream, K: int) -> StreamResult:
    """As ``sim_stream_ed``, also returning an optimal edit script (O(K^2) words)."""
    return _drive(s_stream, t_stream, K, keep_script=True)


# ---------------------------------------------------------------------------
# standard streaming: sketch s, then t, then compare


def std_stream_ed(s_stream, t_stream, params):
    """Sketch each stream in one pass (``s`` first) and decode the pair.

    Only the finished sketch of ``s`` and the builder for ``t`` are held in
    memory. Raises ``DecodeError`` as ``sketch_decode`` does.
    """
    from .edsketch import SketchStream, sketch_decode

    sketches = []
    for role, src in (("s", s_stream), ("t", t_stream)):
        reader = _reader(src)
        builder = SketchStream(params, role)
        while True:
            piece = reader.read(4096)
            if not piece:
                break
            builder.extend(piece)
        sketches.append(builder.finish())
    return sketch_decode(*sketches)
