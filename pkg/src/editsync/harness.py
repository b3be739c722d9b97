"""Planted-edit corpora and small experiment suites.

A suite is a generator of per-trial rows. ``run_suite`` collects the rows,
adds aggregate success rates and mean sizes, and writes CSV or JSON.
Everything is derived from the master seed, so reports are reproducible.
"""
from __future__ import annotations

import csv
import io
import json
import time
from dataclasses import dataclass, field

import numpy as np

from .core import BitString, ed_oracle
from .errors import DecodeError, EditsyncError, SizeError
from .hashing import Seed

ORACLE_CAP = 1 << 16
COLUMNS = ("suite", "trial", "n", "K", "seed", "size_bits", "success", "distance", "oracle_distance", "runtime")


@dataclass(frozen=True)
class CorpusSpec:
    n: int
    k_planted: int = 0
    mix: tuple[float, float, float] = (1.0, 1.0, 1.0)  # insert, delete, substitute weights
    period: int = 0
    run: int = 0
    trials: int = 1
    master_seed: int = 0

    def seed(self, trial: int) -> Seed:
        return Seed(Seed.from_int(self.master_seed).derive(f"corpus/{self.n}/{self.k_planted}/{trial}"))


def _base(spec: CorpusSpec, rng: np.random.Generator) -> np.ndarray:
    s = rng.integers(0, 2, spec.n, dtype=np.uint8)
    if spec.period and spec.run:
        run = min(spec.run, spec.n)
        at = int(rng.integers(0, spec.n - run + 1))
        pattern = rng.integers(0, 2, spec.period, dtype=np.uint8)
        s[at: at + run] = np.resize(pattern, run)
    return s


def plant_edits(s, k: int, rng: np.random.Generator, mix=(1.0, 1.0, 1.0)) -> BitString:
    """Apply ``k`` random edits; the result is within edit distance ``k`` of ``s``."""
    t = list(BitString(s).bits)
    w = np.asarray(mix, dtype=float)
    w = w / w.sum()
    for _ in range(k):
        op = int(rng.choice(3, p=w))
        if op == 0:
            t.insert(int(rng.integers(len(t) + 1)), int(rng.integers(2)))
        elif op == 1 and t:
            del t[int(rng.integers(len(t)))]
        elif op == 2 and t:
            t[int(rng.integers(len(t)))] ^= 1
    return BitString(t)


def gen_pair(spec: CorpusSpec, trial: int, with_ed: bool = True):
    """Deterministic (s, t, true_ed) for one trial; true_ed is None when not requested."""
    if with_ed and spec.n + spec.k_planted > ORACLE_CAP:
        raise SizeError(f"n = {spec.n} is above the oracle cap {ORACLE_CAP}")
    rng = spec.seed(trial).rng("pair")
    s = BitString(_base(spec, rng))
    t = plant_edits(s, spec.k_planted, rng, spec.mix)
    return s, t, (ed_oracle(s, t)[0] if with_ed else None)


def ed_instance(n: int, d: int, seed: Seed) -> tuple[BitString, BitString]:
    """``d`` flips spaced far apart in a random string.

    The edit distance is almost always exactly ``d``; callers that need it
    exact should confirm with ``ed_oracle``.
    """
    rng = seed.rng("far")
    s = rng.integers(0, 2, n, dtype=np.uint8)
    t = s.copy()
    gap = n // d
    pos = np.arange(d) * gap + rng.integers(gap // 4, 3 * gap // 4, d)
    t[pos] ^= 1
    return BitString(s), BitString(t)


# ---------------------------------------------------------------------------
# suites


def _row(suite, trial, n, K, seed, size_bits=0, success=False, distance=None, oracle=None, runtime=0.0):
    return dict(zip(COLUMNS, (suite, trial, n, K, seed.hex(), size_bits, bool(success), distance, oracle,
                              round(runtime, 4))))


def _docx_trials(name, grid, trials, master, ims=False):
    from .docx import docx_decode, docx_encode
    from .ims import ims_decode, ims_encode

    for n, K in grid:
        spec = CorpusSpec(n, K, trials=trials, master_seed=master)
        for trial in range(trials):
            s, t, d = gen_pair(spec, trial, with_ed=False)
            seed = spec.seed(trial)
            t0 = time.perf_counter()
            msg = ims_encode(s, K, seed) if ims else docx_encode(s, K, seed)
            try:
                out = (ims_decode if ims else docx_decode)(msg, t)
                ok = out == s
            except DecodeError:
                ok = False
            yield _row(name, trial, n, K, seed, msg.size_bits(), ok, runtime=time.perf_counter() - t0)


def _sketch_trials(name, grid, trials, master, decode=True):
    from .edsketch import SketchParams, sketch_decode, sketch_encode

    for n, K in grid:
        spec = CorpusSpec(n - K, K, trials=trials, master_seed=master)
        for trial in range(trials):
            seed = spec.seed(trial)
            params = SketchParams(n, K, seed)
            if not decode:
                s = BitString(_base(spec, seed.rng("pair")))
                t0 = time.perf_counter()
                sk = sketch_encode(s, params)
                yield _row(name, trial, n, K, seed, sk.size_bits(), True, runtime=time.perf_counter() - t0)
                continue
            s, t, d = gen_pair(spec, trial)
            t0 = time.perf_counter()
            a, b = sketch_encode(s, params, "s"), sketch_encode(t, params, "t")
            try:
                dist = sketch_decode(a, b).distance
            except DecodeError:
                dist = None
            yield _row(name, trial, n, K, seed, a.size_bits(), dist == d, dist, d, time.perf_counter() - t0)


def _stream_trials(name, grid, trials, master):
    from .streaming import sim_stream_ed

    for n, K in grid:
        spec = CorpusSpec(n, K, trials=trials, master_seed=master)
        for trial in range(trials):
            s, t, d = gen_pair(spec, trial)
            t0 = time.perf_counter()
            r = sim_stream_ed(s, t, K)
            yield _row(name, trial, n, K, spec.seed(trial), 0, r.distance == d, r.distance, d,
                       time.perf_counter() - t0)


SUITES = {
    "empty": lambda trials, master: iter(()),
    "docx-roundtrip": lambda trials, master: _docx_trials("docx-roundtrip", [(1 << 12, 8)], trials, master),
    "docx-size-scaling": lambda trials, master: _docx_trials(
        "docx-size-scaling", [(1 << 10, 8), (1 << 12, 8), (1 << 14, 8)], trials, master),
    "ims-roundtrip": lambda trials, master: _docx_trials("ims-roundtrip", [(1 << 12, 8)], trials, master, ims=True),
    "sketch-roundtrip": lambda trials, master: _sketch_trials("sketch-roundtrip", [(1 << 10, 4)], trials, master),
    "sketch-size-scaling": lambda trials, master: _sketch_trials(
        "sketch-size-scaling", [(1 << 8, 4), (1 << 10, 4), (1 << 12, 4)], trials, master, decode=False),
    "stream-oracle": lambda trials, master: _stream_trials("stream-oracle", [(1 << 10, 8), (1 << 12, 16)],
                                                           trials, master),
}


@dataclass
class Report:
    suite: str
    rows: list[dict] = field(default_factory=list)

    def aggregates(self) -> list[dict]:
        groups: dict[tuple, list[dict]] = {}
        for r in self.rows:
            groups.setdefault((r["n"], r["K"]), []).append(r)
        return [{"suite": self.suite, "n": n, "K": K, "trials": len(g),
                 "success_rate": sum(r["success"] for r in g) / len(g),
                 "mean_size_bits": sum(r["size_bits"] for r in g) / len(g)}
                for (n, K), g in sorted(groups.items())]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.DictWriter(buf, COLUMNS, lineterminator="\n")
        w.writeheader()
        w.writerows(self.rows)
        return buf.getvalue()

    def to_json(self) -> str:
        return json.dumps({"schema": 1, "suite": self.suite, "rows": self.rows,
                           "aggregates": self.aggregates()}, indent=1)

    def write(self, path) -> None:
        text = self.to_json() if str(path).endswith(".json") else self.to_csv()
        with open(path, "w") as fh:
            fh.write(text)


def run_suite(name: str, trials: int = 5, master_seed: int = 0, timings: bool = True) -> Report:
    """Run a registered suite. With ``timings=False`` the runtime column is zeroed for byte-stable reports."""
    if name not in SUITES:
        raise EditsyncError(f"unknown suite {name!r}; known: {', '.join(sorted(SUITES))}")
    rep = Report(name)
    for row in SUITES[name](trials, master_seed):
        if not timings:
            row["runtime"] = 0.0
        rep.rows.append(row)
    return rep


__all__ = ["CorpusSpec", "Report", "SUITES", "ed_instance", "gen_pair", "plant_edits", "run_suite"]
