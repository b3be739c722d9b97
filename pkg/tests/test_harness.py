import json

import pytest

from editsync.core import ed_oracle
from editsync.errors import EditsyncError, SizeError
from editsync.harness import SUITES, CorpusSpec, gen_pair, run_suite


def test_zero_planted():
    s, t, d = gen_pair(CorpusSpec(200, 0), 0)
    assert s == t and d == 0


def test_single_substitution():
    for trial in range(20):
        _, _, d = gen_pair(CorpusSpec(100, 1, mix=(0, 0, 1)), trial)
        assert d in (0, 1)


def test_planted_is_upper_bound():
    spec = CorpusSpec(300, 8, master_seed=9)
    for trial in range(100):
        s, t, d = gen_pair(spec, trial)
        assert d <= 8 and d == ed_oracle(s, t)[0]


def test_deterministic_and_periodic():
    spec = CorpusSpec(400, 3, period=5, run=200, master_seed=1)
    assert gen_pair(spec, 4) == gen_pair(spec, 4)
    assert gen_pair(spec, 4) != gen_pair(spec, 5)
    s, _, _ = gen_pair(CorpusSpec(400, 0, period=3, run=400), 0)
    assert all(s[i] == s[i + 3] for i in range(1, 398))


def test_oracle_cap():
    with pytest.raises(SizeError):
        gen_pair(CorpusSpec(1 << 17, 1), 0)
    s, t, d = gen_pair(CorpusSpec(1 << 17, 1), 0, with_ed=False)
    assert d is None and len(s) == 1 << 17


def test_empty_suite():
    rep = run_suite("empty")
    assert rep.rows == [] and rep.aggregates() == []
    assert rep.to_csv().strip() == ",".join(("suite", "trial", "n", "K", "seed", "size_bits", "success",
                                             "distance", "oracle_distance", "runtime"))


def test_docx_suite_rate_row():
    rep = run_suite("docx-roundtrip", trials=3)
    (agg,) = rep.aggregates()
    assert agg["trials"] == 3 and agg["success_rate"] == sum(r["success"] for r in rep.rows) / 3


def test_sketch_sizes_monotone():
    rep = run_suite("sketch-size-scaling", trials=1)
    sizes = [a["mean_size_bits"] for a in rep.aggregates()]
    assert sizes == sorted(sizes) and len(sizes) == 3


def test_reports_reproducible(tmp_path):
    a = run_suite("stream-oracle", trials=2, timings=False)
    b = run_suite("stream-oracle", trials=2, timings=False)
    assert a.to_csv() == b.to_csv()
    a.write(tmp_path / "r.json")
    data = json.loads((tmp_path / "r.json").read_text())
    assert data["schema"] == 1 and len(data["rows"]) == 4


def test_unknown_suite():
    with pytest.raises(EditsyncError):
        run_suite("nope")
    assert "docx-roundtrip" in SUITES
