import json
import os
import subprocess
import sys
from pathlib import Path

import pytest

from editsync.cli import read_script, run
from editsync.core import BitString, apply_script

FIX = Path(__file__).parent / "fixtures"
SEED = "5e" * 32


@pytest.fixture(autouse=True)
def seed_env(monkeypatch):
    monkeypatch.setenv("EDITSYNC_SEED", SEED)


def summary(capsys):
    return json.loads(capsys.readouterr().out.strip().splitlines()[-1])


def test_exchange_identity(tmp_path, capsys):
    src = tmp_path / "a.bin"
    src.write_bytes(os.urandom(2000))
    assert run(["--json", "exchange-encode", "--k", "2", "--in", str(src), "--out", str(tmp_path / "m")]) == 0
    info = summary(capsys)
    assert info["schema"] == 1 and info["size_bits"] > 0
    assert run(["exchange-decode", "--msg", str(tmp_path / "m"), "--have", str(src),
                "--out", str(tmp_path / "r")]) == 0
    assert (tmp_path / "r").read_bytes() == src.read_bytes()


def test_exchange_with_edits_in_bit_mode(tmp_path):
    a, b = FIX / "pair_a.txt", FIX / "pair_b.txt"
    assert run(["exchange-encode", "--bits", "--k", "16", "--in", str(a), "--out", str(tmp_path / "m")]) == 0
    assert run(["exchange-decode", "--msg", str(tmp_path / "m"), "--have", str(b),
                "--out", str(tmp_path / "r")]) == 0
    assert (tmp_path / "r").read_text().strip() == a.read_text().strip()


def test_sketch_compare_identical(tmp_path, capsys):
    src = tmp_path / "a.txt"
    src.write_text("0110" * 50)
    for name, role in (("x", "s"), ("y", "t")):
        assert run(["sketch", "--bits", "--k", "2", "--in", str(src), "--out", str(tmp_path / name),
                    "--role", role]) == 0
    assert run(["--json", "sketch-compare", "--a", str(tmp_path / "x"), "--b", str(tmp_path / "y"),
                "--emit-script", str(tmp_path / "d.es")]) == 0
    assert summary(capsys)["distance"] == 0
    assert len(read_script(tmp_path / "d.es")) == 0


def test_stream_ed_fixture(tmp_path, capsys):
    want = json.loads((FIX / "pair.json").read_text())["ed_oracle"]
    a, b = FIX / "pair_a.txt", FIX / "pair_b.txt"
    es = tmp_path / "s.es"
    assert run(["--json", "stream-ed", "--bits", "--k", "16", "--a", str(a), "--b", str(b),
                "--script", str(es), "--mode", "sim", "--chunk-bytes", "100"]) == 0
    assert summary(capsys)["distance"] == want
    script = read_script(es)
    assert len(script) == want
    assert apply_script(BitString(a.read_text().strip()), script) == BitString(b.read_text().strip())
    assert run(["apply", "--bits", "--in", str(a), "--script", str(es), "--out", str(tmp_path / "c")]) == 0
    assert (tmp_path / "c").read_text().strip() == b.read_text().strip()


def test_stream_ed_over_budget_exit_code(capsys):
    a, b = FIX / "pair_a.txt", FIX / "pair_b.txt"
    assert run(["--json", "stream-ed", "--bits", "--k", "3", "--a", str(a), "--b", str(b)]) == 2
    assert summary(capsys)["exit"] == 2


def test_usage_errors(tmp_path, monkeypatch, capsys):
    assert run(["sketch", "--k", "1"]) == 1
    assert run(["nonsense"]) == 1
    monkeypatch.delenv("EDITSYNC_SEED")
    (tmp_path / "a").write_bytes(b"xy")
    assert run(["exchange-encode", "--k", "1", "--in", str(tmp_path / "a"), "--out", str(tmp_path / "m")]) == 1
    assert run(["exchange-encode", "--k", "1", "--seed", "zz", "--in", str(tmp_path / "a"),
                "--out", str(tmp_path / "m")]) == 1
    assert run(["exchange-decode", "--msg", str(tmp_path / "missing"), "--have", str(tmp_path / "a"),
                "--out", str(tmp_path / "r")]) == 1
    capsys.readouterr()


def test_reruns_byte_identical(tmp_path):
    src = tmp_path / "a.bin"
    src.write_bytes(bytes(range(256)) * 4)
    outs = []
    for k in range(2):
        out = tmp_path / f"m{k}"
        assert run(["exchange-encode", "--k", "1", "--in", str(src), "--out", str(out)]) == 0
        outs.append(out.read_bytes())
    assert outs[0] == outs[1]


def test_bench(tmp_path):
    out = tmp_path / "r.csv"
    assert run(["bench", "--suite", "empty", "--out", str(out)]) == 0
    assert out.read_text().startswith("suite,trial,n,K")


def test_console_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "editsync.cli", "bench", "--suite", "empty"],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and proc.stdout.startswith("suite,")
