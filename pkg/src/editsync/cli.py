"""Command-line entry point.

Exit codes: 0 success, 2 detected failure (decode error or distance over
budget), 1 usage or I/O error. ``--json`` prints a one-line summary.

Inputs are byte files by default: each byte becomes 8 bits and the budget K
is scaled to 8K bits. ``--bits`` reads text files of 0/1 characters instead.
Artifacts written by the CLI carry one trailing adapter byte (0 = bits,
1 = bytes) so that decoding can re-pack its output the same way.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
import time
from pathlib import Path

from .core import BitString, EditScript, apply_script
from .errors import DecodeError, EditsyncError, FormatError

SCHEMA = 1
BITS, BYTES = 0, 1


class UsageError(Exception):
    pass


def _seed(args):
    from .hashing import Seed

    text = args.seed or os.environ.get("EDITSYNC_SEED")
    if not text:
        raise UsageError("a seed is required: pass --seed or set EDITSYNC_SEED")
    try:
        return Seed.from_hex(text)
    except ValueError as e:
        raise UsageError(str(e)) from None


def _read_input(path, as_bits: bool) -> BitString:
    data = Path(path).read_bytes()
    if not as_bits:
        return BitString.from_bytes(data)
    text = data.translate(None, b" \t\r\n").decode("ascii", "replace")
    try:
        return BitString(text)
    except ValueError:
        raise UsageError(f"{path}: expected 0/1 characters") from None


def _write_output(path, bits: BitString, adapter: int) -> None:
    if adapter == BYTES:
        if len(bits) % 8:
            raise DecodeError("decoded output is not a whole number of bytes")
        Path(path).write_bytes(bits.to_bytes())
    else:
        Path(path).write_text(str(bits) + "\n")


def _bit_budget(args) -> int:
    if args.k < 1:
        raise UsageError("--k must be positive")
    return args.k if args.bits else 8 * args.k


def _split(data: bytes) -> tuple[bytes, int]:
    if not data or data[-1] not in (BITS, BYTES):
        raise FormatError("missing adapter byte")
    return data[:-1], data[-1]


def _write_scripts(path, script: EditScript) -> None:
    with open(path, "w") as fh:
        for rec in script.to_records():
            fh.write(json.dumps(rec) + "\n")


def read_script(path) -> EditScript:
    with open(path) as fh:
        return EditScript.from_records(json.loads(line) for line in fh if line.strip())


# ---------------------------------------------------------------------------
# subcommands; each returns (exit code, summary dict)


def cmd_embed(args):
    from .cgk import embed

    x = _read_input(args.inp, args.bits)
    e = embed(x, _seed(args), args.walk)
    Path(args.out).write_text(str(e.image) + "\n")
    return 0, {"n": len(x), "image_bits": len(e.image), "truncated": e.truncated}


def _docx_config(args):
    from .docx import DocxConfig

    return DocxConfig(args.c1, args.c2, args.faithful)


def cmd_exchange_encode(args):
    from .docx import docx_encode

    s = _read_input(args.inp, args.bits)
    msg = docx_encode(s, _bit_budget(args), _seed(args), _docx_config(args))
    data = msg.to_bytes()
    Path(args.out).write_bytes(data + bytes([BITS if args.bits else BYTES]))
    return 0, {"n": len(s), "size_bits": 8 * len(data)}


def cmd_exchange_decode(args):
    from .docx import ExchangeMessage, docx_decode

    data, adapter = _split(Path(args.msg).read_bytes())
    msg = ExchangeMessage.from_bytes(data)
    t = _read_input(args.have, adapter == BITS)
    out = docx_decode(msg, t)
    _write_output(args.out, out, adapter)
    return 0, {"n": len(out), "size_bits": 8 * len(data)}


def _sketch_params(args, length: int):
    from .edsketch import SketchParams

    n = args.n or max(2, 1 << max(0, (length - 1).bit_length()))
    if n < length:
        raise UsageError(f"--n {n} is shorter than the input ({length} bits)")
    return SketchParams(n, _bit_budget(args), _seed(args), c_rho=args.c_rho, c_N=args.c_N)


def cmd_sketch(args):
    from .edsketch import sketch_encode

    x = _read_input(args.inp, args.bits)
    sk = sketch_encode(x, _sketch_params(args, len(x)), args.role)
    data = sk.to_bytes()
    Path(args.out).write_bytes(data + bytes([BITS if args.bits else BYTES]))
    return 0, {"n": sk.params.n, "K": sk.params.K, "rho": sk.params.rho, "size_bits": 8 * len(data)}


def cmd_sketch_compare(args):
    from .edsketch import EditSketch, sketch_decode

    (da, aa), (db, ab) = (_split(Path(p).read_bytes()) for p in (args.a, args.b))
    a, b = EditSketch.from_bytes(da), EditSketch.from_bytes(db)
    if a.params != b.params or aa != ab:
        raise UsageError("sketches were built with different parameters")
    res = sketch_decode(a, b)
    if args.emit_script:
        _write_scripts(args.emit_script, res.script)
    return 0, {"distance": res.distance, "walks_used": res.walks_used, "size_bits": 8 * (len(da) + len(db))}


def cmd_stream_ed(args):
    from .streaming import ChunkReader, sim_stream_ed, sim_stream_ed_with_script, std_stream_ed

    K = _bit_budget(args)
    chunk = max(1, args.chunk_bytes)
    readers = [ChunkReader.from_file(p, byte_mode=not args.bits, chunk_bytes=chunk) for p in (args.a, args.b)]
    if args.mode == "std":
        from .edsketch import SketchParams

        n = args.n
        if not n:
            n = max(_read_input(p, args.bits).__len__() for p in (args.a, args.b))
            n = max(2, 1 << max(0, (n - 1).bit_length()))
        res = std_stream_ed(*readers, SketchParams(n, K, _seed(args)))
        if args.script:
            _write_scripts(args.script, res.script)
        return 0, {"distance": res.distance, "mode": "std"}
    run = sim_stream_ed_with_script if args.script else sim_stream_ed
    res = run(*readers, K)
    if res.over_budget:
        return 2, {"distance": None, "mode": "sim", "error": f"edit distance exceeds {K}"}
    if args.script:
        _write_scripts(args.script, res.script)
    return 0, {"distance": res.distance, "mode": "sim", "peak_state_words": res.stats.peak_state_words}


def cmd_apply(args):
    x = _read_input(args.inp, args.bits)
    out = apply_script(x, read_script(args.script))
    _write_output(args.out, out, BITS if args.bits else BYTES)
    return 0, {"n": len(out)}


def cmd_bench(args):
    from .harness import run_suite

    rep = run_suite(args.suite, args.trials, args.master_seed, timings=not args.no_timings)
    if args.out:
        rep.write(args.out)
    else:
        sys.stdout.write(rep.to_csv())
    return 0, {"suite": args.suite, "rows": len(rep.rows), "aggregates": rep.aggregates()}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="editsync", description=__doc__.split("\n\n")[0])
    p.add_argument("--json", action="store_true", help="print a JSON summary line")
    sub = p.add_subparsers(dest="command", required=True)

    def common(q, seed=True, k=True):
        q.add_argument("--bits", action="store_true", help="inputs are 0/1 text files rather than bytes")
        q.add_argument("--json", action="store_true", default=argparse.SUPPRESS)
        if seed:
            q.add_argument("--seed", help="64 hex chars (default: $EDITSYNC_SEED)")
        if k:
            q.add_argument("--k", type=int, required=True, help="edit budget (in bytes unless --bits)")

    q = sub.add_parser("embed", help="write the CGK image of a file as 0/1 text")
    common(q, k=False)
    q.add_argument("--in", dest="inp", required=True)
    q.add_argument("--out", required=True)
    q.add_argument("--walk", default="0", help="walk label")
    q.set_defaults(func=cmd_embed)

    q = sub.add_parser("exchange-encode", help="one-way document exchange message for a file")
    common(q)
    q.add_argument("--in", dest="inp", required=True)
    q.add_argument("--out", required=True)
    q.add_argument("--c1", type=float, default=1.0)
    q.add_argument("--c2", type=float, default=1.0)
    q.add_argument("--faithful", action="store_true", help="use the asymptotic stopping rule")
    q.set_defaults(func=cmd_exchange_encode)

    q = sub.add_parser("exchange-decode", help="recover the sender's file from a message and a nearby file")
    q.add_argument("--json", action="store_true", default=argparse.SUPPRESS)
    q.add_argument("--msg", required=True)
    q.add_argument("--have", required=True)
    q.add_argument("--out", required=True)
    q.set_defaults(func=cmd_exchange_decode)

    q = sub.add_parser("sketch", help="edit-distance sketch of a file")
    common(q)
    q.add_argument("--in", dest="inp", required=True)
    q.add_argument("--out", required=True)
    q.add_argument("--n", type=int, default=0, help="length bound in bits (default: next power of two)")
    q.add_argument("--role", choices=("s", "t"), default="s")
    q.add_argument("--c-rho", dest="c_rho", type=float, default=1.0)
    q.add_argument("--c-N", dest="c_N", type=float, default=1.0)
    q.set_defaults(func=cmd_sketch)

    q = sub.add_parser("sketch-compare", help="edit distance and script from two sketches")
    q.add_argument("--json", action="store_true", default=argparse.SUPPRESS)
    q.add_argument("--a", required=True)
    q.add_argument("--b", required=True)
    q.add_argument("--emit-script", dest="emit_script", help="write the edit script (.es JSON lines)")
    q.set_defaults(func=cmd_sketch_compare)

    q = sub.add_parser("stream-ed", help="edit distance of two files read as streams")
    common(q)
    q.add_argument("--a", required=True)
    q.add_argument("--b", required=True)
    q.add_argument("--script", help="write the edit script (.es JSON lines)")
    q.add_argument("--mode", choices=("sim", "std"), default="sim")
    q.add_argument("--n", type=int, default=0, help="length bound for --mode std")
    q.add_argument("--chunk-bytes", dest="chunk_bytes", type=int, default=1 << 16)
    q.set_defaults(func=cmd_stream_ed)

    q = sub.add_parser("apply", help="apply an .es edit script to a file")
    common(q, seed=False, k=False)
    q.add_argument("--in", dest="inp", required=True)
    q.add_argument("--script", required=True)
    q.add_argument("--out", required=True)
    q.set_defaults(func=cmd_apply)

    q = sub.add_parser("bench", help="run an experiment suite")
    q.add_argument("--json", action="store_true", default=argparse.SUPPRESS)
    q.add_argument("--suite", required=True)
    q.add_argument("--out", help="report path (.csv or .json); default CSV on stdout")
    q.add_argument("--trials", type=int, default=5)
    q.add_argument("--master-seed", dest="master_seed", type=int, default=0)
    q.add_argument("--no-timings", dest="no_timings", action="store_true")
    q.set_defaults(func=cmd_bench)
    return p


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return 0 if e.code == 0 else 1
    t0 = time.perf_counter()
    try:
        code, summary = args.func(args)
    except (UsageError, FormatError, OSError, ValueError) as e:
        code, summary = 1, {"error": str(e)}
    except (DecodeError, EditsyncError) as e:
        code, summary = 2, {"error": str(e)}
    summary = {"schema": SCHEMA, "command": args.command, "exit": code, **summary,
               "seconds": round(time.perf_counter() - t0, 3)}
    if getattr(args, "json", False):
        print(json.dumps(summary))
    elif code:
        print(f"editsync {args.command}: {summary.get('error', 'failed')}", file=sys.stderr)
    elif "distance" in summary:
        print(summary["distance"])
    return code


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
