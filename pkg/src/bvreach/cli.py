"""Command line: encode, solve, check, selftest and bench."""

from __future__ import annotations

import argparse
import os
import sys
import time
from pathlib import Path

from . import dimspec, fixtures
from .bitblast import blast_system
from .dimspec import DimSpecError
from .encoder import dump_smt, dump_transitions, encode_program
from .engines import MAX_STEPS, TraceError, extract_trace, solve
from .mir import ParseError, format_program, parse
from .report import RunReport
from .statespace import build_state_space

EXIT_OK, EXIT_USAGE, EXIT_INPUT = 0, 1, 2
EXIT_CODES = {"sat": 10, "unsat": 20, "unknown": 30}
ENV_PREFIX = "BVREACH_"


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _engine_args(p):
    p.add_argument("--engine", choices=("inc", "ic3", "both"), default="both")
    p.add_argument("--max-steps", type=int, default=MAX_STEPS, metavar="N")
    p.add_argument("--timeout", type=float, default=600.0, metavar="S",
                   help="wall-clock budget in seconds")
    p.add_argument("--seed", type=int, default=0)


def _encode_args(p):
    p.add_argument("--return-check", action="store_true",
                   help="treat a nonzero return value as an error")
    p.add_argument("--dump-smt", action="store_true")
    p.add_argument("--dump-transitions", action="store_true")
    p.add_argument("--dump-state", action="store_true")


def build_parser():
    parser = _Parser(prog="bvreach", description="Error reachability for SSA integer programs.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    enc = sub.add_parser("encode", help="program -> DimSpec file")
    enc.add_argument("input")
    enc.add_argument("-o", "--output", help="DimSpec file (default: stdout)")
    _encode_args(enc)
    enc.add_argument("--export-dimacs", type=int, metavar="K",
                     help="also write the unrolled formula F_K as DIMACS")
    enc.add_argument("--dimacs-output", metavar="FILE",
                     help="where --export-dimacs writes (default: <output>.F<K>.cnf)")

    sol = sub.add_parser("solve", help="decide a DimSpec file")
    sol.add_argument("input")
    _engine_args(sol)

    chk = sub.add_parser("check", help="encode, solve and print a replayed trace")
    chk.add_argument("input")
    _engine_args(chk)
    _encode_args(chk)

    sub.add_parser("selftest", help="exhaustive small-width consistency checks")

    bench = sub.add_parser("bench", help="run programs and write report.tsv and cactus.png")
    bench.add_argument("inputs", nargs="*", help="program files (default: bundled fixtures)")
    bench.add_argument("--out", default="bench-out", help="output directory")
    bench.add_argument("--engines", default="inc,ic3")
    bench.add_argument("--max-steps", type=int, default=256, metavar="N")
    bench.add_argument("--timeout", type=float, default=60.0, metavar="S")
    return parser


def _apply_env(parser, environ):
    """Flags fall back to BVREACH_<FLAG> environment variables."""
    for action in parser._actions:
        if isinstance(action, argparse._SubParsersAction):
            for sp in action.choices.values():
                _apply_env(sp, environ)
            continue
        if not action.option_strings or action.dest == "help":
            continue
        key = ENV_PREFIX + action.dest.upper()
        if key not in environ:
            continue
        raw = environ[key]
        if isinstance(action, argparse._StoreTrueAction):
            value = raw.lower() in ("1", "true", "yes", "on")
        elif action.type is not None:
            try:
                value = action.type(raw)
            except ValueError:
                parser.error(f"bad value for {key}: {raw!r}")
        else:
            value = raw
        if action.choices is not None and value not in action.choices:
            parser.error(f"bad value for {key}: {raw!r}")
        action.default = value


def _read_program(path):
    text = Path(path).read_text()
    return parse(text)


def _encode(args, out):
    prog = _read_program(args.input)
    t0 = time.monotonic()
    space = build_state_space(prog)
    system = encode_program(prog, space, return_check=args.return_check)
    problem = blast_system(system)
    ms = int((time.monotonic() - t0) * 1000)
    if args.dump_state:
        out.write(space.dump())
    if args.dump_transitions:
        out.write(dump_transitions(system))
    if args.dump_smt:
        out.write(dump_smt(system))
    return prog, space, problem, ms


def cmd_encode(args, out=None) -> int:
    out = out or sys.stdout
    _, _, problem, _ = _encode(args, out)
    text = dimspec.write(problem)
    if args.output:
        Path(args.output).write_text(text)
    else:
        out.write(text)
    if args.export_dimacs is not None:
        k = args.export_dimacs
        target = args.dimacs_output or f"{args.output or 'problem'}.F{k}.cnf"
        nv, clauses = dimspec.unroll(problem, k)
        Path(target).write_text(dimspec.write_dimacs(nv, clauses))
    return EXIT_OK


def _print_report(out, verdict, name, encode_ms=0, clauses=0):
    rep = RunReport.from_verdict(verdict, input=name, encode_ms=encode_ms, clauses=clauses)
    out.write(rep.render())
    return EXIT_CODES[verdict.status]


def cmd_solve(args, out=None) -> int:
    out = out or sys.stdout
    problem = dimspec.read(Path(args.input).read_text())
    v = solve(problem, args.engine, args.max_steps, args.timeout, args.seed)
    return _print_report(out, v, args.input, clauses=problem.num_clauses())


def cmd_check(args, out=None) -> int:
    out = out or sys.stdout
    prog, space, problem, ms = _encode(args, out)
    v = solve(problem, args.engine, args.max_steps, args.timeout, args.seed)
    if v.status == "sat":
        trace = extract_trace(v, space, prog, return_check=args.return_check)
        for i, step in enumerate(trace):
            vals = " ".join(f"{k}={x}" for k, x in step.values.items())
            out.write(f"trace {i} {step.block} pred={step.pred}" + (f" {vals}" if vals else "")
                      + "\n")
    return _print_report(out, v, args.input, ms, problem.num_clauses())


def cmd_selftest(out=None, overflow=None) -> int:
    """Exhaustive small-width suites; ``overflow`` replaces the overflow builder (fault injection)."""
    out = out or sys.stdout
    from . import checks

    results = []
    for op in ("add", "sub", "mul", "sdiv"):
        for w in (4, 5):
            bad = checks.overflow_mismatches(op, w, overflow)
            results.append((f"overflow {op} i{w}", not bad))
    for op in checks.BV_OPS:
        results.append((f"blast {op} i4", not checks.blaster_mismatches(op, 4)))
    for pred in ("eq", "ne", "ugt", "uge", "ult", "ule", "sgt", "sge", "slt", "sle"):
        results.append((f"blast icmp {pred} i4", not checks.cmp_mismatches(pred, 4)))
    for name in fixtures.names():
        prog = parse(fixtures.load(name))
        same = parse(format_program(prog)) == prog
        text = dimspec.write(blast_system(encode_program(prog)))
        same_ds = dimspec.write(dimspec.read(text)) == text
        results.append((f"roundtrip {name}", same and same_ds))
    results.append(("sat random 3-cnf", not checks.sat_mismatches(100, seed=7)))
    failed = 0
    for name, ok in results:
        out.write(f"{'PASS' if ok else 'FAIL'} {name}\n")
        failed += not ok
    out.write(f"selftest: {len(results) - failed}/{len(results)} passed\n")
    return EXIT_OK if not failed else EXIT_USAGE


def cmd_bench(args, out=None) -> int:
    out = out or sys.stdout
    from .plotting import cactus

    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    if args.inputs:
        programs = [(Path(p).stem, Path(p).read_text()) for p in args.inputs]
    else:
        programs = [(n, fixtures.load(n)) for n in fixtures.names()
                    if n.startswith(("bug_", "safe_"))]
    engines = [e for e in args.engines.split(",") if e]
    rows, times = [], {e: [] for e in engines}
    for name, text in programs:
        problem = blast_system(encode_program(parse(text)))
        for eng in engines:
            v = solve(problem, eng, args.max_steps, args.timeout)
            secs = v.stats.get("time_ms", 0) / 1000
            rows.append((name, eng, v.status, "" if v.k is None else v.k,
                         v.stats.get("solves", 0), f"{secs:.3f}"))
            if v.status != "unknown":
                times[eng].append(secs)
    header = ("input", "engine", "ans", "k", "solves", "time_s")
    lines = ["\t".join(header)] + ["\t".join(map(str, r)) for r in rows]
    (outdir / "report.tsv").write_text("\n".join(lines) + "\n")
    cactus(times, outdir / "cactus.png")
    out.write("\n".join(lines) + "\n")
    out.write(f"wrote {outdir / 'report.tsv'} and {outdir / 'cactus.png'}\n")
    return EXIT_OK


def main(argv=None, environ=None) -> int:
    parser = build_parser()
    try:
        _apply_env(parser, os.environ if environ is None else environ)
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    try:
        if args.command == "encode":
            return cmd_encode(args)
        if args.command == "solve":
            return cmd_solve(args)
        if args.command == "check":
            return cmd_check(args)
        if args.command == "selftest":
            return cmd_selftest()
        return cmd_bench(args)
    except ParseError as exc:
        print(f"{args.input}:{exc}", file=sys.stderr)
        return EXIT_INPUT
    except DimSpecError as exc:
        print(f"{args.input}: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except OSError as exc:
        print(f"bvreach: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except TraceError as exc:
        print(f"bvreach: internal error: {exc}", file=sys.stderr)
        return EXIT_CODES["unknown"]


if __name__ == "__main__":
    sys.exit(main())
