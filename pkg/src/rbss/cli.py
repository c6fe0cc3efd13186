"""``rbss``: command-line front end.

Exit status: 0 on success, 1 when the computation has no positive answer
(undefined or diverging run, unknown search, refuted assertion), 2 for bad
arguments or unreadable input files.
"""

from __future__ import annotations

import argparse
import json
import random
import re
import sys
from fractions import Fraction
from pathlib import Path
from typing import Optional, Sequence

from .coding import decode, decode_seq, encode, encode_seq
from .formula import FormulaError, LiftingError, SearchBudget, eval_sigma, parse_formula
from .hf import HFParseError, format_hf, parse_hf
from .machine import MachineError, Output, Undefined, load_machine, result_to_json, run, trace, trace_to_json
from .paths import enumerate_paths, path_to_json
from .realparam import DigitStream, arith_check, eq_check, exp_cert, ln_bounds, ln_cert, xi
from .rinf import RInfinity
from .scalar import format_decimal, format_rational, parse_rational, parse_rational_list
from .translate import (
    TotalityError,
    format_function,
    format_presentation,
    graph_formula,
    structure_presentation,
)

__all__ = ["main", "build_parser"]


class UsageError(Exception):
    pass


def _rational(text: str) -> Fraction:
    try:
        return parse_rational(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _rationals(text: str) -> list[Fraction]:
    try:
        return parse_rational_list(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _fmt(q: Fraction, decimal: Optional[int]) -> str:
    return format_decimal(q, decimal) if decimal is not None else format_rational(q)


def _load(path: str):
    p = Path(path)
    if not p.is_file():
        raise UsageError(f"{path}: no such file")
    return load_machine(p)


def _read_text(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    p = Path(path)
    if not p.is_file():
        raise UsageError(f"{path}: no such file")
    return p.read_text(encoding="utf-8")


# ------------------------------------------------------------- commands


def cmd_run(args, out) -> int:
    m = _load(args.machine)
    res = run(m, args.input, args.fuel)
    if args.json:
        out.write(json.dumps(result_to_json(res)) + "\n")
    elif isinstance(res, Output):
        out.write(", ".join(_fmt(v, args.decimal) for v in res.values) + "\n")
    elif isinstance(res, Undefined):
        out.write(f"undefined: {res.reason}\n")
    else:
        out.write(f"diverged: no output within {res.fuel} steps\n")
    return 0 if isinstance(res, Output) else 1


def cmd_trace(args, out) -> int:
    m = _load(args.machine)
    tr = trace(m, args.input, args.fuel)
    if args.json:
        out.write(json.dumps(trace_to_json(m, tr)) + "\n")
    else:
        for k, c in enumerate(tr.steps):
            state = " ".join(f"{i}:{_fmt(c.state[i], args.decimal)}" for i in c.state.support())
            out.write(f"{k}\t{c.node}\t{state}\n")
        res = tr.result
        if isinstance(res, Output):
            out.write("output " + ", ".join(_fmt(v, args.decimal) for v in res.values) + "\n")
        elif isinstance(res, Undefined):
            out.write(f"undefined: {res.reason}\n")
        else:
            out.write(f"diverged: no output within {res.fuel} steps\n")
    return 0 if isinstance(tr.result, Output) else 1


def cmd_paths(args, out) -> int:
    m = _load(args.machine)
    paths = enumerate_paths(m, m.arity, args.depth, parallel=args.parallel)
    if args.json:
        out.write(json.dumps({"machine": m.name, "depth": args.depth, "paths": [path_to_json(p) for p in paths]}) + "\n")
        return 0
    for k, p in enumerate(paths):
        out.write(f"path {k}: {' -> '.join(p.node_sequence)}\n")
        for c in p.conditions:
            rel = {"ge0": ">= 0", "lt0": "< 0", "ne0": "!= 0"}[c.kind]
            out.write(f"  if ({c.num}) / ({c.den}) {rel}   [{c.node}]\n")
        out.write("  out " + ", ".join(str(f) for f in p.outputs) + "\n")
    return 0


def cmd_compile(args, out) -> int:
    if all("=" in a for a in args.machines) and args.machines:
        machines = {}
        for spec in args.machines:
            name, _, path = spec.partition("=")
            machines[name] = _load(path)
        out.write(format_presentation(structure_presentation(machines)))
        return 0
    if len(args.machines) != 1:
        raise UsageError("give one machine file, or NAME=FILE pairs including universe=FILE")
    m = _load(args.machines[0])
    d = graph_formula(m, total=args.total, want_cograph=args.cograph)
    if not args.cograph:
        d.cograph = None
    out.write(format_function(d))
    return 0


def _budget(args) -> SearchBudget:
    pool = args.pool if args.pool is not None else (0, 1, -1, 2)
    return SearchBudget(max_witnesses=args.budget, atom_pool=pool, max_rank=args.rank)


def cmd_eval(args, out) -> int:
    try:
        f = parse_formula(_read_text(args.formula))
        env = {}
        for b in args.bind:
            name, eq, text = b.partition("=")
            if not eq or not name:
                raise UsageError(f"--bind expects NAME=HF, got {b!r}")
            env[name] = parse_hf(text)
    except (FormulaError, HFParseError) as exc:
        raise UsageError(str(exc)) from None
    try:
        res = eval_sigma(f, env, _budget(args))
    except LiftingError as exc:
        out.write(f"error: {exc}\n")
        return 1
    out.write(res.status + "\n")
    if res:
        for path, (var, ws) in sorted(res.witnesses.items()):
            out.write(f"  {var} := " + ", ".join(format_hf(w) for w in ws) + "\n")
    return 0 if res else 1


def cmd_encode(args, out) -> int:
    v = RInfinity({args.offset + k: q for k, q in enumerate(args.input)})
    out.write(format_hf(encode_seq(v) if args.flat else encode(v)) + "\n")
    return 0


def cmd_decode(args, out) -> int:
    try:
        s = parse_hf(args.code if args.code is not None else sys.stdin.read())
    except HFParseError as exc:
        raise UsageError(str(exc)) from None
    v = decode_seq(s) if args.flat else decode(s)
    if v is None:
        out.write("not a code\n")
        return 1
    out.write(" ".join(f"{i}:{_fmt(v[i], args.decimal)}" for i in v.support()) + "\n")
    return 0


def _enclosure_text(enc, args) -> str:
    return enc.decimal(args.decimal) if args.decimal is not None else str(enc)


def cmd_ln(args, out) -> int:
    if args.x is None:
        raise UsageError("ln needs --x")
    if args.n is not None:
        if args.eps is not None:
            raise UsageError("give either --n or --eps")
        if args.x <= 1:
            raise UsageError("--n applies to x > 1; use --eps otherwise")
        enc = ln_bounds(args.x, args.n)
    else:
        if args.x <= 0:
            raise UsageError("ln needs x > 0")
        enc = ln_cert(args.x, args.eps if args.eps is not None else Fraction(1, 10**6))
    out.write(_enclosure_text(enc, args) + "\n")
    return 0


def cmd_exp(args, out) -> int:
    if args.x is None:
        raise UsageError("exp needs --x")
    enc = exp_cert(args.x, args.eps if args.eps is not None else Fraction(1, 10**6))
    out.write(_enclosure_text(enc, args) + "\n")
    return 0


def _stream(text: str) -> DigitStream:
    if text.startswith("nines:"):
        return DigitStream.nines(parse_rational(text[6:]))
    return xi(parse_rational(text))


def cmd_check(args, out) -> int:
    need = 2 if args.relation == "eq" else 3
    if len(args.values) != need:
        raise UsageError(f"{args.relation} takes {need} values")
    try:
        streams = [_stream(v) for v in args.values]
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if args.relation == "eq":
        verdict = eq_check(*streams, args.n)
    else:
        verdict = arith_check(args.relation, *streams, args.n)
    out.write(str(verdict) + "\n")
    return 1 if args.assert_ and not verdict.consistent else 0


# --------------------------------------------------------------- parser


class _Parser(argparse.ArgumentParser):
    def __init__(self, *args, **kwargs):
        super().__init__(*args, **kwargs)
        # let "-1/2" and "-1,3" through as values, not as unknown options
        self._negative_number_matcher = re.compile(r"^-\.?\d")

    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="seed for any randomized sampling")
    common.add_argument("--decimal", type=int, metavar="K", help="show K decimal digits instead of p/q")
    common.add_argument("--json", action="store_true", help="machine-readable output where supported")

    p = _Parser(prog="rbss", description="Exact BSS machines, HF(R) formulas and certified real checks.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def machine_cmd(name, help_text):
        s = sub.add_parser(name, parents=[common], help=help_text)
        s.add_argument("machine", help="machine file (.bssm)")
        return s

    s = machine_cmd("run", "run a machine on an input tuple")
    s.add_argument("--input", type=_rationals, default=[], help='comma-separated rationals, e.g. "1/2,3"')
    s.add_argument("--fuel", type=int, default=10_000)
    s.set_defaults(func=cmd_run)

    s = machine_cmd("trace", "print every configuration of a run")
    s.add_argument("--input", type=_rationals, default=[])
    s.add_argument("--fuel", type=int, default=10_000)
    s.set_defaults(func=cmd_trace)

    s = machine_cmd("paths", "symbolic paths up to a depth")
    s.add_argument("--depth", type=int, default=20)
    s.add_argument("--parallel", action="store_true")
    s.set_defaults(func=cmd_paths)

    s = sub.add_parser("compile-sigma", parents=[common], help="Σ graph formula of a machine, or a structure presentation")
    s.add_argument("machines", nargs="+", help="FILE, or NAME=FILE pairs with universe=FILE")
    s.add_argument("--total", action="store_true", help="declare the machine total")
    s.add_argument("--cograph", action="store_true", help="also emit the complement formula")
    s.set_defaults(func=cmd_compile)

    s = sub.add_parser("eval", parents=[common], help="semidecide a Σ formula by witness search")
    s.add_argument("formula", help="formula file (.sexp) or - for stdin")
    s.add_argument("--bind", action="append", default=[], metavar="NAME=HF")
    s.add_argument("--budget", type=int, default=2000)
    s.add_argument("--pool", type=_rationals)
    s.add_argument("--rank", type=int, default=2)
    s.set_defaults(func=cmd_eval)

    s = sub.add_parser("encode", parents=[common], help="HF code of a vector")
    s.add_argument("--input", type=_rationals, required=True, help="values at consecutive indices")
    s.add_argument("--offset", type=int, default=0, help="index of the first value")
    s.add_argument("--flat", action="store_true", help="set of entries instead of the tree code")
    s.set_defaults(func=cmd_encode)

    s = sub.add_parser("decode", parents=[common], help="vector of an HF code")
    s.add_argument("code", nargs="?", help="HF text (read from stdin when absent)")
    s.add_argument("--flat", action="store_true")
    s.set_defaults(func=cmd_decode)

    s = sub.add_parser("ln", parents=[common], help="Riemann-sum enclosure of ln x")
    s.add_argument("--x", type=_rational)
    s.add_argument("--n", type=int)
    s.add_argument("--eps", type=_rational)
    s.set_defaults(func=cmd_ln)

    s = sub.add_parser("exp", parents=[common], help="certified enclosure of e^x")
    s.add_argument("--x", type=_rational)
    s.add_argument("--eps", type=_rational)
    s.set_defaults(func=cmd_exp)

    s = sub.add_parser("check", parents=[common], help="stage check of x = y, x + y = z or x * y = z")
    s.add_argument("relation", choices=["eq", "add", "mul"])
    s.add_argument("values", nargs="+", help="rationals, or nines:q for the expansion ending in 9s")
    s.add_argument("--n", type=int, default=10)
    s.add_argument("--assert", dest="assert_", action="store_true", help="exit 1 when refuted")
    s.set_defaults(func=cmd_check)
    return p


def main(argv: Optional[Sequence[str]] = None, out=None) -> int:
    out = out or sys.stdout
    try:
        args = build_parser().parse_args(argv)
        random.seed(args.seed)
        return args.func(args, out)
    except UsageError as exc:
        sys.stderr.write(f"{exc}\n")
        return 2
    except MachineError as exc:
        sys.stderr.write(f"invalid machine:\n{exc}\n")
        return 2
    except TotalityError as exc:
        sys.stderr.write(f"{exc}\n")
        return 2
    except (ValueError, ZeroDivisionError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 2


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
