"""Command-line interface: ``python3 -m milnorsplit <command> ...``.

Exit codes: 0 success, 1 usage or parse error, 2 numerical instability.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from .errors import MilnorSplitError, NoSeedsFound, NumericInstability, ParseError
from .fields import Antipodal, HopfField, MapField, TangentJKField
from .invariants import lambda_rho, robust_hopf
from .polymap import parse_map
from .tracer import dump_curves, preimage
from .verify import format_table, run_identities, run_registry

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2

_NAMED_VALUES = {
    "i": (1.0, 0.0, 0.0), "j": (0.0, 1.0, 0.0), "k": (0.0, 0.0, 1.0),
    "-i": (-1.0, 0.0, 0.0), "-j": (0.0, -1.0, 0.0), "-k": (0.0, 0.0, -1.0),
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        sys.exit(EXIT_USAGE)


def parse_value(text: str) -> np.ndarray:
    """A point of S^2 from ``i``, ``-k`` etc. or ``px,py,pz`` (normalized)."""
    text = text.strip()
    if text in _NAMED_VALUES:
        return np.array(_NAMED_VALUES[text])
    try:
        v = np.array([float(t) for t in text.split(",")])
    except ValueError:
        raise UsageError(f"bad value {text!r}; use i, -i, j, ... or px,py,pz") from None
    if v.shape != (3,) or not np.linalg.norm(v) > 0:
        raise UsageError(f"bad value {text!r}; need three coordinates, not all zero")
    return v / np.linalg.norm(v)


def parse_point(text: str) -> np.ndarray:
    try:
        x = np.array([float(t) for t in text.split(",")])
    except ValueError:
        raise UsageError(f"bad point {text!r}; use x1,x2,x3,x4") from None
    if x.shape != (4,):
        raise UsageError(f"bad point {text!r}; need four coordinates")
    return x


def parse_eps(text: str):
    if text == "auto":
        return "auto"
    try:
        e = float(text)
    except ValueError:
        raise UsageError(f"bad radius {text!r}; use a positive number or auto") from None
    if not e > 0:
        raise UsageError("radius must be positive")
    return e


def _fixed_eps(args, default=0.1) -> float:
    e = parse_eps(args.eps)
    return default if e == "auto" else e


def _field(args):
    """The map S^3 -> S^2 selected by --field/--map and --side."""
    if args.field is not None:
        if args.field == "hopf":
            return HopfField()
        if args.field == "antipodal-hopf":
            return Antipodal(HopfField())
        if args.field == "tangent-jk":
            return TangentJKField(args.side)
        raise UsageError(f"unknown field {args.field!r}")
    if args.map is None:
        raise UsageError("give --field or --map")
    return MapField(parse_map(args.map), args.side, parse_point(args.at), _fixed_eps(args))


def format_report(report) -> str:
    d = report.as_dict()
    diag = d["diagnostics"]
    d["diagnostics"] = {k: diag[k] for k in sorted(diag)}
    return json.dumps(d, indent=2) + "\n"


def _emit(text: str, out: str | None):
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_compute(args) -> int:
    m = parse_map(args.map)
    report = lambda_rho(m, parse_point(args.at), parse_eps(args.eps), p=parse_value(args.p),
                        q=parse_value(args.q), seed=args.seed)
    _emit(format_report(report), args.out)
    return EXIT_OK


def cmd_verify(args) -> int:
    names = [args.entry] if args.entry else None
    rows = run_registry(names, seed=args.seed)
    if args.suite == "paper-examples":
        text = format_table(rows) + "\n"
        ok = all(r.passed for r in rows)
    else:
        checks = run_identities(rows, seed=args.seed)
        width = max(len(c.name) for c in checks)
        text = "\n".join(f"{c.name:<{width}}  {'PASS' if c.passed else 'FAIL'}  {c.detail}" for c in checks) + "\n"
        ok = all(c.passed for c in checks)
    _emit(text, args.out)
    return EXIT_OK if ok else EXIT_NUMERIC


def cmd_hopf(args) -> int:
    g = _field(args)
    h = robust_hopf(g, parse_value(args.p), parse_value(args.q), seed=args.seed)
    _emit(f"{h}\n", args.out)
    return EXIT_OK


def cmd_trace(args) -> int:
    g = _field(args)
    p = parse_value(args.value)
    kw = {"x": g.x, "eps": g.eps} if isinstance(g, MapField) else {}
    try:
        curves = preimage(g, p, seed=args.seed, **kw)
    except NoSeedsFound:
        curves = []
    if not curves:
        print("warning: empty preimage", file=sys.stderr)
    if args.dump:
        dump_curves(curves, args.dump, target=p)
    _emit(f"components: {len(curves)}\nvertices: {sum(len(c) for c in curves)}\n", args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="milnorsplit", description="Enhanced Milnor invariants lambda and rho.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, *, eps_default="auto"):
        sp.add_argument("--at", default="0,0,0,0", help="base point x1,x2,x3,x4")
        sp.add_argument("--eps", default=eps_default, help="sphere radius or 'auto'")
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--out", help="write output here instead of stdout")

    c = sub.add_parser("compute", help="lambda, rho and friends of a map at a point")
    c.add_argument("--map", required=True)
    c.add_argument("--p", default="i")
    c.add_argument("--q", default="-i")
    common(c)
    c.set_defaults(func=cmd_compute)

    v = sub.add_parser("verify", help="run the built-in example registry or identity checks")
    v.add_argument("--suite", choices=("paper-examples", "identities"), default="paper-examples")
    v.add_argument("--entry")
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--out")
    v.set_defaults(func=cmd_verify)

    for name, helptext in (("hopf", "Hopf invariant of a field"), ("trace", "trace preimage curves")):
        sp = sub.add_parser(name, help=helptext)
        src = sp.add_mutually_exclusive_group(required=True)
        src.add_argument("--field", choices=("hopf", "antipodal-hopf", "tangent-jk"))
        src.add_argument("--map")
        sp.add_argument("--side", choices=("l", "r"), default="l")
        common(sp, eps_default="0.1")
        if name == "hopf":
            sp.add_argument("--p", default="i")
            sp.add_argument("--q", default="-i")
            sp.set_defaults(func=cmd_hopf)
        else:
            sp.add_argument("--value", default="i")
            sp.add_argument("--dump")
            sp.set_defaults(func=cmd_trace)
    return parser


_VALUE_FLAGS = ("--value", "--p", "--q")


def _glue_negative_values(argv):
    # argparse would read "--value -i" as two options
    out, k = [], 0
    while k < len(argv):
        if argv[k] in _VALUE_FLAGS and k + 1 < len(argv) and argv[k + 1].startswith("-"):
            out.append(f"{argv[k]}={argv[k + 1]}")
            k += 2
        else:
            out.append(argv[k])
            k += 1
    return out


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    args = build_parser().parse_args(_glue_negative_values(argv))
    try:
        return args.func(args)
    except (UsageError, ParseError, KeyError, ValueError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"error: {msg}", file=sys.stderr)
        return EXIT_USAGE
    except NumericInstability as exc:
        print(f"numerical instability: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except MilnorSplitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
