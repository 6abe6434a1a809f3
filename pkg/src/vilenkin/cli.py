"""Command-line entry point: ``vilenkin <subcommand> ...``.

Every subcommand also reads an optional INI file (``--config``) whose
section named after the subcommand mirrors the flags one-to-one; flags given
on the command line win.  Exit codes: 0 success, 1 usage, 2 numeric check
failed, 3 I/O.
"""
from __future__ import annotations

import argparse
import configparser
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .characters import KernelTag, kernel, vilenkin
from .core import CellFunction, build_base, max_cells, write_rows
from .norms import LOG_BASE, WeightFunction, weight_log_power, weight_one, weight_paper, weight_power
from .sharpness import CounterexampleSpec, InvariantBreach, counterexample, run_sweep
from .spectral import Spectrum, analyze, synthesize
from .summation import (
    CoefficientSequence,
    MeanTag,
    check_cond0,
    check_fn011,
    check_kachzcond1,
    check_kachzcond2,
    check_regularity,
    evaluate_mean,
)

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC, EXIT_IO = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


# ---- flag parsers ----

def parse_int_list(text: str) -> list[int]:
    try:
        return [int(t) for t in str(text).split(",") if t.strip()]
    except ValueError as exc:
        raise UsageError(f"expected a comma-separated integer list, got {text!r}") from exc


def parse_radices(spec: str, length: int) -> tuple[int, ...]:
    """walsh | cycle:2,3 | custom:2,3,4 (custom lists are used as given)."""
    kind, _, rest = spec.partition(":")
    if kind == "walsh":
        return (2,) * length
    if kind == "cycle":
        pattern = parse_int_list(rest)
        if not pattern:
            raise UsageError("--m cycle: needs at least one radix")
        return tuple(pattern[i % len(pattern)] for i in range(length))
    if kind == "custom":
        radices = tuple(parse_int_list(rest))
        if len(radices) < length:
            raise UsageError(f"--m custom: lists {len(radices)} radices, need {length}")
        return radices
    raise UsageError(f"unknown --m {spec!r} (walsh | cycle:a,b,... | custom:a,b,...)")


def make_base(m_spec: str, N: int | None):
    if N is None:
        raise UsageError("--N is required")
    try:
        return build_base(parse_radices(m_spec, N), N)
    except OverflowError as exc:
        raise UsageError(f"{exc} (set VILENKIN_MAX_CELLS to raise it, current {max_cells()})") from exc
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def parse_sequence(spec: str, monotonicity: str = "none") -> CoefficientSequence:
    kind, _, rest = spec.partition(":")
    try:
        if kind == "const":
            return CoefficientSequence.constant(float(rest) if rest else 1.0)
        if kind == "riesz":
            return CoefficientSequence.riesz()
        if kind == "powers":
            return CoefficientSequence.powers(float(rest))
        if kind == "cesaro":
            return CoefficientSequence.inverse_cesaro(float(rest))
        if kind == "v":
            return CoefficientSequence.v_alpha(float(rest))
        if kind == "file":
            return CoefficientSequence.from_file(rest, monotonicity)
    except ValueError as exc:
        raise UsageError(f"--q {spec!r}: {exc}") from exc
    raise UsageError(f"unknown --q {spec!r} (const[:c] | riesz | powers:b | cesaro:a | v:a | file:PATH)")


def parse_weight(spec: str, p: float | None) -> WeightFunction:
    kind, _, rest = spec.partition(":")
    try:
        if kind == "one":
            return weight_one()
        if kind == "paper":
            if p is None:
                raise UsageError("--phi paper needs --p")
            return weight_paper(p)
        if kind == "power":
            return weight_power(float(rest))
        if kind == "log2pow":
            return weight_log_power(float(rest))
        if kind == "file":
            table = np.loadtxt(rest, ndmin=1)

            def rule(n, table=table):
                idx = np.asarray(n, dtype=int) - 1
                if np.any(idx < 0) or np.any(idx >= table.size):
                    raise ValueError(f"weight file {rest} covers n = 1..{table.size} only")
                return table[idx]

            w = WeightFunction(rule, f"file:{rest}")
            if not w.is_nondecreasing(range(1, table.size + 1)):
                raise ValueError("weight file is not nondecreasing")
            return w
    except ValueError as exc:
        raise UsageError(f"--phi {spec!r}: {exc}") from exc
    raise UsageError(f"unknown --phi {spec!r} (one | paper | power:b | log2pow:e | file:PATH)")


def parse_function(spec: str | None, path: str | None, base) -> CellFunction:
    if path:
        return CellFunction.from_csv(base, path)
    spec = spec or "counterexample:1"
    kind, _, rest = spec.partition(":")
    try:
        n = int(rest)
        if kind == "counterexample":
            return counterexample(base, n)
        if kind == "dirichlet":
            return kernel(base, KernelTag("dirichlet", n))
        if kind == "vilenkin":
            return vilenkin(base, n)
    except ValueError as exc:
        raise UsageError(f"--f {spec!r}: {exc}") from exc
    raise UsageError(f"unknown --f {spec!r} (counterexample:k | dirichlet:n | vilenkin:n)")


# ---- parser ----

def _add_base(p):
    p.add_argument("--m", default="walsh", help="walsh | cycle:a,b,... | custom:a,b,...")
    p.add_argument("--N", type=int, default=None, help="resolution (number of digits)")


def build_parser() -> _Parser:
    parser = _Parser(prog="vilenkin", description="Fourier analysis on bounded Vilenkin groups.")
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("--config", default=None, help="INI file; section = subcommand")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    p = sub.add_parser("transform", help="cell values <-> Vilenkin-Fourier coefficients")
    _add_base(p)
    p.add_argument("--input", required=False, help="CSV (cell,re,im) or with --inverse (n,re,im)")
    p.add_argument("--out", default=None)
    p.add_argument("--inverse", action="store_true")

    p = sub.add_parser("kernels", help="Dirichlet or Fejer kernel values")
    _add_base(p)
    p.add_argument("--kind", choices=("dirichlet", "fejer"), default="dirichlet")
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--out", default=None)

    p = sub.add_parser("means", help="evaluate a summability mean at several indices")
    _add_base(p)
    p.add_argument("--mean", choices=("fejer", "cesaro", "u", "v", "riesz", "nlog", "b", "t", "norlund"), default="fejer")
    p.add_argument("--alpha", type=float, default=None)
    p.add_argument("--q", default="const")
    p.add_argument("--q-monotone", choices=("nondecreasing", "nonincreasing", "none"), default="none")
    p.add_argument("--n-list", default="1,2,4,8")
    p.add_argument("--f", default=None, help="counterexample:k | dirichlet:n | vilenkin:n")
    p.add_argument("--input", default=None, help="CSV of cell values (overrides --f)")
    p.add_argument("--paper-a0-zero", action="store_true", help="literal A_0 = 0 / A_n denominators")
    p.add_argument("--out", default=None)

    p = sub.add_parser("check-conditions", help="finite-range checks of the weight conditions")
    p.add_argument("--m", default="walsh")
    p.add_argument("--cond", choices=("regular", "cond0", "fn011", "k1", "k2"), required=False)
    p.add_argument("--q", default="const")
    p.add_argument("--q-monotone", choices=("nondecreasing", "nonincreasing", "none"), default="none")
    p.add_argument("--c", type=float, default=None)
    p.add_argument("--horizon", type=int, default=1024)
    p.add_argument("--ks", default="1,2,3")

    p = sub.add_parser("experiment", help="divergence-ratio sweep for part a) or b)")
    _add_base(p)
    p.add_argument("--part", choices=("a", "b"), required=False)
    p.add_argument("--p", type=float, default=None)
    p.add_argument("--q", default="const")
    p.add_argument("--q-monotone", choices=("nondecreasing", "nonincreasing", "none"), default="none")
    p.add_argument("--phi", default="one")
    p.add_argument("--ks", default="1,2,3")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", default=None)
    return parser


def _subparsers(parser: argparse.ArgumentParser) -> dict:
    for action in parser._actions:
        if isinstance(action, argparse._SubParsersAction):
            return action.choices
    return {}


def parse_config(argv: list[str] | None = None) -> argparse.Namespace:
    """Flags, optionally merged over a config-file section."""
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command is None:
        raise UsageError("missing subcommand (transform | kernels | means | check-conditions | experiment)")
    if args.config:
        cp = configparser.ConfigParser(interpolation=None)
        cp.optionxform = str  # keys mirror flags, and --N is upper case
        try:
            with open(args.config, encoding="utf-8") as fh:
                cp.read_file(fh)
        except configparser.Error as exc:
            raise UsageError(f"{args.config}: {exc}") from exc
        if cp.has_section(args.command):
            sub = _subparsers(parser)[args.command]
            known = {a.dest: a for a in sub._actions if a.dest != "help"}
            defaults = {}
            for key, raw in cp.items(args.command):
                dest = key.replace("-", "_")
                if dest not in known:
                    raise UsageError(f"{args.config}: unknown key {key!r} in [{args.command}]")
                action = known[dest]
                if isinstance(action, argparse._StoreTrueAction):
                    defaults[dest] = cp.getboolean(args.command, key)
                else:
                    value = action.type(raw) if action.type else raw
                    if action.choices and value not in action.choices:
                        raise UsageError(f"{args.config}: {key} must be one of {list(action.choices)}")
                    defaults[dest] = value
            sub.set_defaults(**defaults)
            args = parser.parse_args(argv)
    return args


# ---- artifacts ----

def _echo(args: argparse.Namespace, **extra) -> dict:
    out = {k: v for k, v in vars(args).items() if k != "config"}
    out.update(extra)
    out["log_base"] = LOG_BASE
    return out


def _sidecar(out: str | None, echo: dict) -> None:
    if out:
        path = Path(out).with_suffix(".json")
        path.write_text(json.dumps(echo, indent=2, sort_keys=True, default=str) + "\n", encoding="utf-8")


def _emit(header, rows, out):
    write_rows(header, rows, path=out)


# ---- subcommands ----

def cmd_transform(args) -> int:
    base = make_base(args.m, args.N)
    if not args.input:
        raise UsageError("transform needs --input")
    if args.inverse:
        synthesize(Spectrum.from_csv(base, args.input)).to_csv(path=args.out)
    else:
        analyze(CellFunction.from_csv(base, args.input)).to_csv(path=args.out)
    _sidecar(args.out, _echo(args, base=base.describe()))
    return EXIT_OK


def cmd_kernels(args) -> int:
    base = make_base(args.m, args.N)
    if args.n is None:
        raise UsageError("kernels needs --n")
    try:
        values = kernel(base, KernelTag(args.kind, args.n))
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    values.to_csv(path=args.out)
    _sidecar(args.out, _echo(args, base=base.describe()))
    return EXIT_OK


def cmd_means(args) -> int:
    base = make_base(args.m, args.N)
    f = parse_function(args.f, args.input, base)
    q = parse_sequence(args.q, args.q_monotone) if args.mean in ("t", "norlund", "b") else None
    if args.mean == "b" and q is not None and q.bound is None:
        raise UsageError("--mean b needs a bounded monotone --q (const or powers with b <= 0)")
    try:
        tag = MeanTag(args.mean, alpha=args.alpha, q=q, paper_literal=args.paper_a0_zero)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    ns = parse_int_list(args.n_list)
    bad = [n for n in ns if n < tag.min_index]
    if bad:
        raise UsageError(f"--mean {args.mean} needs n >= {tag.min_index}, got {bad}")
    s = analyze(f)
    rows = []
    for n in ns:
        try:
            vals = evaluate_mean(s, tag, n).values
        except ValueError as exc:
            raise UsageError(str(exc)) from exc
        rows.extend((n, i, v.real, v.imag) for i, v in enumerate(vals))
    _emit(("n", "cell", "re", "im"), rows, args.out)
    _sidecar(args.out, _echo(args, base=base.describe()))
    return EXIT_OK


def cmd_check_conditions(args) -> int:
    if args.cond is None:
        raise UsageError("check-conditions needs --cond")
    q = parse_sequence(args.q, args.q_monotone)
    try:
        if args.cond == "regular":
            report = check_regularity(q, args.horizon, 0.5 if args.c is None else args.c)
        else:
            if args.c is None:
                raise UsageError(f"--cond {args.cond} needs --c")
            if args.cond == "cond0":
                report = check_cond0(q, args.horizon, args.c)
            elif args.cond == "fn011":
                report = check_fn011(q, args.horizon, args.c)
            else:
                ks = parse_int_list(args.ks)
                if not ks or min(ks) < 1:
                    raise UsageError("--ks must list positive integers")
                length = 2 * max(ks) + 1
                base = build_base(parse_radices(args.m, length), 1)
                check = check_kachzcond1 if args.cond == "k1" else check_kachzcond2
                report = check(q, base, ks, args.c)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    print(report.summary())
    return EXIT_OK if report else EXIT_NUMERIC


def cmd_experiment(args) -> int:
    if args.part is None:
        raise UsageError("experiment needs --part")
    p = args.p
    if args.part == "a":
        if p is None:
            p = 0.5
        if p != 0.5:
            raise UsageError("part a requires p = 1/2")
    else:
        if p is None or not 0 < p < 0.5:
            raise UsageError("part b requires 0 < p < 1/2")
    base = make_base(args.m, args.N)
    q = parse_sequence(args.q, args.q_monotone)
    phi = parse_weight(args.phi, p)
    try:
        spec = CounterexampleSpec(base, tuple(parse_int_list(args.ks)), q, phi, p)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    report = run_sweep(spec, args.part, workers=args.workers)
    report.config["argv"] = _echo(args)
    if args.out:
        report.to_csv(args.out)
        report.to_json(Path(args.out).with_suffix(".json"))
    else:
        cols = list(report.rows[0].__dict__)
        write_rows(cols, ([getattr(r, c) for c in cols] for r in report.rows))
    report.check()
    return EXIT_OK


COMMANDS = {
    "transform": cmd_transform,
    "kernels": cmd_kernels,
    "means": cmd_means,
    "check-conditions": cmd_check_conditions,
    "experiment": cmd_experiment,
}


def main(argv: list[str] | None = None) -> int:
    try:
        args = parse_config(argv)
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"vilenkin: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except InvariantBreach as exc:
        print(f"vilenkin: invariant breach: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"vilenkin: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        # malformed input files surface here
        print(f"vilenkin: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
