"""Command-line interface: ``hdivtest test|invert|simulate|bench|curve``.

Exit codes: 0 computed, 2 usage error, 3 data error, 4 degenerate statistic.
"""
from __future__ import annotations

import argparse
import contextlib
import json
import sys
import warnings
from dataclasses import replace

from . import io as hio
from .errors import DataError, DegenerateStatisticError
from .inference import GridSpec, invert, test_at
from .simulation import (
    EXAMPLE_IDS,
    critical_value_curve,
    default_threads,
    example_suite,
    run_suite,
    timing_benchmark,
)
from .statistics import Method

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DATA = 3
EXIT_DEGENERATE = 4


def _alpha(text):
    try:
        a = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid alpha {text!r}") from None
    if not 0 < a < 1:
        raise argparse.ArgumentTypeError(f"alpha must lie in (0, 1), got {a}")
    return a


def _method(text):
    try:
        return Method.parse(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _int_list(text):
    try:
        values = [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None
    if not values:
        raise argparse.ArgumentTypeError("empty list")
    return values


def _positive_int(text):
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return v


@contextlib.contextmanager
def _output(path):
    if path is None or path == "-":
        yield sys.stdout
    else:
        with open(path, "w", newline="") as fh:
            yield fh


def _add_data_args(p):
    p.add_argument("data", help="comma-separated file with Y, X and instrument columns")
    p.add_argument("--z-prefix", default="Z", help="instrument column prefix (default Z)")
    p.add_argument("--no-center", action="store_true", help="use the columns as they are")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hdivtest", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("test", help="test H0: beta = beta0")
    _add_data_args(p)
    p.add_argument("--beta0", type=float, required=True)
    p.add_argument("--method", type=_method, default=Method.FISHER)
    p.add_argument("--alpha", type=_alpha, default=0.05)
    p.add_argument("--gamma", type=float, help="ridge penalty (RJAR only)")
    p.add_argument("--out", help="also write the JSON record to this file")

    p = sub.add_parser("invert", help="confidence set by grid inversion")
    _add_data_args(p)
    p.add_argument("--method", type=_method, default=Method.FISHER)
    p.add_argument("--alpha", type=_alpha, default=0.05)
    p.add_argument("--gamma", type=float)
    p.add_argument("--grid-lo", type=float)
    p.add_argument("--grid-hi", type=float)
    p.add_argument("--grid-points", type=int, default=100)
    p.add_argument("--beta0", type=float, default=0.0, help="grid centre when no endpoints are given")
    p.add_argument("--out", help="per-point decision table (CSV); default stdout")
    p.add_argument("--summary", help="interval summary (JSON); default stderr")

    p = sub.add_parser("simulate", help="Monte Carlo rejection frequencies")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--example", choices=EXAMPLE_IDS, type=str.upper)
    src.add_argument("--config", help="JSON run configuration")
    p.add_argument("--reps", type=_positive_int)
    p.add_argument("--seed", type=int)
    p.add_argument("--methods", help="comma-separated subset of methods")
    p.add_argument("--gamma", type=float, help="ridge penalty for RJAR")
    p.add_argument("--threads", type=_positive_int, help="default from HDIVTEST_THREADS, else 1")
    p.add_argument("--out", help="output CSV (default stdout)")

    p = sub.add_parser("bench", help="JAR vs RJAR computation time")
    p.add_argument("--K", type=_int_list, default=[100, 200, 300])
    p.add_argument("--reps", type=_positive_int, default=100)
    p.add_argument("--n", type=_positive_int, default=200)
    p.add_argument("--gamma", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")

    p = sub.add_parser("curve", help="BCCH vs refined critical values of M")
    p.add_argument("--K", type=_int_list, default=list(range(100, 1001, 100)))
    p.add_argument("--alpha", type=_alpha, default=0.05)
    p.add_argument("--out")
    return parser


def _cmd_test(args, parser):
    if args.method is Method.RJAR and args.gamma is None:
        parser.error("--method RJAR requires --gamma")
    data = hio.load_dataset(args.data, center=not args.no_center, z_prefix=args.z_prefix)
    res = test_at(data, args.beta0, args.method, args.alpha, args.gamma)
    record = res.to_dict()
    record["beta0"] = args.beta0
    text = json.dumps(record, indent=2)
    print(text)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text + "\n")


def _cmd_invert(args, parser):
    if args.method is Method.RJAR and args.gamma is None:
        parser.error("--method RJAR requires --gamma")
    if (args.grid_lo is None) != (args.grid_hi is None):
        parser.error("give both --grid-lo and --grid-hi, or neither")
    try:
        grid = None if args.grid_lo is None else GridSpec(args.grid_lo, args.grid_hi, args.grid_points)
        if grid is None:
            grid = GridSpec(args.beta0 - 5.0, args.beta0 + 5.0, args.grid_points)
            print(
                f"warning: no grid endpoints given; using [{grid.lo}, {grid.hi}]",
                file=sys.stderr,
            )
    except ValueError as exc:
        parser.error(str(exc))
    data = hio.load_dataset(args.data, center=not args.no_center, z_prefix=args.z_prefix)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        cs = invert(data, grid, args.method, args.alpha, args.gamma)
    for w in caught:
        print(f"warning: {w.message}", file=sys.stderr)
    rows = [
        {"beta0": float(b), "statistic": float(s), "p_value": float(p), "status": st}
        for b, s, p, st in zip(cs.grid, cs.statistics, cs.p_values, cs.status)
    ]
    with _output(args.out) as fh:
        hio.write_rows(rows, fh, columns=["beta0", "statistic", "p_value", "status"])
    summary = json.dumps(cs.summary(), indent=2)
    if args.summary:
        with open(args.summary, "w") as fh:
            fh.write(summary + "\n")
    else:
        print(summary, file=sys.stderr)


def _cmd_simulate(args, parser):
    overrides = {}
    if args.reps is not None:
        overrides["replications"] = args.reps
    if args.seed is not None:
        overrides["master_seed"] = args.seed
    if args.gamma is not None:
        overrides["gamma"] = args.gamma
    if args.methods:
        try:
            overrides["methods"] = tuple(Method.parse(m) for m in args.methods.split(","))
        except ValueError as exc:
            parser.error(str(exc))
    try:
        if args.example:
            configs = example_suite(args.example, overrides)
        else:
            configs = [replace(c, **overrides) for c in hio.load_run_config(args.config)]
    except (ValueError, TypeError) as exc:
        parser.error(str(exc))
    threads = args.threads if args.threads is not None else default_threads()
    table = run_suite(configs, threads=threads)
    with _output(args.out) as fh:
        hio.write_rows(table.rows, fh)


def _cmd_bench(args, parser):
    rows = timing_benchmark(args.K, reps=args.reps, n=args.n, gamma=args.gamma, seed=args.seed)
    wide = {}
    for r in rows:
        wide.setdefault((r.K, r.sparsity), {})[r.method] = r.mean_seconds
    out = [
        {
            "K": K,
            "structure": sp,
            "rjar_seconds": t["RJAR"],
            "jar_seconds": t["JAR"],
            "jar_faster": t["JAR"] < t["RJAR"],
        }
        for (K, sp), t in wide.items()
    ]
    with _output(args.out) as fh:
        hio.write_rows(out, fh, columns=["K", "structure", "rjar_seconds", "jar_seconds", "jar_faster"])


def _cmd_curve(args, parser):
    try:
        rows = critical_value_curve(args.K, args.alpha)
    except ValueError as exc:
        parser.error(str(exc))
    with _output(args.out) as fh:
        hio.write_rows(rows, fh)


_COMMANDS = {
    "test": _cmd_test,
    "invert": _cmd_invert,
    "simulate": _cmd_simulate,
    "bench": _cmd_bench,
    "curve": _cmd_curve,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        _COMMANDS[args.command](args, parser)
    except DegenerateStatisticError as exc:
        print(f"error: degenerate statistic: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    except (DataError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
