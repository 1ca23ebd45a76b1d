"""Command-line interface: ``nnhankel {solve,check,gen,bench}``.

Exit codes: 0 success (either stage), 2 bad input or flags, 3 invalid
eigenpair, 4 solver non-convergence, 5 verification failure.
"""

import argparse
import sys

from . import io
from .errors import DimensionMismatch, InvalidEigenpair, MaxIterations
from .experiments import (
    ARBITRARY_KINDS,
    MODES,
    PLANTED,
    SweepConfig,
    iter_sweep,
    make_instance,
    csv_writer,
    summarize,
    write_record,
)
from .hankel import Eigenpair
from .pipeline import nearest_nonneg_hankel, verify_solution
from .solver import SolverConfig

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_EIGENPAIR = 3
EXIT_SOLVER = 4
EXIT_VERIFY = 5

FULL_SIZES = "10:300:10"


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_PARSE, f"{self.prog}: error: {message}\n")


def parse_sizes(spec):
    """``a:b:step`` -> ``range(a, b + 1, step)`` as a tuple (inclusive of ``b``)."""
    try:
        a, b, step = (int(v) for v in spec.split(":"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"sizes must look like a:b:step, got {spec!r}")
    if a < 1 or step < 1:
        raise argparse.ArgumentTypeError("sizes need a >= 1 and step >= 1")
    sizes = tuple(range(a, b + 1, step))
    if not sizes:
        raise argparse.ArgumentTypeError(f"empty size range {spec!r}")
    return sizes


def _positive_int(s):
    v = int(s)
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {s}")
    return v


def _seed(s):
    v = int(s)
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must be a 64-bit unsigned integer")
    return v


def _fraction(s):
    v = float(s)
    if not 0.0 <= v <= 1.0:
        raise argparse.ArgumentTypeError("fraction must lie in [0, 1]")
    return v


def build_parser():
    p = _Parser(prog="nnhankel", description="Nearest nonnegative Hankel matrix with a prescribed eigenpair.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("solve", help="solve one instance file")
    s.add_argument("input")
    s.add_argument("--tol", type=float, default=1e-8, help="relative feasibility tolerance")
    s.add_argument("--output", "-o", help="write the result JSON here")
    s.add_argument("--no-tiebreak", action="store_true",
                   help="report the raw residual minimizer instead of the minimum-norm one")

    c = sub.add_parser("check", help="verify a result file against its instance")
    c.add_argument("input")
    c.add_argument("result")

    g = sub.add_parser("gen", help="write a random instance file")
    g.add_argument("--n", type=_positive_int, required=True)
    g.add_argument("--seed", type=_seed, default=0)
    g.add_argument("--mode", choices=MODES, default=PLANTED)
    g.add_argument("--kind", choices=ARBITRARY_KINDS, default="complex",
                   help="distribution of arbitrary eigenpairs")
    g.add_argument("--output", "-o", required=True)

    b = sub.add_parser("bench", help="size sweep with CSV output")
    b.add_argument("--sizes", type=parse_sizes, default=None, help="a:b:step (default 10:100:10)")
    b.add_argument("--full", action="store_true", help=f"use sizes {FULL_SIZES}")
    b.add_argument("--trials", type=_positive_int, default=10)
    b.add_argument("--seed", type=_seed, default=0)
    b.add_argument("--planted-fraction", type=_fraction, default=0.5)
    b.add_argument("--kind", choices=ARBITRARY_KINDS, default="complex")
    b.add_argument("--workers", type=_positive_int, default=1)
    b.add_argument("--csv", required=True)
    return p


def cmd_solve(args):
    try:
        g, lam, x = io.read_instance(args.input)
    except (io.FileFormatError, OSError, DimensionMismatch) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_PARSE
    try:
        pair = Eigenpair(lam, x)
    except InvalidEigenpair as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_EIGENPAIR
    try:
        cfg = SolverConfig(tol_feas=args.tol)
    except ValueError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_PARSE
    try:
        res = nearest_nonneg_hankel(g, pair, cfg, tiebreak=not args.no_tiebreak)
    except MaxIterations as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_SOLVER
    if args.output:
        io.write_result(args.output, res)
    label = "exact eigenpair (stage A)" if res.stage == "A" else "residual minimization (stage B)"
    print(f"stage:          {res.stage}  {label}")
    print(f"||Delta H||_F:  {res.frob_norm:.7g}")
    print(f"eig residual:   {res.eig_residual:.7g}")
    return EXIT_OK


def cmd_check(args):
    try:
        g, lam, x = io.read_instance(args.input)
        res = io.read_result(args.result)
    except (io.FileFormatError, OSError, DimensionMismatch) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_PARSE
    if res.n != g.n:
        print(f"error: result has n = {res.n}, instance has n = {g.n}", file=sys.stderr)
        return EXIT_PARSE
    try:
        pair = Eigenpair(lam, x)
    except InvalidEigenpair as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_EIGENPAIR
    report = verify_solution(g, res, pair)
    for line in report.lines():
        print(line)
    return EXIT_OK if report.ok else EXIT_VERIFY


def cmd_gen(args):
    g, pair, _ = make_instance(args.n, args.mode, args.seed, args.kind)
    io.write_instance(args.output, g, pair)
    return EXIT_OK


def cmd_bench(args):
    sizes = parse_sizes(FULL_SIZES) if args.full else (args.sizes or tuple(range(10, 101, 10)))
    cfg = SweepConfig(
        sizes=sizes,
        trials_per_size=args.trials,
        base_seed=args.seed,
        planted_fraction=args.planted_fraction,
        arbitrary_kind=args.kind,
    )
    records = []
    with open(args.csv, "w", newline="", encoding="utf-8") as fh:
        writer = csv_writer(fh)
        try:
            for rec in iter_sweep(cfg, args.workers):
                write_record(writer, fh, rec)
                records.append(rec)
        except MaxIterations as e:
            print(f"error: {e}; partial CSV with {len(records)} rows written to {args.csv}",
                  file=sys.stderr)
            return EXIT_SOLVER
    print(summarize(records).table())
    return EXIT_OK


COMMANDS = {"solve": cmd_solve, "check": cmd_check, "gen": cmd_gen, "bench": cmd_bench}


def main(argv=None):
    args = build_parser().parse_args(argv)
    return COMMANDS[args.command](args)


if __name__ == "__main__":
    sys.exit(main())
