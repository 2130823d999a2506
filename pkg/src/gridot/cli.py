"""Command-line interface.

Exit codes: 0 success, 1 usage error, 2 I/O or parse error, 3 solver
error, 4 verification disagreement.
"""

from __future__ import annotations

import argparse
import sys
import time
from pathlib import Path

from .bench import ALLOW_ZEROS, INCREMENT_ALL, BenchConfig, run_bench
from .grid import balance, increment_all
from .io import MeasureFormatError, load_csv_measure, write_plan, write_stats
from .oracle import MAX_DENSE_PAIRS, oracle_solve
from .simplex import InfeasibleRestriction
from .solver import solve_dense, solve_multiscale

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_IO = 2
EXIT_SOLVER = 3
EXIT_DISAGREE = 4

# beyond this pair count `verify` skips the dense baseline (memory)
DENSE_VERIFY_BUDGET = 2**25


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        sys.exit(EXIT_USAGE)


def _build_parser() -> _Parser:
    p = _Parser(prog="gridot", description="Exact optimal transport on grids.")
    sub = p.add_subparsers(dest="command", required=True)

    ps = sub.add_parser("solve", help="solve one instance and print its cost")
    ps.add_argument("--mu", required=True, help="source measure CSV")
    ps.add_argument("--nu", required=True, help="target measure CSV")
    mode = ps.add_mutually_exclusive_group()
    mode.add_argument("--multiscale", action="store_true", help="coarse-to-fine (default)")
    mode.add_argument("--dense", action="store_true", help="start from the full neighborhood")
    ps.add_argument("--increment-all", action="store_true", help="add 1 to every mass first")
    ps.add_argument("--emit-plan", metavar="PATH", help="write the optimal plan")
    ps.add_argument("--emit-stats", metavar="PATH", help="write solve telemetry as JSON")

    pb = sub.add_parser("bench", help="run the pairwise benchmark sweep")
    pb.add_argument("--data", required=True, help="dataset directory (one subdir per category)")
    pb.add_argument("--dims", default="32,64,128", help="comma-separated grid extents")
    pb.add_argument("--reps", type=int, default=10, help="repetitions per pair")
    pb.add_argument("--out", required=True, help="output CSV path")
    pb.add_argument("--categories", help="comma-separated subset of categories")
    pb.add_argument("--increment-all", action="store_true", help="add 1 to every mass first")
    pb.add_argument("--workers", type=int, help="worker processes (default: GRIDOT_THREADS or CPUs)")

    pv = sub.add_parser("verify", help="cross-check multiscale, dense, and oracle costs")
    pv.add_argument("--mu", required=True)
    pv.add_argument("--nu", required=True)
    return p


def _load_instance(args):
    mu = load_csv_measure(args.mu)
    nu = load_csv_measure(args.nu)
    if getattr(args, "increment_all", False):
        mu = increment_all(mu)
        nu = increment_all(nu)
    return balance(mu, nu)


def _cmd_solve(args) -> int:
    try:
        inst = _load_instance(args)
    except (MeasureFormatError, OSError) as exc:
        print(f"gridot: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ValueError, OverflowError) as exc:
        print(f"gridot: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    try:
        w0 = time.perf_counter()
        c0 = time.process_time()
        sol = solve_dense(inst) if args.dense else solve_multiscale(inst)
        cpu_s = time.process_time() - c0
        wall_s = time.perf_counter() - w0
    except (InfeasibleRestriction, RuntimeError, ValueError, OverflowError, MemoryError) as exc:
        print(f"gridot: solver error: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    print(sol.cost)
    if args.emit_plan:
        write_plan(args.emit_plan, sol.plan)
    if args.emit_stats:
        write_stats(
            args.emit_stats,
            {
                "cost": sol.cost,
                "pivots": sol.stats.pivots,
                "arcs_scanned": sol.stats.arcs_scanned,
                "arc_replacements": sol.stats.arc_replacements,
                "outer_iterations": sol.stats.outer_iterations,
                "final_neighborhood_size": sol.final_neighborhood_size,
                "plan_entries": len(sol.plan),
                "cpu_seconds": cpu_s,
                "wall_seconds": wall_s,
            },
        )
    return EXIT_OK


def _cmd_bench(args) -> int:
    try:
        dims = [int(t) for t in args.dims.split(",") if t.strip()]
    except ValueError:
        print(f"gridot: bad --dims value {args.dims!r}", file=sys.stderr)
        return EXIT_USAGE
    categories = None
    if args.categories:
        categories = [c.strip() for c in args.categories.split(",") if c.strip()]
    try:
        cfg = BenchConfig(
            dataset_dir=Path(args.data),
            dims=dims,
            categories=categories,
            repetitions=args.reps,
            increment_mode=INCREMENT_ALL if args.increment_all else ALLOW_ZEROS,
            output_path=Path(args.out),
            workers=args.workers,
        )
    except ValueError as exc:
        print(f"gridot: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        records = run_bench(cfg)
    except (FileNotFoundError, MeasureFormatError, OSError) as exc:
        print(f"gridot: {exc}", file=sys.stderr)
        return EXIT_IO
    failures = sum(1 for r in records if r.error is not None)
    print(f"{len(records)} pairs, {failures} failures -> {args.out}")
    return EXIT_OK


def _cmd_verify(args) -> int:
    try:
        inst = _load_instance(args)
    except (MeasureFormatError, OSError) as exc:
        print(f"gridot: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ValueError, OverflowError) as exc:
        print(f"gridot: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    nx = inst.mu.shape.size
    ny = inst.nu.shape.size
    costs = {}
    try:
        costs["multiscale"] = solve_multiscale(inst).cost
        print(f"multiscale {costs['multiscale']}")
        if nx * ny <= DENSE_VERIFY_BUDGET:
            costs["dense"] = solve_dense(inst).cost
            print(f"dense {costs['dense']}")
        else:
            print("dense skipped (pair count beyond budget)")
        if nx * ny <= MAX_DENSE_PAIRS:
            costs["oracle"] = oracle_solve(inst)[0]
            print(f"oracle {costs['oracle']}")
        else:
            print("oracle skipped (pair count beyond budget)")
    except (InfeasibleRestriction, RuntimeError, ValueError, OverflowError, MemoryError) as exc:
        print(f"gridot: solver error: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    if len(set(costs.values())) == 1:
        print("AGREE")
        return EXIT_OK
    print("DISAGREE")
    return EXIT_DISAGREE


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    if args.command == "solve":
        return _cmd_solve(args)
    if args.command == "bench":
        return _cmd_bench(args)
    return _cmd_verify(args)


if __name__ == "__main__":
    sys.exit(main())
