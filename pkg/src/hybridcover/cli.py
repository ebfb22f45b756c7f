"""Command-line interface: solve, generate, bench and plot subcommands.

Exit codes: 0 solved to optimality, 2 limit reached with a feasible
incumbent, 3 input error, 4 capability/capacity error, 1 anything else.
All outputs go to explicitly named paths.
"""

from __future__ import annotations

import argparse
import re
import sys
from pathlib import Path

from .bench import aggregate_rows, aggregate_to_csv, rows_to_csv, run_benchmark
from .errors import CapabilityError, CapacityError, HybridCoverError, InputError
from .figures import benchmark_figure, emit_svg, figure_to_svg
from .geometry import L1, L2, LINF, NormSpec
from .instance_io import (
    emit_instance,
    emit_solution,
    generate_instance,
    instance_from_csv,
    parse_instance,
    parse_solution,
)
from .model import Instance
from .solvers import SolveOptions, brute_force, solve_bips, solve_bnc, solve_sequential

EXIT_OK = 0
EXIT_LIMIT = 2
EXIT_INPUT = 3
EXIT_CAPABILITY = 4


def parse_norm_token(token: str) -> NormSpec:
    t = token.strip()
    low = t.lower()
    if low == "l1":
        return L1
    if low == "l2":
        return L2
    if low in ("linf", "loo", "lmax"):
        return LINF
    match = re.fullmatch(r"lp\(?([0-9.]+)\)?", low)
    if match:
        return NormSpec("Lp", float(match.group(1))).canonical()
    raise InputError(f"cannot parse norm {token!r} (use L1, L2, LInf or Lp(tau))")


def _parse_order(text: str, instance: Instance) -> list[list[int]]:
    t1 = len(instance.discrete_types)
    t2 = len(instance.continuous_types)
    stages: list[list[int]] = []
    for part in text.split(">"):
        stage: list[int] = []
        for item in part.split(","):
            item = item.strip().lower()
            if not item:
                continue
            if item == "d":
                stage.extend(range(t1))
            elif item == "c":
                stage.extend(range(t1, t1 + t2))
            elif item.startswith("d"):
                stage.append(int(item[1:]))
            elif item.startswith("c"):
                stage.append(t1 + int(item[1:]))
            else:
                stage.append(int(item))
        if stage:
            stages.append(stage)
    if not stages:
        raise InputError(f"empty --order {text!r}")
    return stages


def _solve_options(args) -> SolveOptions:
    pool_eps = None
    if getattr(args, "pool_eps", None):
        pool_eps = tuple(float(v) for v in args.pool_eps.split(","))
    return SolveOptions(
        time_limit=args.time_limit,
        gap=args.gap,
        symmetry=args.symmetry == "on",
        pool_epsilons=pool_eps,
    )


def _add_solve_flags(sub):
    sub.add_argument("--time-limit", type=float, default=3600.0, help="seconds per solve")
    sub.add_argument("--gap", type=float, default=1e-6, help="relative gap tolerance")
    sub.add_argument("--symmetry", choices=("on", "off"), default="on",
                     help="slot symmetry-breaking chain")
    sub.add_argument("--pool-eps", default=None,
                     help="comma list of absolute clustering thresholds added to rho")


def cmd_solve(args) -> int:
    instance = parse_instance(Path(args.instance).read_text())
    options = _solve_options(args)
    if args.method == "bnc":
        report = solve_bnc(instance, options)
    elif args.method == "bips":
        report = solve_bips(instance, options)
    elif args.method == "brute":
        report = brute_force(instance, options)
    else:
        order = _parse_order(args.order, instance) if args.order else None
        report = solve_sequential(instance, order, options)
    print(
        f"{report.method}: status={report.status} objective={report.objective:g} "
        f"bound={report.bound:g} gap={report.gap:.3g} "
        f"nodes={report.stats.node_count} cuts={report.stats.cut_count} "
        f"time={report.stats.total_s:.2f}s"
    )
    if args.out:
        Path(args.out).write_text(emit_solution(report, instance))
        print(f"solution written to {args.out}")
    if args.figure:
        Path(args.figure).write_text(emit_svg(instance, report.solution))
        print(f"figure written to {args.figure}")
    if report.status == "optimal":
        return EXIT_OK
    if report.status in ("feasible", "limit"):
        return EXIT_LIMIT
    return 1


def _parse_type_flags(args):
    discrete = []
    for spec in args.discrete or []:
        parts = spec.split(":")
        if len(parts) != 2:
            raise InputError(f"--discrete wants COUNT:RADIUS, got {spec!r}")
        discrete.append((int(parts[0]), float(parts[1])))
    continuous = []
    for spec in args.continuous or []:
        parts = spec.split(":")
        if len(parts) not in (2, 3):
            raise InputError(f"--continuous wants COUNT:RADIUS[:NORM], got {spec!r}")
        norm = parse_norm_token(parts[2]) if len(parts) == 3 else L2
        continuous.append((int(parts[0]), float(parts[1]), norm))
    return discrete, continuous


def cmd_generate(args) -> int:
    discrete, continuous = _parse_type_flags(args)
    if not discrete and not continuous:
        discrete = [(2, 0.2)]
        continuous = [(2, 0.1, L2)]
    if args.from_csv:
        instance = instance_from_csv(
            Path(args.from_csv).read_text(), discrete, continuous,
            name=args.name or Path(args.from_csv).stem,
        )
    else:
        lo, hi = (float(v) for v in args.box.split(","))
        box = tuple((lo, hi) for _ in range(args.dim))
        instance = generate_instance(
            args.seed, args.n, box, discrete, continuous, name=args.name
        )
    Path(args.out).write_text(emit_instance(instance))
    print(f"instance '{instance.name}' ({instance.n} points) written to {args.out}")
    return EXIT_OK


def cmd_bench(args) -> int:
    instances = [parse_instance(Path(p).read_text()) for p in args.instance]
    methods = [m.strip() for m in args.methods.split(",") if m.strip()]
    options = SolveOptions(time_limit=args.time_limit, gap=args.gap)
    rows = run_benchmark(instances, methods, options, jobs=args.jobs)
    agg = aggregate_rows(rows)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "runs.csv").write_text(rows_to_csv(rows))
    (out_dir / "aggregate.csv").write_text(aggregate_to_csv(agg))
    (out_dir / "times.svg").write_text(figure_to_svg(benchmark_figure(agg)))
    unsolved = sum(1 for r in rows if r.status != "optimal")
    print(
        f"{len(rows)} runs ({unsolved} not solved to optimality); "
        f"results in {out_dir}/runs.csv, {out_dir}/aggregate.csv, {out_dir}/times.svg"
    )
    return EXIT_OK


def cmd_plot(args) -> int:
    instance = parse_instance(Path(args.instance).read_text())
    solution = None
    if args.solution:
        solution, _ = parse_solution(Path(args.solution).read_text(), instance)
    Path(args.out).write_text(emit_svg(instance, solution))
    print(f"figure written to {args.out}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hybridcover",
        description="Exact solvers for hybrid discrete/continuous maximal covering",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_solve = sub.add_parser("solve", help="solve one instance")
    p_solve.add_argument("--instance", required=True)
    p_solve.add_argument("--method", choices=("bnc", "bips", "seq", "brute"),
                         default="bnc")
    p_solve.add_argument("--order", default=None,
                         help="stage order for seq, e.g. 'd>c' or 'c>d'")
    p_solve.add_argument("--seed", type=int, default=None,
                         help="recorded for provenance; solves are deterministic")
    _add_solve_flags(p_solve)
    p_solve.add_argument("--out", default=None, help="solution document path")
    p_solve.add_argument("--figure", default=None, help="SVG figure path")
    p_solve.set_defaults(func=cmd_solve)

    p_gen = sub.add_parser("generate", help="generate or convert an instance")
    p_gen.add_argument("--seed", type=int, default=0)
    p_gen.add_argument("--n", type=int, default=50)
    p_gen.add_argument("--dim", type=int, default=2)
    p_gen.add_argument("--box", default="0,1", help="LO,HI per coordinate")
    p_gen.add_argument("--discrete", action="append", default=None,
                       metavar="COUNT:RADIUS")
    p_gen.add_argument("--continuous", action="append", default=None,
                       metavar="COUNT:RADIUS[:NORM]")
    p_gen.add_argument("--from-csv", default=None,
                       help="build demand from a x,y[,weight] CSV instead")
    p_gen.add_argument("--name", default=None)
    p_gen.add_argument("--out", required=True)
    p_gen.set_defaults(func=cmd_generate)

    p_bench = sub.add_parser("bench", help="run a benchmark grid")
    p_bench.add_argument("--instance", action="append", required=True)
    p_bench.add_argument("--methods", default="bnc,bips")
    p_bench.add_argument("--time-limit", type=float, default=600.0)
    p_bench.add_argument("--gap", type=float, default=1e-6)
    p_bench.add_argument("--jobs", type=int, default=1)
    p_bench.add_argument("--out-dir", required=True)
    p_bench.set_defaults(func=cmd_bench)

    p_plot = sub.add_parser("plot", help="render an instance/solution figure")
    p_plot.add_argument("--instance", required=True)
    p_plot.add_argument("--solution", default=None)
    p_plot.add_argument("--out", required=True)
    p_plot.set_defaults(func=cmd_plot)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except InputError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (CapabilityError, CapacityError) as exc:
        print(f"capability error: {exc}", file=sys.stderr)
        return EXIT_CAPABILITY
    except FileNotFoundError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except HybridCoverError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
