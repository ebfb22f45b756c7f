"""Benchmark harness: run (instance, method) grids, collect per-run rows and
paper-style aggregate tables, and emit CSV plus a timing figure.

Aggregate time columns are averaged only over the runs solved to optimality;
the gap column averages over every run in the group.
"""

from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

from .errors import InputError
from .model import Instance
from .solvers import SolveOptions, brute_force, solve_bips, solve_bnc, solve_sequential

ROW_COLUMNS = [
    "instance", "n", "rho", "p", "method", "objective", "bound", "MIPGAP",
    "status", "Total", "Solving", "Prepr.", "Ctrs.Gen.", "Callback", "#Ctrs",
    "Cuts", "Nodes",
]

AGGREGATE_COLUMNS = [
    "n", "rho", "p", "method", "runs", "Total", "Solving", "Prepr.",
    "Ctrs.Gen.", "Callback", "MIPGAP", "#Unsolved", "#Ctrs",
]

METHODS = {
    "bnc": solve_bnc,
    "bips": solve_bips,
    "seq": solve_sequential,
    "brute": brute_force,
}


@dataclass
class BenchmarkRow:
    instance: str
    n: int
    rho: str  # all type radii, discrete|continuous
    p: str  # facility counts per type
    method: str
    objective: float
    bound: float
    gap: float
    status: str
    total_s: float
    solving_s: float
    preprocessing_s: float
    constraint_gen_s: float
    callback_s: float
    constraints: int
    cuts: int
    nodes: int

    def as_record(self) -> dict:
        return {
            "instance": self.instance,
            "n": self.n,
            "rho": self.rho,
            "p": self.p,
            "method": self.method,
            "objective": self.objective,
            "bound": self.bound,
            "MIPGAP": self.gap,
            "status": self.status,
            "Total": self.total_s,
            "Solving": self.solving_s,
            "Prepr.": self.preprocessing_s,
            "Ctrs.Gen.": self.constraint_gen_s,
            "Callback": self.callback_s,
            "#Ctrs": self.constraints,
            "Cuts": self.cuts,
            "Nodes": self.nodes,
        }


def _rho_label(instance: Instance) -> str:
    discrete = [
        "/".join(f"{r:g}" for r in sorted(set(spec.radii)))
        for spec in instance.discrete_types
    ]
    continuous = [f"{spec.radius:g}" for spec in instance.continuous_types]
    return ";".join(discrete + continuous)


def _p_label(instance: Instance) -> str:
    return ";".join(str(p) for p in instance.p_vector)


def _run_one(task) -> BenchmarkRow:
    instance, method, options = task
    try:
        report = METHODS[method](instance, options)
        stats = report.stats
        return BenchmarkRow(
            instance=instance.name,
            n=instance.n,
            rho=_rho_label(instance),
            p=_p_label(instance),
            method=method,
            objective=report.objective,
            bound=report.bound,
            gap=report.gap if math.isfinite(report.gap) else float("nan"),
            status=report.status,
            total_s=stats.total_s,
            solving_s=stats.solving_s,
            preprocessing_s=stats.preprocessing_s,
            constraint_gen_s=stats.constraint_gen_s,
            callback_s=stats.callback_s,
            constraints=stats.constraint_count,
            cuts=stats.cut_count,
            nodes=stats.node_count,
        )
    except Exception as exc:  # record the failure, never abort the batch
        return BenchmarkRow(
            instance=instance.name,
            n=instance.n,
            rho=_rho_label(instance),
            p=_p_label(instance),
            method=method,
            objective=float("nan"),
            bound=float("nan"),
            gap=float("nan"),
            status=f"error: {type(exc).__name__}",
            total_s=0.0,
            solving_s=0.0,
            preprocessing_s=0.0,
            constraint_gen_s=0.0,
            callback_s=0.0,
            constraints=0,
            cuts=0,
            nodes=0,
        )


def run_benchmark(
    instances: list[Instance],
    methods: list[str],
    options: SolveOptions | None = None,
    jobs: int = 1,
) -> list[BenchmarkRow]:
    """One row per (instance, method), in deterministic input order."""
    for m in methods:
        if m not in METHODS:
            raise InputError(f"unknown method {m!r}; choose from {sorted(METHODS)}")
    options = options or SolveOptions()
    tasks = [(inst, method, options) for inst in instances for method in methods]
    if jobs <= 1:
        return [_run_one(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(_run_one, tasks))


def rows_to_csv(rows: list[BenchmarkRow]) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=ROW_COLUMNS, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow(row.as_record())
    return buf.getvalue()


def aggregate_rows(rows: list[BenchmarkRow]) -> list[dict]:
    """Group rows by (n, rho, p, method); time columns average the solved
    runs only, the gap column averages everything in the group."""
    groups: dict[tuple, list[BenchmarkRow]] = {}
    for row in rows:
        groups.setdefault((row.n, row.rho, row.p, row.method), []).append(row)

    def mean(values) -> float:
        values = list(values)
        return sum(values) / len(values) if values else float("nan")

    out = []
    for key in sorted(groups):
        n, rho, p, method = key
        members = groups[key]
        solved = [r for r in members if r.status == "optimal"]
        out.append(
            {
                "n": n,
                "rho": rho,
                "p": p,
                "method": method,
                "runs": len(members),
                "Total": mean(r.total_s for r in solved),
                "Solving": mean(r.solving_s for r in solved),
                "Prepr.": mean(r.preprocessing_s for r in solved),
                "Ctrs.Gen.": mean(r.constraint_gen_s for r in solved),
                "Callback": mean(r.callback_s for r in solved),
                "MIPGAP": mean(0.0 if math.isnan(r.gap) else r.gap for r in members),
                "#Unsolved": len(members) - len(solved),
                "#Ctrs": mean(r.constraints for r in members),
            }
        )
    return out


def aggregate_to_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=AGGREGATE_COLUMNS, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow(row)
    return buf.getvalue()
