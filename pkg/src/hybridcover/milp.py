"""Generic 0/1 linear maximization kernel with lazy cuts.

LP relaxations are delegated to HiGHS (through ``scipy.optimize.linprog``);
the branch-and-bound search, the cut bookkeeping and the callback protocol
live here.  Everything is deterministic: best-first node selection with
fixed tie-breaking, most-fractional branching with lowest-index ties, and
no wall-clock-dependent decision except the time limit itself.
"""

from __future__ import annotations

import heapq
import math
import time
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.optimize import linprog

from .errors import ContractError, InputError, SolverError

INT_TOL = 1e-6
OBJ_TOL = 1e-6
VIOLATION_TOL = 1e-9


@dataclass
class Variable:
    name: str
    lb: float
    ub: float
    integer: bool
    objective: float


@dataclass
class Constraint:
    coeffs: dict[int, float]  # variable index -> coefficient
    sense: str  # "<=", "==" or ">="
    rhs: float
    name: str = ""


class LinearModel:
    """A linear maximization model over bounded (mostly binary) variables."""

    def __init__(self):
        self.variables: list[Variable] = []
        self.constraints: list[Constraint] = []

    def add_variable(
        self,
        name: str = "",
        lb: float = 0.0,
        ub: float = 1.0,
        integer: bool = False,
        objective: float = 0.0,
    ) -> int:
        if not (math.isfinite(lb) and math.isfinite(ub) and math.isfinite(objective)):
            raise InputError(f"non-finite bounds/objective for variable {name!r}")
        if lb > ub:
            raise InputError(f"lb > ub for variable {name!r}")
        idx = len(self.variables)
        self.variables.append(Variable(name or f"v{idx}", lb, ub, integer, objective))
        return idx

    def add_binary(self, name: str = "", objective: float = 0.0) -> int:
        return self.add_variable(name, 0.0, 1.0, True, objective)

    def add_constraint(self, coeffs: dict[int, float], sense: str, rhs: float, name: str = "") -> int:
        if sense not in ("<=", "==", ">="):
            raise InputError(f"unknown constraint sense {sense!r}")
        nvars = len(self.variables)
        for j, c in coeffs.items():
            if not (0 <= j < nvars):
                raise InputError(f"constraint {name!r} references unknown variable {j}")
            if not math.isfinite(c):
                raise InputError(f"non-finite coefficient in constraint {name!r}")
        if not math.isfinite(rhs):
            raise InputError(f"non-finite rhs in constraint {name!r}")
        self.constraints.append(Constraint(dict(coeffs), sense, rhs, name))
        return len(self.constraints) - 1

    def objective_value(self, values) -> float:
        return float(sum(v.objective * x for v, x in zip(self.variables, values)))

    def integer_objective(self) -> bool:
        """True when every objective coefficient is (numerically) integral."""
        return all(abs(v.objective - round(v.objective)) < 1e-12 for v in self.variables)

    def to_lp_text(self) -> str:
        """Human-readable LP-format export, one constraint per line."""

        def term(c: float, name: str) -> str:
            return f"{c:+g} {name}"

        lines = ["maximize"]
        obj = " ".join(term(v.objective, v.name) for v in self.variables if v.objective != 0.0)
        lines.append(f"  obj: {obj if obj else '0'}")
        lines.append("subject to")
        for k, con in enumerate(self.constraints):
            lhs = " ".join(
                term(con.coeffs[j], self.variables[j].name) for j in sorted(con.coeffs)
            )
            lines.append(f"  {con.name or f'c{k}'}: {lhs} {con.sense} {con.rhs:g}")
        lines.append("bounds")
        for v in self.variables:
            lines.append(f"  {v.lb:g} <= {v.name} <= {v.ub:g}")
        integers = [v.name for v in self.variables if v.integer]
        if integers:
            lines.append("integer")
            lines.append("  " + " ".join(integers))
        lines.append("end")
        return "\n".join(lines) + "\n"


@dataclass
class SolveLimits:
    """Search limits; the defaults mirror a 1-hour budget per solve."""

    time_limit: float = 3600.0
    node_limit: int | None = None
    gap_tol: float = 1e-6
    int_tol: float = INT_TOL

    def __post_init__(self):
        if self.time_limit <= 0 or self.gap_tol <= 0 or self.int_tol <= 0:
            raise InputError("limits must be positive")
        if self.node_limit is not None and self.node_limit <= 0:
            raise InputError("node limit must be positive")


@dataclass
class LpResult:
    status: str  # "optimal" | "infeasible" | "unbounded"
    objective: float | None
    values: np.ndarray | None
    iterations: int


@dataclass
class BnBStats:
    nodes: int = 0
    lp_iterations: int = 0
    callback_calls: int = 0
    cuts_added: int = 0
    lp_time: float = 0.0
    callback_time: float = 0.0
    total_time: float = 0.0


@dataclass
class BnBResult:
    status: str  # "optimal" | "feasible" | "infeasible" | "limit"
    values: list[float] | None
    objective: float
    bound: float
    gap: float
    stats: BnBStats = field(default_factory=BnBStats)


class _LpBackend:
    """Caches the constraint matrices; rebuilt only when cuts are appended."""

    def __init__(self, model: LinearModel):
        self.model = model
        self._built_rows = -1
        self._cost = None
        self._a_ub = None
        self._b_ub = None
        self._a_eq = None
        self._b_eq = None

    def _build(self):
        model = self.model
        n = len(model.variables)
        self._cost = -np.array([v.objective for v in model.variables], dtype=float)
        ub_rows, ub_rhs, eq_rows, eq_rhs = [], [], [], []
        for con in model.constraints:
            if con.sense == "==":
                eq_rows.append(con)
                eq_rhs.append(con.rhs)
            else:
                flip = -1.0 if con.sense == ">=" else 1.0
                ub_rows.append((con, flip))
                ub_rhs.append(flip * con.rhs)

        def to_csr(rows, flips=None):
            data, ri, ci = [], [], []
            for r, entry in enumerate(rows):
                con, flip = entry if flips else (entry, 1.0)
                for j, c in con.coeffs.items():
                    ri.append(r)
                    ci.append(j)
                    data.append(flip * c)
            return sp.csr_matrix((data, (ri, ci)), shape=(len(rows), n))

        self._a_ub = to_csr(ub_rows, flips=True) if ub_rows else None
        self._b_ub = np.array(ub_rhs, dtype=float) if ub_rows else None
        self._a_eq = to_csr(eq_rows) if eq_rows else None
        self._b_eq = np.array(eq_rhs, dtype=float) if eq_rows else None
        self._built_rows = len(model.constraints)

    def solve(self, bounds: list[tuple[float, float]]) -> LpResult:
        if self._built_rows != len(self.model.constraints):
            self._build()
        res = linprog(
            self._cost,
            A_ub=self._a_ub,
            b_ub=self._b_ub,
            A_eq=self._a_eq,
            b_eq=self._b_eq,
            bounds=bounds,
            method="highs",
        )
        nit = int(getattr(res, "nit", 0) or 0)
        if res.status == 0:
            return LpResult("optimal", -float(res.fun), res.x, nit)
        if res.status == 2:
            return LpResult("infeasible", None, None, nit)
        if res.status == 3:
            return LpResult("unbounded", None, None, nit)
        raise SolverError(f"LP solve failed (status {res.status}): {res.message}")


def solve_lp(model: LinearModel) -> LpResult:
    """Solve the LP relaxation (integrality dropped, bounds kept)."""
    bounds = [(v.lb, v.ub) for v in model.variables]
    return _LpBackend(model).solve(bounds)


def _row_violated(con: Constraint, values) -> bool:
    lhs = sum(c * values[j] for j, c in con.coeffs.items())
    if con.sense == "<=":
        return lhs > con.rhs + VIOLATION_TOL
    if con.sense == ">=":
        return lhs < con.rhs - VIOLATION_TOL
    return abs(lhs - con.rhs) > VIOLATION_TOL


def branch_and_bound(
    model: LinearModel,
    callback=None,
    limits: SolveLimits | None = None,
) -> BnBResult:
    """Best-first branch-and-bound with an optional lazy-cut callback.

    The callback receives an integer-feasible candidate (a list of values,
    integer variables already rounded) and returns either a falsy value to
    accept it or a list of :class:`Constraint` cuts.  At least one returned
    cut must be violated by the candidate (otherwise the search could loop
    forever, so a :class:`ContractError` is raised); all returned cuts are
    added globally and the node is re-solved.
    """
    limits = limits or SolveLimits()
    start = time.perf_counter()
    stats = BnBStats()
    backend = _LpBackend(model)
    base_bounds = [(v.lb, v.ub) for v in model.variables]
    int_vars = [j for j, v in enumerate(model.variables) if v.integer]
    integral_obj = model.integer_objective()

    best_values: list[float] | None = None
    best_obj = -math.inf

    def out_of_budget() -> bool:
        if time.perf_counter() - start > limits.time_limit:
            return True
        return limits.node_limit is not None and stats.nodes >= limits.node_limit

    def prunable(bound: float) -> bool:
        if best_values is None:
            return False
        if bound <= best_obj + limits.gap_tol * max(abs(best_obj), 1.0):
            return True
        # Integer objectives admit floor pruning.
        return integral_obj and math.floor(bound + limits.int_tol) <= best_obj + OBJ_TOL

    # Heap entries: (-bound, depth, serial, {var: (lb, ub)})
    serial = 0
    heap: list[tuple[float, int, int, dict[int, tuple[float, float]]]] = []
    heapq.heappush(heap, (-math.inf, 0, serial, {}))
    hit_limit = False

    while heap:
        if out_of_budget():
            hit_limit = True
            break
        neg_bound, depth, _, overrides = heapq.heappop(heap)
        if prunable(-neg_bound):
            continue
        stats.nodes += 1
        bounds = list(base_bounds)
        for j, bd in overrides.items():
            bounds[j] = bd

        # Re-solve loop: stays on this node while the callback adds cuts.
        while True:
            t0 = time.perf_counter()
            lp = backend.solve(bounds)
            stats.lp_time += time.perf_counter() - t0
            stats.lp_iterations += lp.iterations
            if lp.status == "infeasible":
                break
            if lp.status == "unbounded":
                raise SolverError("relaxation is unbounded; a maximization over "
                                  "bounded variables should never be")
            node_bound = lp.objective
            if prunable(node_bound):
                break

            fractional = [
                (min(lp.values[j] - math.floor(lp.values[j]),
                     math.ceil(lp.values[j]) - lp.values[j]), j)
                for j in int_vars
                if abs(lp.values[j] - round(lp.values[j])) > limits.int_tol
            ]
            if fractional:
                frac, branch_var = max(fractional, key=lambda t: (t[0], -t[1]))
                val = lp.values[branch_var]
                lo, hi = bounds[branch_var]
                serial += 1
                down = dict(overrides)
                down[branch_var] = (lo, math.floor(val))
                heapq.heappush(heap, (-node_bound, depth + 1, serial, down))
                serial += 1
                up = dict(overrides)
                up[branch_var] = (math.ceil(val), hi)
                heapq.heappush(heap, (-node_bound, depth + 1, serial, up))
                break

            candidate = [
                float(round(lp.values[j])) if model.variables[j].integer else float(lp.values[j])
                for j in range(len(model.variables))
            ]
            if callback is not None:
                stats.callback_calls += 1
                t0 = time.perf_counter()
                cuts = callback(candidate)
                stats.callback_time += time.perf_counter() - t0
                if cuts:
                    if not any(_row_violated(c, candidate) for c in cuts):
                        raise ContractError(
                            "callback returned cuts but none is violated by the candidate"
                        )
                    for cut in cuts:
                        model.add_constraint(cut.coeffs, cut.sense, cut.rhs, cut.name)
                    stats.cuts_added += len(cuts)
                    continue  # matrices are rebuilt lazily; re-solve this node

            cand_obj = model.objective_value(candidate)
            if integral_obj and abs(cand_obj - round(cand_obj)) <= OBJ_TOL:
                cand_obj = float(round(cand_obj))
            if cand_obj > best_obj + 1e-12:
                best_obj = cand_obj
                best_values = candidate
            break

    open_bounds = [-entry[0] for entry in heap]
    if hit_limit and open_bounds:
        bound = max([best_obj] + open_bounds) if best_values is not None else max(open_bounds)
    else:
        bound = best_obj if best_values is not None else -math.inf

    if best_values is not None:
        gap = max(0.0, (bound - best_obj) / max(abs(best_obj), 1e-9))
    else:
        gap = math.inf

    if hit_limit:
        status = "feasible" if best_values is not None else "limit"
    else:
        status = "optimal" if best_values is not None else "infeasible"
    if status == "feasible" and gap <= limits.gap_tol:
        status = "optimal"

    stats.total_time = time.perf_counter() - start
    return BnBResult(
        status=status,
        values=best_values,
        objective=best_obj,
        bound=bound,
        gap=gap,
        stats=stats,
    )
