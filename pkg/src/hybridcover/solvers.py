"""End-to-end solvers: the lazy branch-and-cut path, the candidate-set path,
sequential baselines, center recovery and an exhaustive oracle.

All solvers return a :class:`SolveReport` whose solution has been re-checked
geometrically by :func:`hybridcover.model.evaluate`.
"""

from __future__ import annotations

import itertools
import math
import time
from dataclasses import dataclass, field, replace

from .errors import CapabilityError, CapacityError, ContractError, InputError
from .geometry import Point
from .milp import SolveLimits, branch_and_bound
from .model import (
    Assignment,
    Cut,
    Instance,
    Solution,
    assignment_from_facilities,
    build_bips,
    build_bips_ip,
    build_incomplete_ip,
    evaluate,
    separation_supported,
)
from .separation import (
    ORIGIN_CALLBACK,
    CutPool,
    certify_cluster,
    filter_dominated,
    initial_cut_pool,
    merge_pools,
    separate,
    two_wise_cuts,
)

BRUTE_FORCE_GUARD = 10**7


@dataclass
class SolveOptions:
    time_limit: float = 3600.0
    gap: float = 1e-6
    node_limit: int | None = None
    symmetry: bool = True
    pool_epsilons: tuple[float, ...] | None = None  # absolute; default scales with rho

    def limits(self) -> SolveLimits:
        return SolveLimits(self.time_limit, self.node_limit, self.gap)


@dataclass
class SolveStats:
    total_s: float = 0.0
    solving_s: float = 0.0
    preprocessing_s: float = 0.0
    constraint_gen_s: float = 0.0
    callback_s: float = 0.0
    constraint_count: int = 0
    cut_count: int = 0
    node_count: int = 0
    callback_calls: int = 0
    lp_iterations: int = 0


@dataclass
class SolveReport:
    method: str
    solution: Solution
    status: str  # "optimal" | "feasible" | "limit" | "infeasible"
    objective: float
    bound: float
    gap: float
    stats: SolveStats = field(default_factory=SolveStats)
    cuts: tuple[Cut, ...] = ()


def recover_centers(instance: Instance, assignment: Assignment) -> list[list[Point]]:
    """One center per continuous slot: the enclosing-ball center of the
    slot's cluster (inside the common ball intersection since the radius is
    within rho); empty slots sit on the first demand point."""
    centers: list[list[Point]] = []
    for t in range(len(instance.continuous_types)):
        per_type: list[Point] = []
        for k in range(len(assignment.continuous_cover[t])):
            members = assignment.cluster(t, k)
            if not members:
                per_type.append(instance.points[0])
                continue
            cert = certify_cluster(instance, t, members)
            if not cert.feasible:
                raise ContractError(
                    f"cluster of slot ({t},{k}) is infeasible; separation failed upstream"
                )
            per_type.append(cert.center)
        centers.append(per_type)
    return centers


def _fallback_assignment(instance: Instance) -> Assignment:
    asg = Assignment.empty(instance)
    asg.open_sites = [list(range(spec.count)) for spec in instance.discrete_types]
    return asg


def solve_bnc(instance: Instance, options: SolveOptions | None = None) -> SolveReport:
    """Branch-and-cut over the incomplete formulation: pairwise cuts and a
    clustering-seeded pool upfront, cluster validation as a lazy callback."""
    options = options or SolveOptions()
    for t, spec in enumerate(instance.continuous_types):
        if not separation_supported(spec.norm, instance.dimension):
            raise CapabilityError(
                f"continuous type {t}: separation unsupported for "
                f"{spec.norm.label()} in dimension {instance.dimension}"
            )
    t0 = time.perf_counter()

    pools = []
    for t in range(len(instance.continuous_types)):
        pools.append(two_wise_cuts(instance, t))
        pools.append(initial_cut_pool(instance, t, options.pool_epsilons))
    pool = filter_dominated(merge_pools(*pools)) if pools else CutPool()
    pool_cuts = [c for c in pool.sorted_cuts() if len(c.members) > 2]
    t1 = time.perf_counter()

    ip = build_incomplete_ip(instance, pool_cuts, symmetry=options.symmetry)
    t2 = time.perf_counter()

    registered = {(c.type_index, c.members) for c in ip.pairwise_cuts + ip.pool_cuts}
    callback_cuts: list[Cut] = []

    def callback(values):
        asg = ip.assignment_from_values(values)
        found = separate(asg, instance)
        fresh = [c for c in found if (c.type_index, c.members) not in registered]
        if found and not fresh:
            raise ContractError("separation re-emitted cuts already in the model")
        rows = []
        for cut in fresh:
            registered.add((cut.type_index, cut.members))
            callback_cuts.append(cut)
            rows.extend(ip.cut_rows(cut))
        return rows

    bnb = branch_and_bound(ip.model, callback, options.limits())

    if bnb.values is not None:
        asg = ip.assignment_from_values(bnb.values)
    else:
        asg = _fallback_assignment(instance)
    centers = recover_centers(instance, asg)
    report_eval = evaluate(instance, Solution(asg, centers, 0.0))
    solution = Solution(asg, centers, report_eval.objective)

    all_cuts = tuple(ip.pairwise_cuts) + tuple(ip.pool_cuts) + tuple(callback_cuts)
    stats = SolveStats(
        total_s=time.perf_counter() - t0,
        solving_s=bnb.stats.total_time - bnb.stats.callback_time,
        preprocessing_s=t1 - t0,
        constraint_gen_s=t2 - t1,
        callback_s=bnb.stats.callback_time,
        constraint_count=len(ip.model.constraints),
        cut_count=len(all_cuts),
        node_count=bnb.stats.nodes,
        callback_calls=bnb.stats.callback_calls,
        lp_iterations=bnb.stats.lp_iterations,
    )
    bound = bnb.bound if bnb.values is not None else max(bnb.bound, solution.objective)
    return SolveReport(
        method="bnc",
        solution=solution,
        status=bnb.status,
        objective=solution.objective,
        bound=bound,
        gap=bnb.gap if math.isfinite(bnb.gap) else math.inf,
        stats=stats,
        cuts=all_cuts,
    )


def solve_bips(instance: Instance, options: SolveOptions | None = None) -> SolveReport:
    """Solve over the finite candidate set (demand points plus circle-boundary
    intersections); no lazy cuts are needed."""
    options = options or SolveOptions()
    t0 = time.perf_counter()
    candidates = [build_bips(instance, t) for t in range(len(instance.continuous_types))]
    t1 = time.perf_counter()
    ip = build_bips_ip(instance, candidates)
    t2 = time.perf_counter()
    bnb = branch_and_bound(ip.model, None, options.limits())
    t3 = time.perf_counter()

    if bnb.values is not None:
        open_sites, centers = ip.facilities_from_values(bnb.values)
    else:
        open_sites = [list(range(spec.count)) for spec in instance.discrete_types]
        centers = [
            [instance.points[0]] * spec.count for spec in instance.continuous_types
        ]
    asg = assignment_from_facilities(instance, open_sites, centers)
    report_eval = evaluate(instance, Solution(asg, centers, 0.0))
    solution = Solution(asg, centers, report_eval.objective)

    stats = SolveStats(
        total_s=time.perf_counter() - t0,
        solving_s=t3 - t2,
        preprocessing_s=t1 - t0,
        constraint_gen_s=t2 - t1,
        callback_s=0.0,
        constraint_count=len(ip.model.constraints),
        cut_count=0,
        node_count=bnb.stats.nodes,
        callback_calls=0,
        lp_iterations=bnb.stats.lp_iterations,
    )
    bound = bnb.bound if bnb.values is not None else max(bnb.bound, solution.objective)
    return SolveReport(
        method="bips",
        solution=solution,
        status=bnb.status,
        objective=solution.objective,
        bound=bound,
        gap=bnb.gap if math.isfinite(bnb.gap) else math.inf,
        stats=stats,
    )


def default_order(instance: Instance) -> list[list[int]]:
    """Discrete types first, then continuous types (global type indices)."""
    t1 = len(instance.discrete_types)
    t2 = len(instance.continuous_types)
    stages = []
    if t1:
        stages.append(list(range(t1)))
    if t2:
        stages.append(list(range(t1, t1 + t2)))
    return stages


def _stage_instance(instance: Instance, stage: set[int], weights) -> Instance:
    t1 = len(instance.discrete_types)
    d_specs = tuple(
        spec if t in stage else replace(spec, count=0)
        for t, spec in enumerate(instance.discrete_types)
    )
    c_specs = tuple(
        spec if (t1 + t) in stage else replace(spec, count=0)
        for t, spec in enumerate(instance.continuous_types)
    )
    return replace(instance, weights=tuple(weights), discrete_types=d_specs,
                   continuous_types=c_specs)


def solve_sequential(
    instance: Instance,
    order: list[list[int]] | None = None,
    options: SolveOptions | None = None,
    stage_method: str = "bnc",
) -> SolveReport:
    """Solve the facility types stage by stage: after each stage the covered
    demand weights are zeroed before the next one.  Never better than the
    integrated solve; used as the baseline it is compared against."""
    options = options or SolveOptions()
    order = order if order is not None else default_order(instance)
    t_total = len(instance.discrete_types) + len(instance.continuous_types)
    flat = [t for stage in order for t in stage]
    if sorted(flat) != list(range(t_total)):
        raise InputError(
            f"order must partition the {t_total} type indices, got {order!r}"
        )
    solver = {"bnc": solve_bnc, "bips": solve_bips}.get(stage_method)
    if solver is None:
        raise InputError(f"unknown stage method {stage_method!r}")

    t0 = time.perf_counter()
    t1_count = len(instance.discrete_types)
    residual = list(instance.weights)
    merged_open: list[list[int]] = [[] for _ in instance.discrete_types]
    merged_centers: list[list[Point]] = [[] for _ in instance.continuous_types]
    stats = SolveStats()
    cuts: list[Cut] = []
    statuses: list[str] = []

    for stage in order:
        stage_set = set(stage)
        counts = [
            instance.discrete_types[t].count for t in stage_set if t < t1_count
        ] + [
            instance.continuous_types[t - t1_count].count
            for t in stage_set
            if t >= t1_count
        ]
        if sum(counts) == 0:
            continue  # nothing to place in this stage
        stage_inst = _stage_instance(instance, stage_set, residual)
        rep = solver(stage_inst, options)
        statuses.append(rep.status)
        cuts.extend(rep.cuts)
        stats.solving_s += rep.stats.solving_s
        stats.preprocessing_s += rep.stats.preprocessing_s
        stats.constraint_gen_s += rep.stats.constraint_gen_s
        stats.callback_s += rep.stats.callback_s
        stats.constraint_count += rep.stats.constraint_count
        stats.cut_count += rep.stats.cut_count
        stats.node_count += rep.stats.node_count
        stats.callback_calls += rep.stats.callback_calls
        stats.lp_iterations += rep.stats.lp_iterations
        for t in stage:
            if t < t1_count:
                merged_open[t] = rep.solution.assignment.open_sites[t]
            else:
                merged_centers[t - t1_count] = rep.solution.continuous_centers[t - t1_count]
        stage_eval = evaluate(stage_inst, rep.solution)
        for i, hit in enumerate(stage_eval.covered):
            if hit:
                residual[i] = 0.0

    asg = assignment_from_facilities(instance, merged_open, merged_centers)
    report_eval = evaluate(instance, Solution(asg, merged_centers, 0.0))
    solution = Solution(asg, merged_centers, report_eval.objective)
    stats.total_s = time.perf_counter() - t0

    label = ">".join("&".join(str(t) for t in stage) for stage in order)
    status = "optimal" if all(s == "optimal" for s in statuses) else "feasible"
    return SolveReport(
        method=f"seq({label})",
        solution=solution,
        status=status,
        objective=solution.objective,
        bound=solution.objective,
        gap=0.0,
        stats=stats,
        cuts=tuple(cuts),
    )


def brute_force(instance: Instance, options: SolveOptions | None = None) -> SolveReport:
    """Exhaustive oracle: enumerate site subsets per discrete type and
    candidate-set subsets per continuous type (exact for planar L2 by the
    finite-dominating-set property)."""
    if instance.dimension != 2:
        raise CapabilityError("the exhaustive oracle requires d = 2")
    for t, spec in enumerate(instance.continuous_types):
        if spec.norm.canonical().kind != "L2":
            raise CapabilityError(
                f"the exhaustive oracle requires L2 continuous types (type {t} is "
                f"{spec.norm.label()})"
            )
    t0 = time.perf_counter()
    n = instance.n
    weights = instance.weights

    def cover_mask(center: Point, rho: float) -> int:
        mask = 0
        for i, p in enumerate(instance.points):
            if within_mask_distance(p, center, rho):
                mask |= 1 << i
        return mask

    def within_mask_distance(a: Point, b: Point, rho: float) -> bool:
        return math.hypot(*(x - y for x, y in zip(a, b))) <= rho + 1e-9

    choice_sets: list[list[tuple[int, tuple]]] = []  # (mask, chosen) per type
    total = 1
    for spec in instance.discrete_types:
        site_masks = [cover_mask(s, r) for s, r in zip(spec.sites, spec.radii)]
        count = math.comb(len(spec.sites), spec.count)
        total *= count
        if total > BRUTE_FORCE_GUARD:
            raise CapacityError("brute-force enumeration exceeds the size guard")
        combos = []
        for chosen in itertools.combinations(range(len(spec.sites)), spec.count):
            mask = 0
            for j in chosen:
                mask |= site_masks[j]
            combos.append((mask, chosen))
        choice_sets.append(combos)
    candidate_sets: list[list[Point]] = []
    for t, spec in enumerate(instance.continuous_types):
        cands = build_bips(instance, t)
        candidate_sets.append(cands)
        cand_masks = [cover_mask(c, spec.radius) for c in cands]
        if spec.count > len(cands):
            # Fewer candidates than slots: open them all and stack the rest.
            chosen = tuple(range(len(cands))) + (0,) * (spec.count - len(cands))
            mask = 0
            for l in set(chosen):
                mask |= cand_masks[l]
            choice_sets.append([(mask, chosen)])
            continue
        count = math.comb(len(cands), spec.count)
        total *= count
        if total > BRUTE_FORCE_GUARD:
            raise CapacityError("brute-force enumeration exceeds the size guard")
        combos = []
        for chosen in itertools.combinations(range(len(cands)), spec.count):
            mask = 0
            for l in chosen:
                mask |= cand_masks[l]
            combos.append((mask, chosen))
        choice_sets.append(combos)
    t1 = time.perf_counter()

    best_obj = -1.0
    best_pick: tuple | None = None
    for pick in itertools.product(*choice_sets):
        union = 0
        for mask, _ in pick:
            union |= mask
        obj = 0.0
        m = union
        while m:
            low = m & -m
            obj += weights[low.bit_length() - 1]
            m ^= low
        if obj > best_obj + 1e-12:
            best_obj = obj
            best_pick = pick

    t1_count = len(instance.discrete_types)
    open_sites = [list(best_pick[t][1]) for t in range(t1_count)]
    centers = [
        [candidate_sets[t][l] for l in best_pick[t1_count + t][1]]
        for t in range(len(instance.continuous_types))
    ]
    asg = assignment_from_facilities(instance, open_sites, centers)
    report_eval = evaluate(instance, Solution(asg, centers, 0.0))
    solution = Solution(asg, centers, report_eval.objective)

    stats = SolveStats(
        total_s=time.perf_counter() - t0,
        solving_s=time.perf_counter() - t1,
        preprocessing_s=t1 - t0,
    )
    return SolveReport(
        method="brute",
        solution=solution,
        status="optimal",
        objective=solution.objective,
        bound=solution.objective,
        gap=0.0,
        stats=stats,
    )
