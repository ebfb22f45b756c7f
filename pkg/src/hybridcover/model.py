"""Instance representation, coverage precomputation and the two integer
formulations of the hybrid discrete/continuous covering problem.

The "incomplete" formulation keeps only pairwise incompatibility cuts (plus
any supplied pool) and relies on lazy separation; the candidate-set
formulation discretizes each continuous type over the demand points and the
pairwise intersections of their coverage-circle boundaries.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import CapabilityError, InputError
from .geometry import (
    L2,
    TOL,
    NormSpec,
    Point,
    circle_boundary_intersection,
    distance,
    pairwise_distances,
)
from .milp import Constraint, LinearModel


@dataclass(frozen=True)
class DiscreteTypeSpec:
    """Finite candidate sites with per-site coverage radii (L2 coverage)."""

    sites: tuple[Point, ...]
    radii: tuple[float, ...]
    count: int


@dataclass(frozen=True)
class ContinuousTypeSpec:
    """Facilities placed anywhere in R^d with a type-uniform radius."""

    norm: NormSpec
    radius: float
    count: int


@dataclass(frozen=True)
class Instance:
    points: tuple[Point, ...]
    weights: tuple[float, ...]
    discrete_types: tuple[DiscreteTypeSpec, ...]
    continuous_types: tuple[ContinuousTypeSpec, ...]
    dimension: int
    name: str = ""
    seed: int | None = None

    @property
    def n(self) -> int:
        return len(self.points)

    @property
    def p_vector(self) -> tuple[int, ...]:
        return tuple(t.count for t in self.discrete_types) + tuple(
            t.count for t in self.continuous_types
        )

    def coords(self) -> np.ndarray:
        return np.asarray(self.points, dtype=float)

    def weight_array(self) -> np.ndarray:
        return np.asarray(self.weights, dtype=float)


def make_instance(
    demand,
    discrete_types=(),
    continuous_types=(),
    name: str = "",
    seed: int | None = None,
) -> Instance:
    """Validate and build an :class:`Instance` from ``(coords, weight)`` pairs.

    Coincident demand points are merged with their weights summed, so the
    geometry downstream never sees duplicate centers.  All invariant
    violations are collected and reported together.
    """
    merged: dict[Point, float] = {}
    order: list[Point] = []
    for coords, w in demand:
        p = tuple(float(c) for c in coords)
        if p in merged:
            merged[p] += float(w)
        else:
            merged[p] = float(w)
            order.append(p)
    points = tuple(order)
    weights = tuple(merged[p] for p in order)

    problems: list[str] = []
    if not points:
        problems.append("no demand points")
        dim = 0
    else:
        dim = len(points[0])
    for i, p in enumerate(points):
        if len(p) != dim:
            problems.append(f"demand[{i}] has dimension {len(p)}, expected {dim}")
        if not all(math.isfinite(c) for c in p):
            problems.append(f"demand[{i}] has non-finite coordinates")
    for i, w in enumerate(weights):
        if not math.isfinite(w) or w < 0:
            problems.append(f"demand[{i}] has invalid weight {w}")

    d_specs: list[DiscreteTypeSpec] = []
    for t, spec in enumerate(discrete_types):
        sites = tuple(tuple(float(c) for c in s) for s in spec.sites)
        radii = tuple(float(r) for r in spec.radii)
        if len(radii) != len(sites):
            problems.append(f"discrete_types[{t}]: {len(radii)} radii for {len(sites)} sites")
        for j, s in enumerate(sites):
            if len(s) != dim:
                problems.append(f"discrete_types[{t}].sites[{j}] has wrong dimension")
        for j, r in enumerate(radii):
            if not math.isfinite(r) or r <= 0:
                problems.append(f"discrete_types[{t}].radii[{j}] must be positive")
        if spec.count < 0 or spec.count > len(sites):
            problems.append(
                f"discrete_types[{t}].count {spec.count} outside 0..{len(sites)}"
            )
        d_specs.append(DiscreteTypeSpec(sites, radii, int(spec.count)))

    c_specs: list[ContinuousTypeSpec] = []
    for t, spec in enumerate(continuous_types):
        if not math.isfinite(spec.radius) or spec.radius <= 0:
            problems.append(f"continuous_types[{t}].radius must be positive")
        if spec.count < 0:
            problems.append(f"continuous_types[{t}].count must be nonnegative")
        c_specs.append(ContinuousTypeSpec(spec.norm, float(spec.radius), int(spec.count)))

    if sum(s.count for s in d_specs) + sum(s.count for s in c_specs) < 1:
        problems.append("at least one facility of some type must be requested")
    if problems:
        raise InputError("invalid instance: " + "; ".join(problems))
    return Instance(points, weights, tuple(d_specs), tuple(c_specs), dim, name, seed)


@dataclass
class Assignment:
    """Binary incidence mirroring the integer model's x/y/z variables."""

    open_sites: list[list[int]]  # per discrete type, sorted site indices
    discrete_cover: list[list[bool]]  # per discrete type, per demand index
    continuous_cover: list[list[list[bool]]]  # [type][slot][demand index]

    @staticmethod
    def empty(instance: Instance) -> "Assignment":
        n = instance.n
        return Assignment(
            open_sites=[[] for _ in instance.discrete_types],
            discrete_cover=[[False] * n for _ in instance.discrete_types],
            continuous_cover=[
                [[False] * n for _ in range(t.count)] for t in instance.continuous_types
            ],
        )

    def cluster(self, t: int, k: int) -> list[int]:
        return [i for i, flag in enumerate(self.continuous_cover[t][k]) if flag]


@dataclass
class Solution:
    assignment: Assignment
    continuous_centers: list[list[Point]]  # per continuous type, one per slot
    objective: float


@dataclass(frozen=True)
class Cut:
    """Forbid assigning all of ``members`` to one slot of continuous type
    ``type_index``: sum of their z-variables <= |members| - 1, every slot."""

    type_index: int
    members: frozenset[int]

    def sort_key(self):
        return (self.type_index, len(self.members), tuple(sorted(self.members)))


def coverage_table(instance: Instance) -> list[list[list[int]]]:
    """Per discrete type and demand index, the sites whose closed coverage
    ball contains the point."""
    coords = instance.coords()
    table: list[list[list[int]]] = []
    for spec in instance.discrete_types:
        if not spec.sites:
            table.append([[] for _ in range(instance.n)])
            continue
        sites = np.asarray(spec.sites, dtype=float)
        radii = np.asarray(spec.radii, dtype=float)
        diff = coords[:, None, :] - sites[None, :, :]
        dist = np.sqrt((diff**2).sum(axis=2))
        covered = dist <= radii[None, :] + TOL
        table.append([list(np.nonzero(covered[i])[0]) for i in range(instance.n)])
    return table


def incompatible_pairs(instance: Instance, t: int) -> list[tuple[int, int]]:
    """Demand pairs that no single type-``t`` facility can cover together,
    i.e. pairs at distance > 2*rho (their joint enclosing radius exceeds rho)."""
    spec = instance.continuous_types[t]
    dist = pairwise_distances(instance.coords(), spec.norm)
    # pair enclosing radius d/2 > rho + TOL  <=>  d > 2 rho + 2 TOL
    mask = np.triu(dist > 2.0 * spec.radius + 2.0 * TOL, k=1)
    ii, ll = np.nonzero(mask)
    return list(zip(ii.tolist(), ll.tolist()))


def conflict_cliques(instance: Instance, t: int) -> list[list[int]]:
    """Maximal cliques of the type-``t`` incompatibility graph, grown from a
    greedy partition (greedy coloring of the complement graph).

    Each clique yields the row ``sum of z over the clique <= 1`` per slot:
    implied by the pairwise cuts at integer points, but far tighter in the
    LP relaxation (the all-halves point satisfies every ``|Q|-1`` cut, which
    would otherwise leave the root bound at the total demand weight).
    """
    spec = instance.continuous_types[t]
    dist = pairwise_distances(instance.coords(), spec.norm)
    conflict = dist > 2.0 * spec.radius + 2.0 * TOL
    cliques: list[list[int]] = []
    for i in range(instance.n):
        for clique in cliques:
            if all(conflict[i, j] for j in clique):
                clique.append(i)
                break
        else:
            cliques.append([i])
    grown: list[list[int]] = []
    seen: set[tuple[int, ...]] = set()
    for clique in cliques:
        mask = np.ones(instance.n, dtype=bool)
        for j in clique:
            mask &= conflict[j]
        for i in range(instance.n):
            if mask[i]:
                clique.append(i)
                mask &= conflict[i]
        key = tuple(sorted(clique))
        if key not in seen:
            seen.add(key)
            grown.append(sorted(clique))
    return grown


def separation_supported(norm: NormSpec, dimension: int) -> bool:
    """Norms for which the lazy separation can certify cluster feasibility.

    L2 anywhere, LInf anywhere, L1 in the plane all have exact enclosing-ball
    algorithms; other Lp(tau) norms fall back to a numerical one-center and
    full-cluster cuts.
    """
    kind = norm.canonical().kind
    if kind in ("L2", "LInf", "Lp"):
        return True
    return kind == "L1" and dimension == 2


@dataclass
class IncompleteIp:
    """The lazily-separated formulation plus its variable layout."""

    model: LinearModel
    instance: Instance
    y_index: list[dict[int, int]]  # per discrete type: site -> variable
    x_index: list[dict[int, int]]  # per discrete type: demand -> variable
    z_index: list[dict[tuple[int, int], int]]  # per cont. type: (slot, demand) -> var
    pairwise_cuts: list[Cut] = field(default_factory=list)
    pool_cuts: list[Cut] = field(default_factory=list)

    def cut_rows(self, cut: Cut) -> list[Constraint]:
        """Expand a cut to one row per slot of its continuous type."""
        spec = self.instance.continuous_types[cut.type_index]
        members = sorted(cut.members)
        rows = []
        for k in range(spec.count):
            coeffs = {self.z_index[cut.type_index][(k, i)]: 1.0 for i in members}
            rows.append(
                Constraint(coeffs, "<=", float(len(members) - 1),
                           name=f"cut[{cut.type_index};{k};{','.join(map(str, members))}]")
            )
        return rows

    def assignment_from_values(self, values) -> Assignment:
        asg = Assignment.empty(self.instance)
        for t, idx in enumerate(self.y_index):
            asg.open_sites[t] = sorted(j for j, v in idx.items() if values[v] > 0.5)
        for t, idx in enumerate(self.x_index):
            for i, v in idx.items():
                asg.discrete_cover[t][i] = values[v] > 0.5
        for t, idx in enumerate(self.z_index):
            for (k, i), v in idx.items():
                asg.continuous_cover[t][k][i] = values[v] > 0.5
        return asg


def build_incomplete_ip(
    instance: Instance,
    pool=(),
    symmetry: bool = True,
) -> IncompleteIp:
    """Build the incomplete integer model: objective over x/z coverage flags,
    site cardinalities, covering linkage, the at-most-once row per demand
    point, all pairwise incompatibility cuts, the supplied cut pool, and
    (optionally) the symmetry-breaking chain."""
    for t, spec in enumerate(instance.continuous_types):
        if not separation_supported(spec.norm, instance.dimension):
            raise CapabilityError(
                f"continuous type {t}: no separation support for "
                f"{spec.norm.label()} in dimension {instance.dimension}"
            )
    m = LinearModel()
    n = instance.n
    w = instance.weights

    y_index: list[dict[int, int]] = []
    x_index: list[dict[int, int]] = []
    for t, spec in enumerate(instance.discrete_types):
        y_index.append({j: m.add_binary(f"y[{t},{j}]") for j in range(len(spec.sites))})
        x_index.append({i: m.add_binary(f"x[{t},{i}]", objective=w[i]) for i in range(n)})
    z_index: list[dict[tuple[int, int], int]] = []
    for t, spec in enumerate(instance.continuous_types):
        z_index.append(
            {
                (k, i): m.add_binary(f"z[{t},{k},{i}]", objective=w[i])
                for k in range(spec.count)
                for i in range(n)
            }
        )

    table = coverage_table(instance)
    for t, spec in enumerate(instance.discrete_types):
        m.add_constraint(
            {v: 1.0 for v in y_index[t].values()}, "==", float(spec.count), f"card[{t}]"
        )
        for i in range(n):
            coeffs = {x_index[t][i]: 1.0}
            for j in table[t][i]:
                coeffs[y_index[t][j]] = coeffs.get(y_index[t][j], 0.0) - 1.0
            m.add_constraint(coeffs, "<=", 0.0, f"link[{t},{i}]")
    for i in range(n):
        coeffs = {}
        for t in range(len(instance.discrete_types)):
            coeffs[x_index[t][i]] = 1.0
        for t, spec in enumerate(instance.continuous_types):
            for k in range(spec.count):
                coeffs[z_index[t][(k, i)]] = 1.0
        m.add_constraint(coeffs, "<=", 1.0, f"once[{i}]")

    ip = IncompleteIp(m, instance, y_index, x_index, z_index)
    seen: set[tuple[int, frozenset[int]]] = set()
    for t, spec in enumerate(instance.continuous_types):
        for i, l in incompatible_pairs(instance, t):
            cut = Cut(t, frozenset((i, l)))
            seen.add((t, cut.members))
            ip.pairwise_cuts.append(cut)
            for row in ip.cut_rows(cut):
                m.add_constraint(row.coeffs, row.sense, row.rhs, row.name)
        # Clique strengthening: integer-equivalent to the pairwise rows above
        # but it keeps the LP bound meaningful (see conflict_cliques).
        for q, clique in enumerate(conflict_cliques(instance, t)):
            if len(clique) < 3:
                continue
            for k in range(spec.count):
                coeffs = {z_index[t][(k, i)]: 1.0 for i in clique}
                m.add_constraint(coeffs, "<=", 1.0, f"clique[{t},{q},{k}]")
    for cut in pool:
        key = (cut.type_index, cut.members)
        if key in seen:
            continue
        seen.add(key)
        ip.pool_cuts.append(cut)
        for row in ip.cut_rows(cut):
            m.add_constraint(row.coeffs, row.sense, row.rhs, row.name)

    if symmetry:
        add_symmetry_breaking(ip)
    return ip


def add_symmetry_breaking(ip: IncompleteIp) -> int:
    """Order the slots of each continuous type by non-decreasing covered
    weight; returns the number of chained inequalities added."""
    added = 0
    w = ip.instance.weights
    for t, spec in enumerate(ip.instance.continuous_types):
        for k in range(1, spec.count):
            coeffs: dict[int, float] = {}
            for i in range(ip.instance.n):
                if w[i] == 0.0:
                    continue
                coeffs[ip.z_index[t][(k - 1, i)]] = w[i]
                coeffs[ip.z_index[t][(k, i)]] = -w[i]
            ip.model.add_constraint(coeffs, "<=", 0.0, f"sym[{t},{k}]")
            added += 1
    return added


def build_bips(instance: Instance, t: int) -> list[Point]:
    """Candidate centers for continuous type ``t``: every demand point plus
    every boundary intersection of pairs of coverage circles (planar L2 only,
    deduplicated within tolerance)."""
    spec = instance.continuous_types[t]
    if instance.dimension != 2 or spec.norm.canonical().kind != "L2":
        raise CapabilityError(
            "candidate-set construction requires d = 2 and the L2 norm "
            f"(got d = {instance.dimension}, {spec.norm.label()})"
        )
    rho = spec.radius
    seen: set[tuple[float, float]] = set()
    out: list[Point] = []

    def push(p: Point):
        key = (round(p[0], 9), round(p[1], 9))
        if key not in seen:
            seen.add(key)
            out.append(p)

    for p in instance.points:
        push(p)
    coords = instance.coords()
    dist = pairwise_distances(coords, L2)
    n = instance.n
    close = dist <= 2.0 * rho + TOL
    for i in range(n):
        for l in range(i + 1, n):
            if not close[i, l]:
                continue
            for q in circle_boundary_intersection(instance.points[i], instance.points[l], rho):
                push(q)
    return out


@dataclass
class BipsIp:
    """The candidate-set formulation plus its layout."""

    model: LinearModel
    instance: Instance
    candidates: list[list[Point]]  # per continuous type
    y1_index: list[dict[int, int]]  # per discrete type: site -> variable
    y2_index: list[dict[int, int]]  # per continuous type: candidate -> variable
    x_index: dict[int, int]  # demand -> variable

    def facilities_from_values(self, values) -> tuple[list[list[int]], list[list[Point]]]:
        open_sites = [
            sorted(j for j, v in idx.items() if values[v] > 0.5) for idx in self.y1_index
        ]
        centers: list[list[Point]] = []
        for t, idx in enumerate(self.y2_index):
            chosen: list[Point] = []
            for l in sorted(idx):
                copies = int(round(values[idx[l]]))
                chosen.extend([self.candidates[t][l]] * copies)
            centers.append(chosen)
        return open_sites, centers


def build_bips_ip(instance: Instance, candidates: list[list[Point]] | None = None) -> BipsIp:
    """Binary site/candidate choices with a single relaxed coverage variable
    per demand point; one covering row per point plus one cardinality row per
    facility type."""
    if candidates is None:
        candidates = [build_bips(instance, t) for t in range(len(instance.continuous_types))]
    m = LinearModel()
    n = instance.n
    w = instance.weights

    y1_index: list[dict[int, int]] = []
    for t, spec in enumerate(instance.discrete_types):
        y1_index.append({j: m.add_binary(f"y1[{t},{j}]") for j in range(len(spec.sites))})
    y2_index: list[dict[int, int]] = []
    for t, spec in enumerate(instance.continuous_types):
        # When the candidate set is smaller than the count (tiny instances),
        # facilities may stack: the variable becomes a general integer.
        ub = 1.0 if len(candidates[t]) >= spec.count else float(spec.count)
        y2_index.append(
            {
                l: m.add_variable(f"y2[{t},{l}]", 0.0, ub, integer=True)
                for l in range(len(candidates[t]))
            }
        )
    x_index = {
        i: m.add_variable(f"x[{i}]", 0.0, 1.0, integer=False, objective=w[i])
        for i in range(n)
    }

    for t, spec in enumerate(instance.discrete_types):
        m.add_constraint(
            {v: 1.0 for v in y1_index[t].values()}, "==", float(spec.count), f"card1[{t}]"
        )
    for t, spec in enumerate(instance.continuous_types):
        m.add_constraint(
            {v: 1.0 for v in y2_index[t].values()}, "==", float(spec.count), f"card2[{t}]"
        )

    table = coverage_table(instance)
    coords = instance.coords()
    cover_cols: list[np.ndarray] = []
    for t, spec in enumerate(instance.continuous_types):
        if candidates[t]:
            cand = np.asarray(candidates[t], dtype=float)
            diff = coords[:, None, :] - cand[None, :, :]
            dist = np.sqrt((diff**2).sum(axis=2))
            cover_cols.append(dist <= spec.radius + TOL)
        else:
            cover_cols.append(np.zeros((n, 0), dtype=bool))
    for i in range(n):
        coeffs = {x_index[i]: 1.0}
        for t in range(len(instance.discrete_types)):
            for j in table[t][i]:
                coeffs[y1_index[t][j]] = coeffs.get(y1_index[t][j], 0.0) - 1.0
        for t in range(len(instance.continuous_types)):
            for l in np.nonzero(cover_cols[t][i])[0]:
                vid = y2_index[t][int(l)]
                coeffs[vid] = coeffs.get(vid, 0.0) - 1.0
        m.add_constraint(coeffs, "<=", 0.0, f"cover[{i}]")

    return BipsIp(m, instance, candidates, y1_index, y2_index, x_index)


@dataclass
class EvaluationReport:
    """Geometric re-evaluation of a solution, independent of stored flags."""

    objective: float
    covered: list[bool]
    violations: list[str]

    @property
    def ok(self) -> bool:
        return not self.violations


def evaluate(instance: Instance, solution: Solution) -> EvaluationReport:
    """Recompute coverage from the opened facilities and validate the stored
    assignment flags (facility counts, ball membership, double counting)."""
    n = instance.n
    asg = solution.assignment
    violations: list[str] = []
    table = coverage_table(instance)

    covered = [False] * n
    for t, spec in enumerate(instance.discrete_types):
        opened = asg.open_sites[t]
        if len(opened) != spec.count:
            violations.append(
                f"discrete type {t}: {len(opened)} open sites, expected {spec.count}"
            )
        if any(j < 0 or j >= len(spec.sites) for j in opened):
            violations.append(f"discrete type {t}: open site index out of range")
            opened = [j for j in opened if 0 <= j < len(spec.sites)]
        open_set = set(opened)
        for i in range(n):
            if open_set.intersection(table[t][i]):
                covered[i] = True
    for t, spec in enumerate(instance.continuous_types):
        centers = solution.continuous_centers[t]
        if len(centers) != spec.count:
            violations.append(
                f"continuous type {t}: {len(centers)} centers, expected {spec.count}"
            )
        for center in centers:
            for i in range(n):
                if within_distance(instance.points[i], center, spec.norm, spec.radius):
                    covered[i] = True

    marks = [0] * n
    for t in range(len(instance.discrete_types)):
        open_set = set(asg.open_sites[t])
        for i in range(n):
            if asg.discrete_cover[t][i]:
                marks[i] += 1
                if not open_set.intersection(table[t][i]):
                    violations.append(
                        f"x[{t},{i}] set but no open type-{t} site covers the point"
                    )
    for t, spec in enumerate(instance.continuous_types):
        centers = solution.continuous_centers[t]
        for k in range(len(asg.continuous_cover[t])):
            for i in range(n):
                if asg.continuous_cover[t][k][i]:
                    marks[i] += 1
                    if k >= len(centers) or not within_distance(
                        instance.points[i], centers[k], spec.norm, spec.radius
                    ):
                        violations.append(
                            f"z[{t},{k},{i}] set but the point lies outside the slot's ball"
                        )
    for i in range(n):
        if marks[i] > 1:
            violations.append(f"demand {i} counted {marks[i]} times")

    objective = float(sum(w for w, c in zip(instance.weights, covered) if c))
    return EvaluationReport(objective, covered, violations)


def within_distance(a: Point, b: Point, norm: NormSpec, rho: float) -> bool:
    return distance(a, b, norm) <= rho + TOL


def assignment_from_facilities(
    instance: Instance,
    open_sites: list[list[int]],
    centers: list[list[Point]],
) -> Assignment:
    """Coverage flags for a concrete facility placement: each covered demand
    point is charged to the first facility covering it (discrete types in
    order, then continuous slots in order), so no point is counted twice."""
    asg = Assignment.empty(instance)
    asg.open_sites = [sorted(js) for js in open_sites]
    table = coverage_table(instance)
    for i in range(instance.n):
        hit = False
        for t in range(len(instance.discrete_types)):
            if set(asg.open_sites[t]).intersection(table[t][i]):
                asg.discrete_cover[t][i] = True
                hit = True
                break
        if hit:
            continue
        for t, spec in enumerate(instance.continuous_types):
            for k, center in enumerate(centers[t]):
                if within_distance(instance.points[i], center, spec.norm, spec.radius):
                    asg.continuous_cover[t][k][i] = True
                    hit = True
                    break
            if hit:
                break
    return asg
