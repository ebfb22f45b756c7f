"""Lazy-cut separation: cluster validation, witness extraction, the
clustering-based initial cut pool and dominance filtering.

A cut forbids an *incompatible* set of demand points (one whose coverage
balls have empty common intersection) from being assigned to the same
continuous facility slot.  Pairwise cuts are enumerated upfront; larger
cuts are found by validating the clusters of integer candidates with a
minimum-enclosing-ball computation and harvesting the small support sets
that already exceeded the radius.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from .errors import InputError
from .geometry import (
    TOL,
    FeasibilityCertificate,
    NormSpec,
    Point,
    cluster_feasible,
    min_enclosing_ball,
)
from .model import Assignment, Cut, Instance, incompatible_pairs

ORIGIN_PAIRWISE = "pairwise"
ORIGIN_THREE_WISE = "three-wise"
ORIGIN_CLUSTERING = "clustering-pool"
ORIGIN_CALLBACK = "callback"

# Jung's theorem caps the enclosing radius of a planar set of diameter D at
# D/sqrt(3), so thresholds rho+eps with eps <= (sqrt(3)-1) rho can never give
# an infeasible cluster; the schedule therefore reaches up to 2 rho.
DEFAULT_EPS_FRACTIONS = (0.05, 0.25, 0.5, 1.0)


@dataclass
class CutPool:
    """Cuts deduplicated by (type, member set), each with an origin tag."""

    cuts: dict[Cut, str] = field(default_factory=dict)

    def add(self, cut: Cut, origin: str) -> bool:
        if cut.type_index < 0 or len(cut.members) < 2:
            raise InputError("cuts need a continuous type and at least two members")
        if cut in self.cuts:
            return False
        self.cuts[cut] = origin
        return True

    def __len__(self) -> int:
        return len(self.cuts)

    def __iter__(self):
        return iter(self.cuts)

    def __contains__(self, cut: Cut) -> bool:
        return cut in self.cuts

    def origin(self, cut: Cut) -> str:
        return self.cuts[cut]

    def sorted_cuts(self) -> list[Cut]:
        return sorted(self.cuts, key=Cut.sort_key)

    def counts_by_origin(self) -> dict[str, int]:
        out: dict[str, int] = {}
        for origin in self.cuts.values():
            out[origin] = out.get(origin, 0) + 1
        return out


def two_wise_cuts(instance: Instance, t: int) -> CutPool:
    """All pairwise incompatibility cuts for continuous type ``t``."""
    pool = CutPool()
    for i, l in incompatible_pairs(instance, t):
        pool.add(Cut(t, frozenset((i, l))), ORIGIN_PAIRWISE)
    return pool


def _lp_tau_one_center(points: list[Point], tau: float) -> tuple[Point, float]:
    """Numerical one-center under the Lp(tau) norm (smooth convex minimax,
    solved with SLSQP from the L2 enclosing-ball center)."""
    if len(points) == 1:
        return points[0], 0.0
    arr = np.asarray(points, dtype=float)
    d = arr.shape[1]
    x0_center, _ = min_enclosing_ball(points)
    x0 = np.asarray(x0_center, dtype=float)

    def radii(x: np.ndarray) -> np.ndarray:
        return (np.abs(arr - x[None, :]) ** tau).sum(axis=1) ** (1.0 / tau)

    def cons_fun(v: np.ndarray) -> np.ndarray:
        return v[d] - radii(v[:d])

    def cons_jac(v: np.ndarray) -> np.ndarray:
        x = v[:d]
        diff = x[None, :] - arr
        dist = radii(x)
        dist = np.maximum(dist, 1e-15)
        grad_x = np.sign(diff) * (np.abs(diff) ** (tau - 1.0)) / (dist[:, None] ** (tau - 1.0))
        jac = np.empty((len(points), d + 1))
        jac[:, :d] = -grad_x
        jac[:, d] = 1.0
        return jac

    v0 = np.concatenate([x0, [radii(x0).max() + 1e-6]])
    res = minimize(
        lambda v: v[d],
        v0,
        jac=lambda v: np.concatenate([np.zeros(d), [1.0]]),
        constraints=[{"type": "ineq", "fun": cons_fun, "jac": cons_jac}],
        method="SLSQP",
        options={"ftol": 1e-12, "maxiter": 500},
    )
    x = res.x[:d]
    r = float(radii(x).max())
    return tuple(float(c) for c in x), r


def certify_cluster(instance: Instance, t: int, indices) -> FeasibilityCertificate:
    """Cluster feasibility for continuous type ``t`` under its own norm.

    Exact enclosing-ball certificates where available; generic Lp(tau) norms
    get a numerical one-center with no witness extraction (the caller then
    falls back to the full-cluster cut).
    """
    spec = instance.continuous_types[t]
    kind = spec.norm.canonical().kind
    if kind != "Lp":
        return cluster_feasible(indices, list(instance.points), spec.radius, spec.norm)
    idx = sorted(set(indices))
    pts = [instance.points[i] for i in idx]
    center, radius = _lp_tau_one_center(pts, float(spec.norm.tau))
    feasible = radius <= spec.radius + TOL
    return FeasibilityCertificate(
        feasible=feasible,
        radius=radius,
        center=center if feasible else None,
        witnesses=(),
    )


def separate(candidate: Assignment, instance: Instance) -> list[Cut]:
    """Validate every slot cluster of an integer-feasible candidate; emit a
    cut per small infeasible witness, or the full-cluster cut when the
    certificate carries no witnesses.  Empty iff all clusters are feasible."""
    cuts: list[Cut] = []
    seen: set[tuple[int, frozenset[int]]] = set()
    for t in range(len(instance.continuous_types)):
        for k in range(len(candidate.continuous_cover[t])):
            members = candidate.cluster(t, k)
            if len(members) <= 1:
                continue
            cert = certify_cluster(instance, t, members)
            if cert.feasible:
                continue
            found = cert.witnesses or (frozenset(members),)
            for witness in found:
                key = (t, witness)
                if key not in seen:
                    seen.add(key)
                    cuts.append(Cut(t, witness))
    return cuts


def complete_linkage_clusters(dist: np.ndarray, threshold: float) -> list[list[int]]:
    """Agglomerative complete-linkage clustering cut at ``threshold``: merge
    the closest pair of clusters (by maximum pointwise distance) while that
    distance stays within the threshold.  Deterministic lowest-index ties."""
    n = dist.shape[0]
    linkage = dist.astype(float).copy()
    np.fill_diagonal(linkage, np.inf)
    active = list(range(n))
    members: dict[int, list[int]] = {i: [i] for i in range(n)}
    while len(active) > 1:
        sub = linkage[np.ix_(active, active)]
        flat = int(np.argmin(sub))
        a, b = divmod(flat, len(active))
        if a > b:
            a, b = b, a
        best = sub[a, b]
        if best > threshold:
            break
        ia, ib = active[a], active[b]
        members[ia].extend(members[ib])
        del members[ib]
        linkage[ia, :] = np.maximum(linkage[ia, :], linkage[ib, :])
        linkage[:, ia] = linkage[ia, :]
        linkage[ia, ia] = np.inf
        active.remove(ib)
    return [sorted(members[i]) for i in sorted(members)]


def initial_cut_pool(instance: Instance, t: int, epsilons=None) -> CutPool:
    """Clustering-seeded pool of three-point cuts for continuous type ``t``.

    For each epsilon, demand points are clustered with complete linkage at
    threshold rho + epsilon; invalid clusters contribute their three-point
    witnesses.  The result is deduplicated and dominance-filtered.
    """
    spec = instance.continuous_types[t]
    if epsilons is None:
        epsilons = [f * spec.radius for f in DEFAULT_EPS_FRACTIONS]
    if any(e <= 0 for e in epsilons):
        raise InputError("pool epsilons must be positive")
    from .geometry import pairwise_distances

    dist = pairwise_distances(instance.coords(), spec.norm)
    pool = CutPool()
    for eps in epsilons:
        for cluster in complete_linkage_clusters(dist, spec.radius + eps):
            if len(cluster) < 3:
                continue
            cert = certify_cluster(instance, t, cluster)
            if cert.feasible:
                continue
            for witness in cert.witnesses:
                if len(witness) == 3:
                    pool.add(Cut(t, witness), ORIGIN_CLUSTERING)
    return filter_dominated(pool)


def filter_dominated(pool: CutPool) -> CutPool:
    """Drop any cut whose member set strictly contains another same-type
    cut's member set (the smaller cut is the stronger constraint)."""
    kept = CutPool()
    by_type: dict[int, list[Cut]] = {}
    for cut in pool.sorted_cuts():
        by_type.setdefault(cut.type_index, []).append(cut)
    for t in sorted(by_type):
        retained: list[frozenset[int]] = []
        for cut in by_type[t]:  # sorted by size: smaller cuts first
            if any(other < cut.members for other in retained):
                continue
            retained.append(cut.members)
            kept.add(cut, pool.origin(cut))
    return kept


def merge_pools(*pools: CutPool) -> CutPool:
    merged = CutPool()
    for pool in pools:
        for cut in pool:
            merged.add(cut, pool.origin(cut))
    return merged
