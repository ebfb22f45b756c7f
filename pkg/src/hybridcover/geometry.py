"""Covering geometry: norms, circle intersections, minimum enclosing balls.

Coverage is closed-ball throughout: a point exactly at distance ``rho`` from
a center counts as covered.  Every boundary comparison shares the absolute
tolerance ``TOL`` so that points constructed on ball boundaries (e.g. the
candidate set of :func:`hybridcover.model.build_bips`) are covered by their
generators.

All functions here are pure; inputs are never mutated.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import CapabilityError, InputError

# Shared absolute tolerance for all boundary comparisons.
TOL = 1e-9

# Tight epsilon used *inside* the enclosing-ball recursion, so the returned
# radius is accurate well below TOL.
_MEB_EPS = 1e-12

Point = tuple[float, ...]

_NORM_KINDS = ("L1", "L2", "LInf", "Lp")


@dataclass(frozen=True)
class NormSpec:
    """A distance choice: L1, L2, LInf or a general Lp(tau) with tau >= 1."""

    kind: str
    tau: float | None = None

    def __post_init__(self):
        if self.kind not in _NORM_KINDS:
            raise InputError(f"unknown norm kind {self.kind!r}")
        if self.kind == "Lp":
            if self.tau is None or not math.isfinite(self.tau) or self.tau < 1.0:
                raise InputError("Lp norms need a finite tau >= 1")
        elif self.tau is not None:
            raise InputError(f"tau applies to Lp norms only, not {self.kind}")

    def canonical(self) -> "NormSpec":
        """Collapse Lp(1) to L1 and Lp(2) to L2; other norms unchanged."""
        if self.kind == "Lp":
            if self.tau == 1.0:
                return L1
            if self.tau == 2.0:
                return L2
        return self

    def label(self) -> str:
        return f"Lp({self.tau:g})" if self.kind == "Lp" else self.kind


L1 = NormSpec("L1")
L2 = NormSpec("L2")
LINF = NormSpec("LInf")


def distance(a: Point, b: Point, norm: NormSpec = L2) -> float:
    """Norm distance between two points of equal dimension."""
    if len(a) != len(b):
        raise InputError(f"dimension mismatch: {len(a)} vs {len(b)}")
    diffs = [abs(x - y) for x, y in zip(a, b)]
    kind = norm.canonical().kind
    if kind == "L2":
        return math.hypot(*diffs)
    if kind == "L1":
        return sum(diffs)
    if kind == "LInf":
        return max(diffs)
    tau = float(norm.tau)
    return sum(dv**tau for dv in diffs) ** (1.0 / tau)


def pairwise_distances(coords: np.ndarray, norm: NormSpec = L2) -> np.ndarray:
    """Dense n-by-n distance matrix for an (n, d) coordinate array."""
    diff = np.abs(coords[:, None, :] - coords[None, :, :])
    kind = norm.canonical().kind
    if kind == "L2":
        return np.sqrt((diff**2).sum(axis=2))
    if kind == "L1":
        return diff.sum(axis=2)
    if kind == "LInf":
        return diff.max(axis=2)
    tau = float(norm.tau)
    return (diff**tau).sum(axis=2) ** (1.0 / tau)


def within_radius(dist: float, rho: float) -> bool:
    """Closed-ball membership at the shared tolerance."""
    return dist <= rho + TOL


@dataclass(frozen=True)
class Ball:
    center: Point
    radius: float
    norm: NormSpec = L2

    def __post_init__(self):
        if self.radius < 0:
            raise InputError("ball radius must be nonnegative")

    def contains(self, p: Point) -> bool:
        return within_radius(distance(self.center, p, self.norm), self.radius)


def circle_boundary_intersection(c1: Point, c2: Point, rho: float) -> list[Point]:
    """Intersection of the boundaries of two planar L2 circles of common radius.

    Returns two points when the circles cross, one at tangency (within TOL)
    and none when they are too far apart.  Coincident centers are rejected:
    the intersection would be the whole circle.
    """
    if len(c1) != 2 or len(c2) != 2:
        raise InputError("circle boundary intersection requires d = 2")
    if rho <= 0:
        raise InputError("rho must be positive")
    if tuple(c1) == tuple(c2):
        raise InputError("coincident centers: deduplicate demand points first")
    dx = c2[0] - c1[0]
    dy = c2[1] - c1[1]
    d = math.hypot(dx, dy)
    if d > 2.0 * rho + TOL:
        return []
    mx = (c1[0] + c2[0]) / 2.0
    my = (c1[1] + c2[1]) / 2.0
    if abs(d - 2.0 * rho) <= TOL:
        return [(mx, my)]
    h = math.sqrt(max(rho * rho - 0.25 * d * d, 0.0))
    ux, uy = -dy / d, dx / d
    return [(mx + h * ux, my + h * uy), (mx - h * ux, my - h * uy)]


# ---------------------------------------------------------------------------
# Minimum enclosing balls
# ---------------------------------------------------------------------------


def _l2(a: Point, b: Point) -> float:
    return math.hypot(*(x - y for x, y in zip(a, b)))


def _diameter_ball(a: Point, b: Point) -> tuple[Point, float]:
    center = tuple((x + y) / 2.0 for x, y in zip(a, b))
    return center, max(_l2(center, a), _l2(center, b))


def _circumball(pts: list[Point]) -> tuple[Point, float] | None:
    """Smallest ball with all given points on its boundary (center in their
    affine hull).  None when the points are affinely dependent."""
    base = np.asarray(pts[0], dtype=float)
    rows = np.asarray(pts[1:], dtype=float) - base
    norms = np.sqrt((rows**2).sum(axis=1))
    if np.any(norms == 0.0):
        return None
    unit = rows / norms[:, None]
    gram_unit = unit @ unit.T
    if abs(np.linalg.det(gram_unit)) < 1e-12:
        return None
    gram = rows @ rows.T
    lam = np.linalg.solve(2.0 * gram, (rows**2).sum(axis=1))
    center = base + lam @ rows
    c = tuple(float(v) for v in center)
    return c, max(_l2(c, p) for p in pts)


def _degenerate_ball(pts: list[Point]) -> tuple[Point, float]:
    """Enclosing ball of an affinely dependent boundary set, via the smallest
    covering ball among all pair diameters and triple circumcircles.

    Collinear triples land here and fall back to the farthest-pair diameter.
    """
    m = len(pts)
    best: tuple[Point, float] | None = None
    for i in range(m):
        for j in range(i + 1, m):
            c, r = _diameter_ball(pts[i], pts[j])
            if all(_l2(c, p) <= r + _MEB_EPS for p in pts):
                if best is None or r < best[1]:
                    best = (c, r)
    if best is not None:
        return best
    for i in range(m):
        for j in range(i + 1, m):
            for k in range(j + 1, m):
                ball = _circumball([pts[i], pts[j], pts[k]])
                if ball is None:
                    continue
                c, r = ball
                if all(_l2(c, p) <= r + _MEB_EPS for p in pts):
                    if best is None or r < best[1]:
                        best = (c, r)
    if best is None:
        # Fully collinear set: the farthest pair always covers it.
        far = max(
            ((i, j) for i in range(m) for j in range(i + 1, m)),
            key=lambda ij: _l2(pts[ij[0]], pts[ij[1]]),
        )
        return _diameter_ball(pts[far[0]], pts[far[1]])
    return best


def _meb_l2(points: list[Point]) -> tuple[Point, float, list[tuple[tuple[int, ...], float]]]:
    """Exact L2 minimum enclosing ball in any dimension.

    Deterministic Welzl-style recursion over prefixes (no shuffling, so
    identical inputs give identical results).  Returns the ball plus the
    trail of boundary support sets built along the way; the trail is what
    the cluster-feasibility certificate mines for small infeasible subsets.
    """
    d = len(points[0])
    trail: list[tuple[tuple[int, ...], float]] = []

    def ball_on(boundary: tuple[int, ...]) -> tuple[Point, float] | None:
        pts = [points[i] for i in boundary]
        if not pts:
            return None
        if len(pts) == 1:
            ball = (pts[0], 0.0)
        elif len(pts) == 2:
            ball = _diameter_ball(pts[0], pts[1])
        else:
            ball = _circumball(pts) or _degenerate_ball(pts)
        if len(boundary) >= 2:
            trail.append((boundary, ball[1]))
        return ball

    def mb(limit: int, boundary: tuple[int, ...]) -> tuple[Point, float] | None:
        ball = ball_on(boundary)
        if len(boundary) == d + 1:
            return ball
        for i in range(limit):
            p = points[i]
            if ball is None or _l2(ball[0], p) > ball[1] + _MEB_EPS:
                ball = mb(i, boundary + (i,))
        return ball

    center, radius = mb(len(points), ())
    return center, radius, trail


def _meb_linf(points: list[Point]) -> tuple[Point, float, tuple[int, int] | None]:
    """LInf enclosing ball: bounding-box midpoint.  Also reports the extreme
    pair along the widest axis (the natural 2-point witness)."""
    arr = np.asarray(points, dtype=float)
    lo = arr.min(axis=0)
    hi = arr.max(axis=0)
    center = tuple(float(v) for v in (lo + hi) / 2.0)
    extents = hi - lo
    axis = int(np.argmax(extents))
    radius = float(extents[axis]) / 2.0
    if len(points) < 2:
        return center, radius, None
    i_min = int(np.argmin(arr[:, axis]))
    i_max = int(np.argmax(arr[:, axis]))
    return center, radius, (i_min, i_max)


def _rotate_l1_to_linf(p: Point) -> Point:
    # |x| + |y| = max(|x + y|, |x - y|)
    return (p[0] + p[1], p[0] - p[1])


def _rotate_linf_to_l1(p: Point) -> Point:
    return ((p[0] + p[1]) / 2.0, (p[0] - p[1]) / 2.0)


def _meb_l1_2d(points: list[Point]) -> tuple[Point, float, tuple[int, int] | None]:
    rotated = [_rotate_l1_to_linf(p) for p in points]
    center, radius, pair = _meb_linf(rotated)
    return _rotate_linf_to_l1(center), radius, pair


def min_enclosing_ball(points: list[Point], norm: NormSpec = L2) -> tuple[Point, float]:
    """Center and minimal radius of the smallest enclosing ball.

    Supported: L2 in any dimension, LInf in any dimension, L1 in the plane.
    """
    if not points:
        raise InputError("min_enclosing_ball needs at least one point")
    dims = {len(p) for p in points}
    if len(dims) != 1:
        raise InputError("points of mixed dimension")
    d = dims.pop()
    unique = list(dict.fromkeys(tuple(p) for p in points))
    kind = norm.canonical().kind
    if kind == "L2":
        center, radius, _ = _meb_l2(unique)
        return center, radius
    if kind == "LInf":
        center, radius, _ = _meb_linf(unique)
        return center, radius
    if kind == "L1":
        if d != 2:
            raise CapabilityError("L1 enclosing balls are only supported in the plane")
        center, radius, _ = _meb_l1_2d(unique)
        return center, radius
    raise CapabilityError(f"no enclosing-ball algorithm for norm {norm.label()}")


@dataclass(frozen=True)
class FeasibilityCertificate:
    """Outcome of a cluster feasibility check against a common radius rho.

    ``witnesses`` holds small index subsets (pairs/triples in the plane, up
    to d+1 points in general) whose rho-balls have empty intersection; it is
    nonempty exactly when the cluster is infeasible.
    """

    feasible: bool
    radius: float
    center: Point | None
    witnesses: tuple[frozenset[int], ...] = ()


def cluster_feasible(
    indices,
    points: list[Point],
    rho: float,
    norm: NormSpec = L2,
) -> FeasibilityCertificate:
    """Decide whether the rho-balls around ``{points[i] : i in indices}``
    have a common point, i.e. whether one facility can cover them all.

    Equivalent to ``min enclosing radius <= rho`` (closed, tolerance TOL).
    On failure the certificate carries every small support subset whose own
    enclosing radius already exceeded rho during the incremental build.
    """
    idx = sorted(set(indices))
    if not idx:
        raise InputError("cluster_feasible needs a nonempty index set")
    seen: dict[Point, int] = {}
    local_pts: list[Point] = []
    local_to_orig: list[int] = []
    for i in idx:
        p = tuple(points[i])
        if p not in seen:
            seen[p] = i
            local_pts.append(p)
            local_to_orig.append(i)

    kind = norm.canonical().kind
    witnesses: list[frozenset[int]] = []
    if kind == "L2":
        center, radius, trail = _meb_l2(local_pts)
        if radius > rho + TOL:
            picked: set[frozenset[int]] = set()
            for support, ball_r in trail:
                if ball_r <= rho + TOL or len(support) < 2:
                    continue
                sub = [local_pts[j] for j in support]
                _, true_r, _ = _meb_l2(sub)
                if true_r > rho + TOL:
                    key = frozenset(local_to_orig[j] for j in support)
                    if key not in picked:
                        picked.add(key)
                        witnesses.append(key)
    elif kind in ("LInf", "L1"):
        if kind == "LInf":
            center, radius, pair = _meb_linf(local_pts)
        else:
            if len(local_pts[0]) != 2:
                raise CapabilityError("L1 enclosing balls are only supported in the plane")
            center, radius, pair = _meb_l1_2d(local_pts)
        if radius > rho + TOL and pair is not None:
            witnesses.append(frozenset(local_to_orig[j] for j in pair))
    else:
        raise CapabilityError(f"no enclosing-ball algorithm for norm {norm.label()}")

    feasible = radius <= rho + TOL
    return FeasibilityCertificate(
        feasible=feasible,
        radius=radius,
        center=center if feasible else None,
        witnesses=() if feasible else tuple(witnesses),
    )
