import math

import numpy as np
import pytest

from hybridcover.errors import CapabilityError, InputError
from hybridcover.geometry import (
    L1,
    L2,
    LINF,
    Ball,
    NormSpec,
    circle_boundary_intersection,
    cluster_feasible,
    distance,
    min_enclosing_ball,
)

SQ3 = math.sqrt(3.0)
TRIANGLE = [(0.0, 0.0), (1.0, 0.0), (0.5, SQ3 / 2.0)]


# --- independent oracles -----------------------------------------------------


def circumcircle(a, b, c):
    """Classic determinant circumcircle, written independently of the package."""
    ax, ay = a
    bx, by = b
    cx, cy = c
    d = 2.0 * (ax * (by - cy) + bx * (cy - ay) + cx * (ay - by))
    if abs(d) < 1e-14:
        return None
    ux = ((ax**2 + ay**2) * (by - cy) + (bx**2 + by**2) * (cy - ay) + (cx**2 + cy**2) * (ay - by)) / d
    uy = ((ax**2 + ay**2) * (cx - bx) + (bx**2 + by**2) * (ax - cx) + (cx**2 + cy**2) * (bx - ax)) / d
    center = (ux, uy)
    return center, math.dist(center, a)


def brute_force_meb(points):
    """Minimum enclosing circle as the smallest covering ball among all
    1/2/3-point candidate balls (exact in the plane)."""
    pts = [tuple(p) for p in points]
    best = None
    candidates = [((p[0], p[1]), 0.0) for p in pts]
    for i in range(len(pts)):
        for j in range(i + 1, len(pts)):
            cx = (pts[i][0] + pts[j][0]) / 2.0
            cy = (pts[i][1] + pts[j][1]) / 2.0
            candidates.append(((cx, cy), math.dist((cx, cy), pts[i])))
            for k in range(j + 1, len(pts)):
                ball = circumcircle(pts[i], pts[j], pts[k])
                if ball is not None:
                    candidates.append(ball)
    for center, radius in candidates:
        if all(math.dist(center, p) <= radius + 1e-9 for p in pts):
            if best is None or radius < best[1]:
                best = (center, radius)
    return best


# --- distance ----------------------------------------------------------------


def test_distance_examples():
    assert distance((0, 0), (3, 4), L2) == pytest.approx(5.0, abs=1e-12)
    assert distance((0, 0), (1, 1), L1) == pytest.approx(2.0, abs=1e-12)
    assert distance((0, 0), (1, 2), LINF) == pytest.approx(2.0, abs=1e-12)


def test_distance_lp_collapses_to_named_norms():
    a, b = (0.3, -0.4, 1.0), (1.1, 0.2, -0.5)
    assert distance(a, b, NormSpec("Lp", 1.0)) == pytest.approx(distance(a, b, L1), abs=1e-12)
    assert distance(a, b, NormSpec("Lp", 2.0)) == pytest.approx(distance(a, b, L2), abs=1e-12)


def test_distance_dimension_mismatch():
    with pytest.raises(InputError):
        distance((0, 0), (1, 2, 3))


@pytest.mark.parametrize("norm", [L1, L2, LINF, NormSpec("Lp", 3.0)])
def test_metric_axioms_on_random_triples(norm):
    rng = np.random.default_rng(42)
    for _ in range(200):
        a, b, c = (tuple(rng.uniform(-5, 5, size=3)) for _ in range(3))
        dab = distance(a, b, norm)
        assert dab >= 0.0
        assert dab == pytest.approx(distance(b, a, norm), abs=1e-9)
        assert distance(a, a, norm) == 0.0
        assert dab <= distance(a, c, norm) + distance(c, b, norm) + 1e-9


def test_norm_spec_validation():
    with pytest.raises(InputError):
        NormSpec("L7")
    with pytest.raises(InputError):
        NormSpec("Lp", 0.5)
    with pytest.raises(InputError):
        NormSpec("L2", 2.0)


# --- circle boundary intersection --------------------------------------------


def test_circle_intersection_tangent():
    assert circle_boundary_intersection((0, 0), (2, 0), 1.0) == [(1.0, 0.0)]


def test_circle_intersection_disjoint():
    assert circle_boundary_intersection((0, 0), (3, 0), 1.0) == []


def test_circle_intersection_crossing_matches_analytic_solution():
    # Solve x^2 + y^2 = 1 and (x-1)^2 + y^2 = 1 by hand: x = 1/2, y = +-sqrt(3)/2.
    expected = {(0.5, SQ3 / 2.0), (0.5, -SQ3 / 2.0)}
    got = circle_boundary_intersection((0, 0), (1, 0), 1.0)
    assert len(got) == 2
    for point in got:
        assert min(math.dist(point, e) for e in expected) < 1e-9
        assert abs(point[0] ** 2 + point[1] ** 2 - 1.0) < 1e-9
        assert abs((point[0] - 1.0) ** 2 + point[1] ** 2 - 1.0) < 1e-9


def test_circle_intersection_residuals_random():
    rng = np.random.default_rng(7)
    for _ in range(300):
        c1 = tuple(rng.uniform(0, 1, size=2))
        c2 = tuple(rng.uniform(0, 1, size=2))
        if c1 == c2:
            continue
        rho = float(rng.uniform(0.05, 0.8))
        for q in circle_boundary_intersection(c1, c2, rho):
            assert abs(distance(q, c1, L2) - rho) <= 1e-9
            assert abs(distance(q, c2, L2) - rho) <= 1e-9


def test_circle_intersection_coincident_centers_rejected():
    with pytest.raises(InputError):
        circle_boundary_intersection((0.5, 0.5), (0.5, 0.5), 1.0)


# --- minimum enclosing balls --------------------------------------------------


def test_meb_single_point():
    center, radius = min_enclosing_ball([(5.0, 5.0)])
    assert center == (5.0, 5.0)
    assert radius == 0.0


def test_meb_two_point_diameter():
    center, radius = min_enclosing_ball([(0.0, 0.0), (2.0, 0.0)])
    assert center == pytest.approx((1.0, 0.0), abs=1e-12)
    assert radius == pytest.approx(1.0, abs=1e-12)


def test_meb_equilateral_triangle_circumradius():
    _, radius = min_enclosing_ball(TRIANGLE)
    # closed-form circumradius of the defining triple
    assert radius == pytest.approx(1.0 / SQ3, abs=1e-9)
    # grid-search oracle over candidate centers around the centroid
    xs = np.linspace(0.4, 0.6, 81)
    ys = np.linspace(0.2, 0.4, 81)
    best = min(max(math.dist((x, y), p) for p in TRIANGLE) for x in xs for y in ys)
    assert radius <= best + 1e-9
    assert abs(radius - best) < 5e-3


def test_meb_containment_and_minimality_vs_brute_force():
    rng = np.random.default_rng(11)
    for _ in range(120):
        pts = [tuple(p) for p in rng.uniform(0, 1, size=(int(rng.integers(1, 9)), 2))]
        center, radius = min_enclosing_ball(pts)
        assert max(math.dist(center, p) for p in pts) <= radius + 1e-9
        _, expected = brute_force_meb(pts)
        assert abs(radius - expected) <= 1e-9


def test_meb_collinear_points_fall_back_to_diameter():
    pts = [(0.0, 0.0), (1.0, 0.0), (2.0, 0.0), (3.0, 0.0)]
    center, radius = min_enclosing_ball(pts)
    assert center == pytest.approx((1.5, 0.0), abs=1e-12)
    assert radius == pytest.approx(1.5, abs=1e-12)


def test_meb_l2_higher_dimension():
    rng = np.random.default_rng(3)
    pts = [tuple(p) for p in rng.uniform(0, 1, size=(12, 3))]
    center, radius = min_enclosing_ball(pts)
    assert max(distance(center, p, L2) for p in pts) <= radius + 1e-9
    # radius can not beat any single pairwise half-distance
    for i in range(len(pts)):
        for j in range(i + 1, len(pts)):
            assert radius >= distance(pts[i], pts[j], L2) / 2.0 - 1e-9


def test_meb_linf_bounding_box():
    pts = [(0.0, 0.0), (4.0, 1.0), (2.0, 3.0)]
    center, radius = min_enclosing_ball(pts, LINF)
    assert center == pytest.approx((2.0, 1.5), abs=1e-12)
    assert radius == pytest.approx(2.0, abs=1e-12)
    assert max(distance(center, p, LINF) for p in pts) <= radius + 1e-9


def test_meb_l1_plane_via_rotation():
    rng = np.random.default_rng(5)
    for _ in range(50):
        pts = [tuple(p) for p in rng.uniform(-1, 1, size=(int(rng.integers(2, 8)), 2))]
        center, radius = min_enclosing_ball(pts, L1)
        assert max(distance(center, p, L1) for p in pts) <= radius + 1e-9
        # optimality within a small perturbation neighbourhood
        for dx, dy in ((1e-3, 0), (-1e-3, 0), (0, 1e-3), (0, -1e-3), (7e-4, -7e-4)):
            moved = (center[0] + dx, center[1] + dy)
            assert max(distance(moved, p, L1) for p in pts) >= radius - 1e-9


def test_meb_unsupported_combinations():
    with pytest.raises(CapabilityError):
        min_enclosing_ball([(0, 0, 0), (1, 1, 1)], L1)
    with pytest.raises(CapabilityError):
        min_enclosing_ball([(0, 0), (1, 1)], NormSpec("Lp", 3.0))


def test_ball_contains_boundary():
    ball = Ball((0.0, 0.0), 1.0)
    assert ball.contains((1.0, 0.0))
    assert ball.contains((0.0, -1.0))
    assert not ball.contains((1.0 + 1e-6, 0.0))


# --- cluster feasibility -------------------------------------------------------


def test_cluster_singleton_feasible():
    cert = cluster_feasible([0], [(0.0, 0.0)], 0.1)
    assert cert.feasible
    assert cert.center == (0.0, 0.0)
    assert cert.witnesses == ()


def test_cluster_two_far_points_infeasible_with_pair_witness():
    cert = cluster_feasible([0, 1], [(0.0, 0.0), (2.0, 0.0)], 0.9)
    assert not cert.feasible
    assert cert.center is None
    assert frozenset({0, 1}) in cert.witnesses


def test_cluster_triangle_threshold():
    cert = cluster_feasible([0, 1, 2], TRIANGLE, 0.58)
    assert cert.feasible
    cert = cluster_feasible([0, 1, 2], TRIANGLE, 0.57)
    assert not cert.feasible
    assert any(len(w) == 3 for w in cert.witnesses)


def test_cluster_monotonicity():
    rng = np.random.default_rng(21)
    points = [tuple(p) for p in rng.uniform(0, 1, size=(12, 2))]
    for _ in range(100):
        size = int(rng.integers(2, 9))
        big = sorted(rng.choice(12, size=size, replace=False).tolist())
        small = sorted(rng.choice(big, size=int(rng.integers(1, size)), replace=False).tolist())
        rho = float(rng.uniform(0.05, 0.6))
        if cluster_feasible(big, points, rho).feasible:
            assert cluster_feasible(small, points, rho).feasible


def test_helly_three_wise_equivalence():
    rng = np.random.default_rng(33)
    from itertools import combinations

    for _ in range(100):
        size = int(rng.integers(3, 9))
        points = [tuple(p) for p in rng.uniform(0, 1, size=(size, 2))]
        rho = float(rng.uniform(0.1, 0.5))
        whole = cluster_feasible(range(size), points, rho).feasible
        triples = all(
            cluster_feasible(t, points, rho).feasible
            for t in combinations(range(size), 3)
        )
        assert whole == triples


def test_cluster_witnesses_have_empty_intersection():
    rng = np.random.default_rng(55)
    for _ in range(60):
        size = int(rng.integers(2, 10))
        points = [tuple(p) for p in rng.uniform(0, 1, size=(size, 2))]
        rho = float(rng.uniform(0.05, 0.35))
        cert = cluster_feasible(range(size), points, rho)
        if cert.feasible:
            assert cert.witnesses == ()
            assert max(distance(points[i], cert.center) for i in range(size)) <= rho + 1e-9
        else:
            assert cert.witnesses
            for witness in cert.witnesses:
                assert not cluster_feasible(witness, points, rho).feasible
