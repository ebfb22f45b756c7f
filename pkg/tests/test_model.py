import math

import pytest

from hybridcover.errors import CapabilityError, InputError
from hybridcover.geometry import L2, LINF, NormSpec
from hybridcover.milp import branch_and_bound
from hybridcover.model import (
    Assignment,
    ContinuousTypeSpec,
    Cut,
    DiscreteTypeSpec,
    Instance,
    Solution,
    add_symmetry_breaking,
    build_bips,
    build_bips_ip,
    build_incomplete_ip,
    conflict_cliques,
    coverage_table,
    evaluate,
    make_instance,
)
from hybridcover.instance_io import generate_instance
from hybridcover.solvers import brute_force, solve_bnc


def one_continuous(points, rho=0.1, count=1, weights=None, norm=L2):
    weights = weights or [1.0] * len(points)
    return make_instance(
        list(zip(points, weights)),
        continuous_types=[ContinuousTypeSpec(norm, rho, count)],
    )


# --- instance construction -----------------------------------------------------


def test_make_instance_deduplicates_and_sums_weights():
    inst = make_instance(
        [((0.0, 0.0), 2.0), ((0.0, 0.0), 3.0), ((1.0, 1.0), 1.0)],
        continuous_types=[ContinuousTypeSpec(L2, 0.5, 1)],
    )
    assert inst.n == 2
    assert inst.weights == (5.0, 1.0)


def test_make_instance_collects_all_violations():
    with pytest.raises(InputError) as err:
        make_instance(
            [((0.0, 0.0), -1.0)],
            discrete_types=[DiscreteTypeSpec(((0.0, 0.0),), (-0.5,), 2)],
        )
    message = str(err.value)
    assert "weight" in message
    assert "radii" in message or "radius" in message
    assert "count" in message


def test_make_instance_requires_some_facility():
    with pytest.raises(InputError, match="at least one facility"):
        make_instance(
            [((0.0, 0.0), 1.0)],
            continuous_types=[ContinuousTypeSpec(L2, 0.5, 0)],
        )


# --- coverage table -------------------------------------------------------------


def test_coverage_table_boundary_inclusion():
    inst = make_instance(
        [((0.0, 0.0), 1.0)],
        discrete_types=[DiscreteTypeSpec(((0.5, 0.0),), (0.5,), 1)],
    )
    assert coverage_table(inst)[0][0] == [0]


def test_coverage_table_out_of_range():
    inst = make_instance(
        [((0.0, 0.0), 1.0)],
        discrete_types=[DiscreteTypeSpec(((1.0, 0.0),), (0.5,), 1)],
    )
    assert coverage_table(inst)[0][0] == []


def test_coverage_table_line_site_covers_all():
    inst = make_instance(
        [((0.0, 0.0), 1.0), ((1.0, 0.0), 1.0), ((2.0, 0.0), 1.0)],
        discrete_types=[DiscreteTypeSpec(((1.0, 0.0),), (1.0,), 1)],
    )
    table = coverage_table(inst)
    assert [table[0][i] for i in range(3)] == [[0], [0], [0]]


# --- incomplete formulation ------------------------------------------------------


def test_incomplete_ip_single_point_single_slot():
    inst = one_continuous([(0.25, 0.25)], rho=0.1, count=1, weights=[3.5])
    ip = build_incomplete_ip(inst, [], symmetry=True)
    assert len(ip.model.variables) == 1
    assert ip.model.variables[0].objective == 3.5
    assert ip.pairwise_cuts == [] and ip.pool_cuts == []
    assert all(not c.name.startswith("cut") for c in ip.model.constraints)


def test_incomplete_ip_contains_pairwise_cut():
    inst = one_continuous([(0.0, 0.0), (3.0, 0.0)], rho=1.0, count=1)
    ip = build_incomplete_ip(inst, [], symmetry=True)
    assert [sorted(c.members) for c in ip.pairwise_cuts] == [[0, 1]]
    cut_rows = [c for c in ip.model.constraints if c.name.startswith("cut")]
    assert len(cut_rows) == 1
    assert cut_rows[0].rhs == 1.0
    assert sorted(cut_rows[0].coeffs.values()) == [1.0, 1.0]


def test_incomplete_ip_variable_count():
    # one discrete type (sites = demand points) and one continuous slot:
    # |sites| y-vars + n x-vars + n z-vars
    inst = generate_instance(seed=4, n=5, discrete=((1, 0.2),), continuous=((1, 0.1, L2),))
    ip = build_incomplete_ip(inst, [], symmetry=True)
    assert len(ip.model.variables) == 5 + 5 + 5


def test_incomplete_ip_rejects_unsupported_norm():
    inst = make_instance(
        [((0.0, 0.0, 0.0), 1.0), ((1.0, 1.0, 1.0), 1.0)],
        continuous_types=[ContinuousTypeSpec(NormSpec("L1"), 0.5, 1)],
    )
    with pytest.raises(CapabilityError):
        build_incomplete_ip(inst, [])


def test_conflict_cliques_are_cliques_and_cover_points():
    inst = generate_instance(seed=9, n=30, discrete=(), continuous=((1, 0.08, L2),))
    cliques = conflict_cliques(inst, 0)
    seen = set()
    for clique in cliques:
        seen.update(clique)
        for a in clique:
            for b in clique:
                if a < b:
                    assert math.dist(inst.points[a], inst.points[b]) > 2 * 0.08
    assert seen == set(range(inst.n))


# --- symmetry breaking ------------------------------------------------------------


def test_symmetry_chain_length():
    inst0 = one_continuous([(0.1, 0.1), (0.9, 0.9)], count=1)
    ip = build_incomplete_ip(inst0, [], symmetry=False)
    assert add_symmetry_breaking(ip) == 0

    inst3 = one_continuous([(0.1, 0.1), (0.9, 0.9)], count=3)
    ip3 = build_incomplete_ip(inst3, [], symmetry=False)
    assert add_symmetry_breaking(ip3) == 2


def test_symmetry_orders_covered_weight_on_optimum():
    inst = generate_instance(seed=12, n=12, discrete=(), continuous=((3, 0.12, L2),))
    report = solve_bnc(inst)
    assert report.status == "optimal"
    weights = [
        sum(inst.weights[i] for i in report.solution.assignment.cluster(0, k))
        for k in range(3)
    ]
    assert weights == sorted(weights)
    assert report.objective == brute_force(inst).objective


# --- candidate set (BIPS) -----------------------------------------------------------


def test_bips_single_point():
    inst = one_continuous([(0.3, 0.7)], rho=0.2)
    assert build_bips(inst, 0) == [(0.3, 0.7)]


def test_bips_tangent_pair_gives_three_candidates():
    inst = one_continuous([(0.0, 0.0), (0.4, 0.0)], rho=0.2)
    cands = build_bips(inst, 0)
    assert len(cands) == 3
    assert (0.2, 0.0) in cands


def test_bips_close_pair_gives_four_candidates():
    inst = one_continuous([(0.0, 0.0), (0.1, 0.0)], rho=0.1)
    cands = build_bips(inst, 0)
    assert len(cands) == 4


def test_bips_requires_planar_l2():
    inst = make_instance(
        [((0.0, 0.0), 1.0), ((1.0, 0.0), 1.0)],
        continuous_types=[ContinuousTypeSpec(LINF, 0.5, 1)],
    )
    with pytest.raises(CapabilityError):
        build_bips(inst, 0)


def test_bips_ip_single_point_optimum():
    inst = one_continuous([(0.5, 0.5)], rho=0.1, weights=[2.5])
    ip = build_bips_ip(inst)
    res = branch_and_bound(ip.model)
    assert res.status == "optimal"
    assert res.objective == pytest.approx(2.5, abs=1e-9)


def test_bips_ip_constraint_count_n_plus_two():
    inst = generate_instance(seed=1, n=9, discrete=((1, 0.2),), continuous=((1, 0.1, L2),))
    ip = build_bips_ip(inst)
    assert len(ip.model.constraints) == 9 + 2


def test_bips_ip_all_slots_cover_everything():
    inst = one_continuous([(0.0, 0.0), (0.25, 0.0), (0.5, 0.0)], rho=0.1)
    cands = build_bips(inst, 0)
    rich = make_instance(
        [(p, 1.0) for p in inst.points],
        continuous_types=[ContinuousTypeSpec(L2, 0.1, len(cands))],
    )
    ip = build_bips_ip(rich)
    res = branch_and_bound(ip.model)
    assert res.objective == pytest.approx(3.0, abs=1e-9)


# --- evaluation ----------------------------------------------------------------------


def test_evaluate_empty_facilities_zero():
    inst = one_continuous([(0.1, 0.2), (0.8, 0.9)], count=1)
    asg = Assignment.empty(inst)
    sol = Solution(asg, [[(-50.0, -50.0)]], 0.0)
    report = evaluate(inst, sol)
    assert report.objective == 0.0
    assert report.ok


def test_evaluate_single_point_self_cover():
    inst = one_continuous([(0.4, 0.4)], weights=[7.0])
    asg = Assignment.empty(inst)
    asg.continuous_cover[0][0][0] = True
    sol = Solution(asg, [[(0.4, 0.4)]], 7.0)
    report = evaluate(inst, sol)
    assert report.objective == 7.0
    assert report.ok


def test_evaluate_reports_violations():
    inst = make_instance(
        [((0.0, 0.0), 1.0), ((5.0, 5.0), 1.0)],
        discrete_types=[DiscreteTypeSpec(((0.0, 0.0), (5.0, 5.0)), (0.5, 0.5), 1)],
        continuous_types=[ContinuousTypeSpec(L2, 0.5, 1)],
    )
    asg = Assignment.empty(inst)
    asg.open_sites[0] = [0, 1]  # one too many
    asg.discrete_cover[0][1] = True
    asg.continuous_cover[0][0][1] = True  # double counted and outside the ball
    sol = Solution(asg, [[(0.0, 0.0)]], 2.0)
    report = evaluate(inst, sol)
    text = "\n".join(report.violations)
    assert "open sites" in text
    assert "outside" in text
    assert "counted" in text


def test_evaluate_geometric_coverage_ignores_missing_flags():
    # flags empty, but the opened facility geometrically covers both points
    inst = make_instance(
        [((0.0, 0.0), 1.0), ((0.15, 0.0), 2.0)],
        continuous_types=[ContinuousTypeSpec(L2, 0.1, 1)],
    )
    asg = Assignment.empty(inst)
    sol = Solution(asg, [[(0.075, 0.0)]], 0.0)
    report = evaluate(inst, sol)
    assert report.objective == 3.0
    assert report.ok
