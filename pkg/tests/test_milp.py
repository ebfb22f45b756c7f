import itertools

import pytest

from hybridcover.errors import ContractError, InputError
from hybridcover.milp import (
    Constraint,
    LinearModel,
    SolveLimits,
    branch_and_bound,
    solve_lp,
)


def knapsack_model():
    # max 3a + 2b + 2c  s.t.  2a + 2b + 2c <= 4, binary
    m = LinearModel()
    a = m.add_binary("a", objective=3.0)
    b = m.add_binary("b", objective=2.0)
    c = m.add_binary("c", objective=2.0)
    m.add_constraint({a: 2.0, b: 2.0, c: 2.0}, "<=", 4.0, "cap")
    return m


def test_solve_lp_single_variable():
    m = LinearModel()
    x = m.add_variable("x", 0.0, 1.0)
    m.variables[x].objective = 1.0
    m.add_constraint({x: 1.0}, "<=", 0.5)
    res = solve_lp(m)
    assert res.status == "optimal"
    assert res.objective == pytest.approx(0.5, abs=1e-9)


def test_solve_lp_two_variables():
    m = LinearModel()
    x = m.add_variable("x", 0.0, 1.0, objective=1.0)
    y = m.add_variable("y", 0.0, 1.0, objective=1.0)
    m.add_constraint({x: 1.0, y: 1.0}, "<=", 1.0)
    res = solve_lp(m)
    assert res.status == "optimal"
    assert res.objective == pytest.approx(1.0, abs=1e-9)


def test_solve_lp_pairwise_cut_relaxation():
    # Hand-solved: max z1 + z2 with z1 + z2 <= 1 on [0,1]^2 has value 1,
    # attained e.g. at the fractional point (0.5, 0.5).
    m = LinearModel()
    z1 = m.add_variable("z1", 0.0, 1.0, objective=1.0)
    z2 = m.add_variable("z2", 0.0, 1.0, objective=1.0)
    m.add_constraint({z1: 1.0, z2: 1.0}, "<=", 1.0)
    res = solve_lp(m)
    assert res.objective == pytest.approx(1.0, abs=1e-9)
    assert res.values[z1] + res.values[z2] <= 1.0 + 1e-7


def test_solve_lp_infeasible():
    m = LinearModel()
    x = m.add_variable("x", 0.0, 1.0)
    m.add_constraint({x: 1.0}, ">=", 2.0)
    assert solve_lp(m).status == "infeasible"


def test_bnb_pure_binary():
    m = LinearModel()
    x = m.add_binary("x", objective=1.0)
    y = m.add_binary("y", objective=1.0)
    m.add_constraint({x: 1.0, y: 1.0}, "<=", 1.0)
    res = branch_and_bound(m)
    assert res.status == "optimal"
    assert res.objective == pytest.approx(1.0, abs=1e-9)


def test_bnb_knapsack_matches_enumeration():
    best = max(
        3 * a + 2 * b + 2 * c
        for a, b, c in itertools.product((0, 1), repeat=3)
        if 2 * a + 2 * b + 2 * c <= 4
    )
    assert best == 5
    res = branch_and_bound(knapsack_model())
    assert res.status == "optimal"
    assert res.objective == pytest.approx(5.0, abs=1e-9)
    assert res.objective <= res.bound + 1e-6


def triangle_cover_model():
    # One continuous slot over three points that pairwise fit together but
    # cannot all share a facility: max z1+z2+z3, each z <= 1 individually.
    m = LinearModel()
    zs = [m.add_binary(f"z{i}", objective=1.0) for i in range(3)]
    for z in zs:
        m.add_constraint({z: 1.0}, "<=", 1.0)
    return m, zs


def test_bnb_callback_adds_three_wise_cut_once():
    # Brute force over z in {0,1}^3 with the triple cut: best = 2.
    m, zs = triangle_cover_model()
    calls = []

    def callback(values):
        if sum(values[z] for z in zs) > 2.5:
            calls.append(1)
            return [Constraint({z: 1.0 for z in zs}, "<=", 2.0, "triple")]
        return []

    res = branch_and_bound(m, callback)
    assert res.status == "optimal"
    assert res.objective == pytest.approx(2.0, abs=1e-9)
    assert len(calls) == 1


def test_bnb_callback_contract_error_on_unviolated_cut():
    m, zs = triangle_cover_model()

    def callback(values):
        return [Constraint({zs[0]: 1.0}, "<=", 3.0, "useless")]

    with pytest.raises(ContractError):
        branch_and_bound(m, callback)


def test_bnb_preloaded_cuts_match_lazy_separation():
    lazy_model, zs = triangle_cover_model()

    def callback(values):
        if sum(values[z] for z in zs) > 2.5:
            return [Constraint({z: 1.0 for z in zs}, "<=", 2.0)]
        return []

    lazy = branch_and_bound(lazy_model, callback)

    full_model, zs2 = triangle_cover_model()
    full_model.add_constraint({z: 1.0 for z in zs2}, "<=", 2.0)
    full = branch_and_bound(full_model, lambda values: [])
    assert lazy.objective == full.objective


def test_bnb_infeasible_model():
    m = LinearModel()
    x = m.add_binary("x")
    m.add_constraint({x: 1.0}, ">=", 2.0)
    res = branch_and_bound(m)
    assert res.status == "infeasible"
    assert res.values is None


def test_bnb_deterministic_repeat():
    def run():
        m = knapsack_model()
        res = branch_and_bound(m)
        return res.objective, res.bound, res.values, res.stats.nodes, res.stats.lp_iterations

    assert run() == run()


def test_bnb_node_limit_reports_bound():
    m = knapsack_model()
    res = branch_and_bound(m, limits=SolveLimits(node_limit=1))
    assert res.bound >= res.objective - 1e-9


def test_limits_validation():
    with pytest.raises(InputError):
        SolveLimits(time_limit=-1.0)
    with pytest.raises(InputError):
        SolveLimits(node_limit=0)


def test_lp_export_one_line_per_constraint():
    m = knapsack_model()
    text = m.to_lp_text()
    assert "maximize" in text
    assert "cap:" in text
    assert "+2 a +2 b +2 c <= 4" in text
    assert "integer" in text
    # one line per constraint
    body = [line for line in text.splitlines() if line.strip().startswith("cap")]
    assert len(body) == 1


def test_model_validation():
    m = LinearModel()
    with pytest.raises(InputError):
        m.add_variable("bad", 1.0, 0.0)
    x = m.add_binary("x")
    with pytest.raises(InputError):
        m.add_constraint({x + 5: 1.0}, "<=", 1.0)
    with pytest.raises(InputError):
        m.add_constraint({x: 1.0}, "=<", 1.0)
    with pytest.raises(InputError):
        m.add_constraint({x: float("nan")}, "<=", 1.0)
