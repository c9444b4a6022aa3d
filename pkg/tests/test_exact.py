"""Branch-and-bound exact solver against full subset enumeration."""

import pytest
from hypothesis import given, settings

from rapkit.exact import BnbConfig, ExactError, lower_bounds, solve_exact
from rapkit.instance import (
    InstanceError,
    make_instance,
    uniform_instance,
    verify_solution,
)

from oracles import brute_exact, brute_exact_unbalanced, min_cost_pm_value
from strategies import small_instance
from test_graph_core import C4_EDGES, gk_graph


def test_four_cycle_needs_all_edges():
    inst = uniform_instance(2, 2, C4_EDGES)
    sol = solve_exact(inst)
    assert sol.cost == 4.0
    assert sol.edge_ids == frozenset({0, 1, 2, 3})


def test_gk_optimum_is_long_cycle():
    g = gk_graph(3)
    inst = uniform_instance(g.n_r, g.n_t, list(g.edges))
    sol = solve_exact(inst)
    assert sol.cost == 8.0
    verify_solution(inst, sol)


def test_nominal_is_min_cost_matching():
    edges = [(0, 0), (0, 1), (1, 0), (1, 1)]
    costs = [3.0, 1.0, 2.0, 5.0]
    inst = make_instance(2, 2, edges, vulnerable=[], costs=costs)
    sol = solve_exact(inst)
    assert sol.cost == min_cost_pm_value(2, 2, edges, costs) == 3.0
    assert sol.edge_ids == frozenset({1, 2})


def test_ties_break_toward_smallest_ids():
    # two disjoint perfect matchings of equal cost
    inst = uniform_instance(1, 1, [(0, 0), (0, 0), (0, 0)])
    sol = solve_exact(inst)
    assert sol.cost == 2.0
    assert sol.edge_ids == frozenset({0, 1})


def test_zero_cost_padding_is_dropped():
    # a costless vulnerable parallel edge: optimum keeps it anyway for
    # robustness, but never pads with useless extras
    edges = [(0, 0), (0, 0), (1, 1), (1, 1)]
    inst = make_instance(2, 2, edges, vulnerable=[0, 1, 2, 3], costs=[1, 0, 1, 0])
    sol = solve_exact(inst)
    assert sol.edge_ids == frozenset({0, 1, 2, 3})
    assert sol.cost == 2.0


def test_unbalanced_duplicates_the_column():
    inst = uniform_instance(2, 1, [(0, 0), (1, 0)])
    sol = solve_exact(inst)
    oracle = brute_exact_unbalanced(2, 1, [(0, 0), (1, 0)], {0, 1}, [1.0, 1.0])
    assert oracle is not None
    assert sol.cost == oracle[0]
    assert sol.edge_ids == oracle[1]


def test_infeasible_rejected():
    inst = uniform_instance(1, 1, [(0, 0)])
    with pytest.raises(InstanceError, match="infeasible instance"):
        solve_exact(inst)


def test_guard_rejects_large_instances():
    edges = [(i, i) for i in range(6)] + [(i, (i + 1) % 6) for i in range(6)]
    inst = uniform_instance(6, 6, edges)
    with pytest.raises(ExactError, match="instance too large for exact solver"):
        solve_exact(inst, BnbConfig(max_edges=11))
    with pytest.raises(ExactError, match="instance too large for exact solver"):
        solve_exact(inst, BnbConfig(node_limit=3))
    with pytest.raises(ExactError, match="instance too large for exact solver"):
        solve_exact(inst, BnbConfig(time_limit=0.0))


def test_determinism():
    g = gk_graph(3)
    inst = uniform_instance(g.n_r, g.n_t, list(g.edges))
    assert solve_exact(inst).edge_ids == solve_exact(inst).edge_ids


def test_lower_bounds_examples():
    inst = uniform_instance(2, 2, C4_EDGES)
    assert lower_bounds(inst) == 4.0
    g = gk_graph(3)
    gi = uniform_instance(g.n_r, g.n_t, list(g.edges))
    assert lower_bounds(gi) == 8.0
    # non-uniform unit costs: matching bound only
    ni = make_instance(2, 2, C4_EDGES, vulnerable=[0], costs=[1, 1, 1, 1])
    assert lower_bounds(ni) >= 2.0


@settings(max_examples=60, deadline=None)
@given(small_instance())
def test_matches_subset_enumeration(data):
    n_r, n_t, edges, vulnerable, costs = data
    if n_r != n_t:
        return
    inst = make_instance(n_r, n_t, edges, vulnerable=vulnerable, costs=costs)
    oracle = brute_exact(n_r, n_t, edges, set(vulnerable), costs)
    if oracle is None:
        with pytest.raises(InstanceError):
            solve_exact(inst)
        return
    sol = solve_exact(inst)
    assert sol.cost == pytest.approx(oracle[0], abs=1e-9)
    assert sol.edge_ids == oracle[1]


@settings(max_examples=40, deadline=None)
@given(small_instance())
def test_lower_bounds_never_exceed_optimum(data):
    n_r, n_t, edges, vulnerable, costs = data
    if n_r != n_t:
        return
    inst = make_instance(n_r, n_t, edges, vulnerable=vulnerable, costs=costs)
    oracle = brute_exact(n_r, n_t, edges, set(vulnerable), costs)
    if oracle is None:
        return
    assert lower_bounds(inst) <= oracle[0] + 1e-6
