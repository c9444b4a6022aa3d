"""Ear decomposition and the sparse solver built on it."""

import numpy as np
import pytest
from hypothesis import given, settings

from rapkit.ear import (
    Ear,
    ear_decomposition,
    format_ears,
    parse_ear_order,
    solve_ear,
)
from rapkit.graph_core import (
    BipartiteMultigraph,
    GraphError,
    allowed_edges,
    matching_covered_components,
)
from rapkit.instance import (
    InstanceError,
    make_instance,
    uniform_instance,
    verify_solution,
)

from oracles import brute_feasible, max_matching_size
from strategies import small_instance
from test_graph_core import C4_EDGES, gk_graph


def path_nodes(g, edge_ids):
    """Node sequence of an edge path, tagged ('r', i) / ('t', j)."""
    ends = []
    for e in edge_ids:
        r, t = g.edges[e]
        ends.append((("r", r), ("t", t)))
    if len(ends) == 1:
        return list(ends[0])
    first = ends[0][0] if ends[0][0] not in ends[1] else ends[0][1]
    seq = [first]
    for pair in ends:
        a, b = pair
        nxt = b if a == seq[-1] else a
        assert seq[-1] in pair, "edges do not chain into a path"
        seq.append(nxt)
    return seq


def check_decomposition(g, comp, dec):
    """Structural audit: odd ears, endpoints in the prefix, fresh interiors."""
    first = dec.ears[0]
    assert len(first.edge_ids) == 1 and not first.trivial
    seen = set(path_nodes(g, first.edge_ids))
    covered = set(first.edge_ids)
    for ear in dec.ears[1:]:
        nodes = path_nodes(g, ear.edge_ids)
        assert len(ear.edge_ids) % 2 == 1
        if ear.trivial:
            assert len(ear.edge_ids) == 1
        assert nodes[0] in seen and nodes[-1] in seen
        assert nodes[0][0] != nodes[-1][0], "ear endpoints on one side"
        interior = nodes[1:-1]
        assert len(set(interior)) == len(interior)
        for v in interior:
            assert v not in seen
        seen.update(nodes)
        covered.update(ear.edge_ids)
    comp_nodes = {("r", r) for r in comp.r_nodes} | {("t", t) for t in comp.t_nodes}
    assert seen == comp_nodes
    assert covered == set(comp.edge_ids)


def test_single_edge_component():
    g = BipartiteMultigraph(1, 1, [(0, 0)])
    dec = ear_decomposition(g)
    assert dec.ears == (Ear((0,), trivial=False),)
    assert dec.edge_set() == {0}


def test_four_cycle_decomposition():
    g = BipartiteMultigraph(2, 2, C4_EDGES)
    dec = ear_decomposition(g)
    assert dec.ears == (
        Ear((0,), trivial=False),
        Ear((1, 2, 3), trivial=False),
    )
    comp = matching_covered_components(g)[0]
    check_decomposition(g, comp, dec)


def test_six_cycle_decomposition():
    edges = [(0, 0), (1, 0), (1, 1), (2, 1), (2, 2), (0, 2)]
    g = BipartiteMultigraph(3, 3, edges)
    dec = ear_decomposition(g)
    assert dec.ears == (
        Ear((0,), trivial=False),
        Ear((1, 2, 3, 4, 5), trivial=False),
    )


def test_parallel_pair_decomposition():
    g = BipartiteMultigraph(1, 1, [(0, 0), (0, 0)])
    dec = ear_decomposition(g)
    assert dec.ears == (
        Ear((0,), trivial=False),
        Ear((1,), trivial=True),
    )
    assert dec.nontrivial() == ()


def test_not_matching_covered_rejected():
    # path of three edges: middle edge is on no perfect matching
    g = BipartiteMultigraph(2, 2, [(0, 0), (1, 0), (1, 1)])
    with pytest.raises(GraphError, match="not matching-covered"):
        ear_decomposition(g)
    # two separate components at once are also rejected
    g2 = BipartiteMultigraph(2, 2, [(0, 0), (1, 1)])
    with pytest.raises(GraphError, match="not matching-covered"):
        ear_decomposition(g2)


def test_gk_decomposition_is_structural():
    for k in (3, 4, 5):
        g = gk_graph(k)
        comp = matching_covered_components(g)[0]
        dec = ear_decomposition(g)
        check_decomposition(g, comp, dec)


def test_random_order_decomposition_is_structural():
    g = gk_graph(3)
    comp = matching_covered_components(g)[0]
    for seed in range(6):
        dec = ear_decomposition(g, rng=np.random.default_rng(seed))
        check_decomposition(g, comp, dec)


def test_solve_ear_four_cycle():
    inst = uniform_instance(2, 2, C4_EDGES)
    sol = solve_ear(inst)
    assert sol.edge_ids == frozenset({0, 1, 2, 3})
    assert sol.cost == 4.0


def test_solve_ear_keeps_vulnerable_parallel_pair():
    inst = uniform_instance(1, 1, [(0, 0), (0, 0)])
    sol = solve_ear(inst)
    assert sol.edge_ids == frozenset({0, 1})

    lopsided = make_instance(1, 1, [(0, 0), (0, 0)], vulnerable=[0], costs=[1, 1])
    assert solve_ear(lopsided).edge_ids == frozenset({0, 1})

    safe_first = make_instance(1, 1, [(0, 0), (0, 0)], vulnerable=[1], costs=[1, 1])
    assert solve_ear(safe_first).edge_ids == frozenset({0})


def test_solve_ear_trace_collects_decompositions():
    inst = uniform_instance(2, 2, C4_EDGES)
    decs = []
    sol = solve_ear(inst, trace=decs)
    assert len(decs) == 1
    covered = frozenset(e for ear in decs[0].ears for e in ear.edge_ids)
    assert covered == sol.edge_ids


def test_solve_ear_gk_within_bound():
    # the depth-first ear growth pays one four-cycle plus a single long ear
    for k in (3, 4, 5):
        g = gk_graph(k)
        inst = uniform_instance(g.n_r, g.n_t, list(g.edges))
        sol = solve_ear(inst)
        verify_solution(inst, sol)
        assert 2 * k + 2 <= len(sol.edge_ids) <= 3 * k
        assert len(sol.edge_ids) == 2 * k + 3
        assert sol.edge_ids == solve_ear(inst).edge_ids


def test_solve_ear_random_orders_stay_feasible():
    g = gk_graph(3)
    inst = uniform_instance(g.n_r, g.n_t, list(g.edges))
    sizes = set()
    for seed in range(10):
        sol = solve_ear(inst, ear_order=f"random:{seed}")
        verify_solution(inst, sol)
        assert len(sol.edge_ids) <= 3 * 3
        sizes.add(len(sol.edge_ids))
        again = solve_ear(inst, ear_order=f"random:{seed}")
        assert again.edge_ids == sol.edge_ids
    assert sizes, "no runs recorded"


def test_solve_ear_unbalanced():
    # two workers, one task: completion adds a dummy task, output drops it
    inst = uniform_instance(2, 1, [(0, 0), (1, 0)])
    sol = solve_ear(inst)
    assert sol.edge_ids <= {0, 1}
    edges = list(inst.graph.edges)
    for f in sorted(inst.vulnerable):
        kept = [e for e in sol.edge_ids if e != f]
        assert max_matching_size(2, 1, tuple(edges[e] for e in kept)) == 1


def test_solve_ear_nominal_keeps_only_matching():
    # a perfect matching plus parallel copies: copies are trivial ears
    edges = [(0, 0), (1, 1), (0, 0), (1, 1)]
    inst = make_instance(2, 2, edges, vulnerable=[], costs=[1, 1, 1, 1])
    assert solve_ear(inst).edge_ids == frozenset({0, 1})


def test_solve_ear_infeasible_rejected():
    inst = uniform_instance(1, 1, [(0, 0)])
    with pytest.raises(InstanceError, match="infeasible instance"):
        solve_ear(inst)


def test_parse_ear_order():
    assert parse_ear_order("lowest") is None
    rng = parse_ear_order("random:7")
    assert isinstance(rng, np.random.Generator)
    for bad in ("", "best", "random:", "random:x"):
        with pytest.raises(ValueError, match="unknown ear order"):
            parse_ear_order(bad)


def test_format_ears():
    g = BipartiteMultigraph(2, 2, C4_EDGES)
    text = format_ears(ear_decomposition(g))
    assert text == "ear 0 e0\near 1 e1,e2,e3"
    g2 = BipartiteMultigraph(1, 1, [(0, 0), (0, 0)])
    assert format_ears(ear_decomposition(g2)).splitlines()[1] == "ear 1 e1 trivial"


@settings(max_examples=120, deadline=None)
@given(small_instance())
def test_solve_ear_feasible_and_sparse(data):
    n_r, n_t, edges, vulnerable, costs = data
    if n_r != n_t:
        return
    inst = make_instance(n_r, n_t, edges, vulnerable=vulnerable, costs=costs)
    x_all = set(range(len(edges)))
    if not brute_feasible(n_r, n_t, edges, vulnerable, x_all):
        return
    sol = solve_ear(inst)
    assert brute_feasible(n_r, n_t, edges, vulnerable, set(sol.edge_ids))
    assert len(sol.edge_ids) <= 3 * n_t


@settings(max_examples=80, deadline=None)
@given(small_instance())
def test_decomposition_structure_and_ear_count(data):
    n_r, n_t, edges, vulnerable, costs = data
    if n_r != n_t:
        return
    g = BipartiteMultigraph(n_r, n_t, edges)
    if max_matching_size(n_r, n_t, tuple(edges)) != n_t:
        return
    active = allowed_edges(g)
    for comp in matching_covered_components(g, active):
        if not comp.edge_ids:
            continue
        dec = ear_decomposition(g, comp.edge_ids)
        check_decomposition(g, comp, dec)
        assert len(dec.nontrivial()) <= max(len(comp.t_nodes) - 1, 0)
