"""Tests for instances, verification, pruning, and the two transformations."""

from __future__ import annotations

import pytest
from hypothesis import given, settings

import oracles
from strategies import small_instance

from rapkit.graph_core import matching_covered_components
from rapkit.instance import (
    NOMINAL_SCENARIO,
    InfeasibleSolutionError,
    InstanceError,
    balanced_completion,
    check_feasible,
    format_instance,
    format_solution,
    is_feasible_set,
    make_instance,
    parse_instance,
    parse_solution,
    prune_to_minimal,
    solution_for,
    uniform_instance,
    uniformize,
    verify_solution,
)

C4_EDGES = [(0, 0), (1, 0), (1, 1), (0, 1)]


def c4_uniform():
    return uniform_instance(2, 2, C4_EDGES)


class TestCheckFeasible:
    def test_c4_uniform(self):
        assert check_feasible(c4_uniform()) is True

    def test_single_vulnerable_edge(self):
        inst = uniform_instance(1, 1, [(0, 0)])
        assert check_feasible(inst) is False

    def test_g3_uniform(self):
        from test_graph_core import gk_graph

        g = gk_graph(3)
        inst = uniform_instance(g.n_r, g.n_t, list(g.edges))
        assert check_feasible(inst) is True

    def test_empty_vulnerable_needs_pm_only(self):
        inst = make_instance(1, 1, [(0, 0)], [], [1.0])
        assert check_feasible(inst) is True

    def test_unbalanced_rejected(self):
        inst = make_instance(2, 1, [(0, 0), (1, 0)], [], [1.0, 1.0])
        with pytest.raises(InstanceError, match="apply balanced_completion first"):
            check_feasible(inst)

    @settings(max_examples=100)
    @given(small_instance())
    def test_matches_brute_force(self, data):
        n_r, n_t, edges, vulnerable, costs = data
        inst = make_instance(n_r, n_t, edges, vulnerable, costs)
        assert check_feasible(inst) == oracles.brute_feasible(
            n_r, n_t, edges, vulnerable, set(range(len(edges)))
        )


class TestVerifySolution:
    def test_c4_full_certificate(self):
        inst = c4_uniform()
        cert = verify_solution(inst, solution_for(inst, range(4)))
        assert set(cert.matchings) == {0, 1, 2, 3}
        # avoiding an edge of C4 forces the complementary perfect matching
        assert cert.matchings[0] == frozenset({1, 3})
        assert cert.matchings[1] == frozenset({0, 2})
        for f, pm in cert.matchings.items():
            assert f not in pm

    def test_c4_one_matching_infeasible(self):
        inst = c4_uniform()
        with pytest.raises(InfeasibleSolutionError, match="infeasible at scenario e0") as ei:
            verify_solution(inst, solution_for(inst, {0, 2}))
        assert ei.value.scenario == 0

    def test_nominal_certificate(self):
        inst = make_instance(2, 2, C4_EDGES, [], [1.0] * 4)
        cert = verify_solution(inst, solution_for(inst, {0, 2}))
        assert cert.matchings == {NOMINAL_SCENARIO: frozenset({0, 2})}

    def test_nominal_infeasible(self):
        inst = make_instance(2, 2, C4_EDGES, [], [1.0] * 4)
        with pytest.raises(InfeasibleSolutionError):
            verify_solution(inst, solution_for(inst, {0, 1}))

    @settings(max_examples=100)
    @given(small_instance())
    def test_matches_brute_force_on_subsets(self, data):
        n_r, n_t, edges, vulnerable, costs = data
        inst = make_instance(n_r, n_t, edges, vulnerable, costs)
        # spot-check the full set and one arbitrary half-size subset
        for ids in [set(range(len(edges))), set(range(0, len(edges), 2))]:
            expected = oracles.brute_feasible(n_r, n_t, edges, vulnerable, ids)
            assert is_feasible_set(inst, ids) == expected


class TestPruneToMinimal:
    def test_c4_uniform_already_minimal(self):
        inst = c4_uniform()
        x = solution_for(inst, range(4))
        assert prune_to_minimal(inst, x).edge_ids == frozenset(range(4))

    def test_nominal_prunes_to_one_matching(self):
        inst = make_instance(2, 2, C4_EDGES, [], [1.0] * 4)
        out = prune_to_minimal(inst, solution_for(inst, range(4)))
        assert len(out.edge_ids) == 2
        assert is_feasible_set(inst, out.edge_ids)

    def test_infeasible_input_propagates(self):
        inst = c4_uniform()
        with pytest.raises(InfeasibleSolutionError):
            prune_to_minimal(inst, solution_for(inst, {0, 2}))

    @settings(max_examples=60, deadline=None)
    @given(small_instance())
    def test_output_structure(self, data):
        n_r, n_t, edges, vulnerable, costs = data
        inst = make_instance(n_r, n_t, edges, vulnerable, costs)
        if not oracles.brute_feasible(n_r, n_t, edges, vulnerable, set(range(len(edges)))):
            return
        out = prune_to_minimal(inst, solution_for(inst, range(len(edges))))
        ids = out.edge_ids
        assert is_feasible_set(inst, ids)
        # no single edge is removable
        for e in ids:
            assert not is_feasible_set(inst, ids - {e})
        # structural shape of minimal solutions: every component is
        # matching-covered and no vulnerable edge stands alone
        for comp in matching_covered_components(inst.graph, ids):
            if comp.edge_ids:
                assert comp.matching_covered
            if len(comp.edge_ids) == 1:
                (e,) = comp.edge_ids
                assert e not in inst.vulnerable


class TestBalancedCompletion:
    def test_adds_dummies(self):
        inst = make_instance(3, 2, [(0, 0), (1, 0), (2, 1)], [0], [1.0, 2.0, 3.0])
        mapping = balanced_completion(inst)
        g2 = mapping.instance.graph
        assert (g2.n_r, g2.n_t) == (3, 3)
        assert g2.n_edges == 6
        assert mapping.instance.vulnerable == frozenset({0})
        assert all(mapping.instance.costs[e] == 0.0 for e in range(3, 6))
        assert mapping.always_include == frozenset({3, 4, 5})

    def test_already_balanced_identity(self):
        inst = c4_uniform()
        mapping = balanced_completion(inst)
        assert mapping.instance.graph.n_edges == 4
        assert mapping.always_include == frozenset()
        assert not mapping.swapped_sides

    def test_swap_when_t_larger(self):
        inst = make_instance(1, 2, [(0, 0), (0, 1)], [0, 1], [1.0, 1.0])
        mapping = balanced_completion(inst)
        assert mapping.swapped_sides
        g2 = mapping.instance.graph
        assert (g2.n_r, g2.n_t) == (2, 2)
        # original edges keep their ids with endpoints transposed
        assert g2.edges[0] == (0, 0) and g2.edges[1] == (1, 0)

    def test_decode_drops_dummies(self):
        inst = make_instance(3, 2, [(0, 0), (1, 0), (2, 1)], [], [1.0, 1.0, 1.0])
        mapping = balanced_completion(inst)
        encoded = mapping.encode({0, 2})
        assert encoded == frozenset({0, 2, 3, 4, 5})
        assert mapping.decode(encoded) == frozenset({0, 2})

    def test_encode_preserves_cost(self):
        inst = make_instance(3, 2, [(0, 0), (1, 0), (2, 1)], [], [1.0, 2.0, 3.0])
        mapping = balanced_completion(inst)
        x = {1, 2}
        assert mapping.instance.cost_of(mapping.encode(x)) == inst.cost_of(x)


class TestUniformize:
    def test_copies_invulnerable(self):
        inst = make_instance(2, 2, C4_EDGES, [0, 2], [1.0, 2.0, 3.0, 4.0])
        mapping = uniformize(inst)
        new = mapping.instance
        assert new.graph.n_edges == 6
        assert new.uniform
        # copies sit after the originals, same endpoints and cost
        assert new.graph.edges[4] == inst.graph.edges[1]
        assert new.costs[4] == inst.costs[1]
        assert mapping.decode_map[4] == 1 and mapping.decode_map[5] == 3

    def test_already_uniform_identity(self):
        inst = c4_uniform()
        mapping = uniformize(inst)
        assert mapping.instance.graph.n_edges == 4
        assert mapping.decode(frozenset({1, 2})) == frozenset({1, 2})

    def test_encode_at_most_doubles_cost(self):
        inst = make_instance(2, 2, C4_EDGES, [0], [1.0, 2.0, 3.0, 4.0])
        mapping = uniformize(inst)
        x = {0, 1, 2, 3}
        encoded = mapping.encode(x)
        assert mapping.instance.cost_of(encoded) <= 2 * inst.cost_of(x)
        assert is_feasible_set(mapping.instance, encoded)

    def test_decode_projects_copies(self):
        # a feasible uniformized solution may pair an original edge's copy
        # with other originals; decoding must land back on original ids
        inst = make_instance(2, 2, C4_EDGES, [0], [1.0] * 4)
        mapping = uniformize(inst)
        # copies of edges 1 and 3 are ids 4 and 6 here
        assert is_feasible_set(mapping.instance, {0, 2, 4, 6})
        decoded = mapping.decode({0, 2, 4, 6})
        assert decoded == frozenset({0, 1, 2, 3})
        assert is_feasible_set(inst, decoded)
        # plain id intersection would keep only {0, 2}, which is infeasible
        assert not is_feasible_set(inst, {0, 2})

    @settings(max_examples=60, deadline=None)
    @given(small_instance())
    def test_round_trip_feasibility(self, data):
        n_r, n_t, edges, vulnerable, costs = data
        inst = make_instance(n_r, n_t, edges, vulnerable, costs)
        full = set(range(len(edges)))
        if not oracles.brute_feasible(n_r, n_t, edges, vulnerable, full):
            return
        mapping = uniformize(inst)
        encoded = mapping.encode(full)
        assert is_feasible_set(mapping.instance, encoded)
        assert mapping.instance.cost_of(encoded) <= 2 * inst.cost_of(full) + 1e-12
        decoded = mapping.decode(encoded)
        assert decoded <= full
        assert is_feasible_set(inst, decoded)


class TestTextFormats:
    def test_instance_round_trip(self):
        inst = make_instance(2, 2, C4_EDGES, [0, 2], [1.0, 2.5, 3.0, 0.0])
        text = format_instance(inst)
        back = parse_instance(text)
        assert back.graph.edges == inst.graph.edges
        assert back.vulnerable == inst.vulnerable
        assert back.costs == inst.costs

    def test_parse_with_comments(self):
        text = """
        # sample instance
        rap 1
        graph 1 1
        edge 0 0 2 v  # the only edge
        """
        inst = parse_instance(text)
        assert inst.graph.n_edges == 1
        assert inst.costs == (2.0,)
        assert inst.vulnerable == frozenset({0})

    def test_parse_rejects_bad_header(self):
        with pytest.raises(InstanceError, match="rap 1"):
            parse_instance("rap 2\ngraph 1 1\n")

    def test_parse_rejects_bad_flag(self):
        with pytest.raises(InstanceError, match="'v' or 'i'"):
            parse_instance("rap 1\ngraph 1 1\nedge 0 0 1 x\n")

    def test_parse_rejects_bad_endpoint(self):
        with pytest.raises(InstanceError):
            parse_instance("rap 1\ngraph 1 1\nedge 0 5 1 v\n")

    def test_solution_round_trip(self):
        ids = frozenset({3, 0, 7})
        text = format_solution(ids)
        assert text.splitlines()[0] == "solution 3"
        assert parse_solution(text) == ids

    def test_solution_count_mismatch(self):
        with pytest.raises(InstanceError, match="header says"):
            parse_solution("solution 2\n1\n")
