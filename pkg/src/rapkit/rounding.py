"""Randomized LP rounding for robust assignment.

The solver relaxes the problem, then repeatedly picks an uncovered
vulnerable edge f, samples a perfect matching avoiding f from the Birkhoff
decomposition of the f-block of the fractional optimum, and keeps the
sampled edges that merge distinct connected components of the current
selection. Non-uniform instances are first uniformized (parallel copies for
invulnerable edges) and the result is mapped back and pruned.

One corner case needs care on multigraphs: when the selected f is an
isolated edge of the current selection and the sampled matching covers f's
endpoints with an edge parallel to f, that edge merges nothing yet must be
kept, otherwise f would never become covered. The parallel pair then forms
its own two-node component, which is matching-covered, so the loop
invariant is unaffected.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from rapkit.decompose import birkhoff_decompose, sample
from rapkit.graph_core import components, matching_covered_components, max_matching
from rapkit.instance import (
    NOMINAL_SCENARIO,
    InstanceError,
    InstanceMapping,
    RapInstance,
    Solution,
    prune_to_minimal,
    solution_for,
    uniformize,
    verify_solution,
)
from rapkit.lp import FractionalSolution, RapLp, build_lp, solve_lp

TRUNCATE_EPS = 1e-9


@dataclass(frozen=True)
class IterationRecord:
    scenario: int
    sampled: frozenset[int]
    added: frozenset[int]
    components_before: int
    components_after: int


@dataclass(frozen=True)
class RoundTrace:
    records: tuple[IterationRecord, ...]

    @property
    def iterations(self) -> int:
        return len(self.records)


@dataclass(frozen=True)
class RoundPlan:
    """Reusable per-instance state: the (possibly uniformized) LP optimum.

    Building a plan once lets many seeds share the LP solve.
    """

    original: RapInstance
    mapping: InstanceMapping | None
    work: RapInstance
    lp: RapLp
    fractional: FractionalSolution


class _UnionFind:
    def __init__(self, n: int):
        self.parent = list(range(n))
        self.count = n

    def find(self, v: int) -> int:
        root = v
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[v] != root:
            self.parent[v], v = root, self.parent[v]
        return root

    def union(self, a: int, b: int) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        self.parent[ra] = rb
        self.count -= 1
        return True


def _components_uf(inst: RapInstance, x_set: frozenset[int]) -> _UnionFind:
    g = inst.graph
    uf = _UnionFind(g.n_r + g.n_t)
    for e in x_set:
        r, t = g.edges[e]
        uf.union(r, g.n_r + t)
    return uf


def _uncovered_direct(inst: RapInstance, x_set: frozenset[int]) -> int | None:
    g = inst.graph
    outside = frozenset(range(g.n_edges)) - x_set
    for f in sorted(inst.vulnerable):
        if not max_matching(g, outside | {f}).perfect:
            return f
    return None


def _uncovered_fast(inst: RapInstance, x_set: frozenset[int]) -> int | None:
    """Uncovered test relying on the loop invariant.

    When every edge-bearing component of the selection is matching-covered,
    a vulnerable edge is uncovered exactly when some node is still isolated
    (then nothing is covered) or when the edge is alone in its component.
    """
    if not inst.vulnerable:
        return None
    lowest = min(inst.vulnerable)
    comps = components(inst.graph, x_set)
    candidates = []
    for r_nodes, t_nodes, edge_ids in comps:
        if len(r_nodes) + len(t_nodes) == 1:
            return lowest
        if len(edge_ids) == 1:
            (e,) = edge_ids
            if e in inst.vulnerable:
                candidates.append(e)
    return min(candidates, default=None)


def uncovered_vulnerable_edge(
    inst: RapInstance, x_set: frozenset[int], debug: bool = False
) -> int | None:
    """Lowest-id vulnerable edge f with no perfect matching in x_set minus f.

    Uses the structural fast path, which is valid whenever every
    edge-bearing component of the selection is matching-covered (always
    true inside the rounding loop). ``debug`` re-runs the direct
    per-scenario test and checks agreement.
    """
    fast = _uncovered_fast(inst, x_set)
    if debug:
        direct = _uncovered_direct(inst, x_set)
        if fast != direct:
            raise AssertionError(
                f"fast uncovered test gave {fast}, direct test gave {direct}"
            )
    return fast


def _sample_and_filter(
    inst: RapInstance,
    x_set: frozenset[int],
    frac: FractionalSolution,
    f: int,
    rng: np.random.Generator,
) -> tuple[frozenset[int], frozenset[int]]:
    """Core of one iteration; returns (kept edges, full sampled matching)."""
    g = inst.graph
    avoid = None if f == NOMINAL_SCENARIO else f
    values = [0.0 if v < TRUNCATE_EPS else v for v in frac.x[f]]
    combination = birkhoff_decompose(g, avoid, values)
    matched = sample(combination, rng)

    uf = _components_uf(inst, x_set)
    rescue_pair: tuple[int, int] | None = None
    if avoid is not None and f in x_set:
        fr, ft = g.edges[f]
        # f is an isolated edge iff no other selected edge touches its ends
        alone = all(
            e == f or (g.edges[e][0] != fr and g.edges[e][1] != ft)
            for e in x_set
        )
        if alone:
            rescue_pair = (fr, ft)

    delta = set()
    for e in sorted(matched.edge_ids):
        r, t = g.edges[e]
        if uf.find(r) != uf.find(g.n_r + t):
            delta.add(e)
        elif rescue_pair is not None and (r, t) == rescue_pair:
            delta.add(e)
    return frozenset(delta), matched.edge_ids


def rounding_iteration(
    inst: RapInstance,
    x_set: frozenset[int],
    frac: FractionalSolution,
    f: int,
    rng: np.random.Generator,
) -> frozenset[int]:
    """Sample a matching avoiding f and keep its component-merging edges.

    Components are those of (nodes, x_set), fixed for the whole scan. A
    sampled edge parallel to an isolated-edge f is kept as well (see the
    module note); everything else inside a single component is dropped.
    """
    delta, _ = _sample_and_filter(inst, x_set, frac, f, rng)
    return delta


def prepare(inst: RapInstance) -> RoundPlan:
    """Uniformize if needed and solve the relaxation once."""
    if not inst.graph.balanced:
        raise InstanceError("apply balanced_completion first")
    mapping: InstanceMapping | None = None
    work = inst
    if inst.vulnerable and not inst.uniform:
        mapping = uniformize(inst)
        work = mapping.instance
    lp = build_lp(work)
    frac = solve_lp(lp)
    return RoundPlan(
        original=inst, mapping=mapping, work=work, lp=lp, fractional=frac
    )


def _assert_covered_components(inst: RapInstance, x_set: frozenset[int]) -> None:
    for comp in matching_covered_components(inst.graph, x_set):
        if comp.edge_ids and not comp.matching_covered:
            raise AssertionError(
                f"component with edges {sorted(comp.edge_ids)} is not matching-covered"
            )


def solve_lp_round(
    inst: RapInstance,
    seed: int = 0,
    plan: RoundPlan | None = None,
    debug: bool = False,
) -> tuple[Solution, RoundTrace]:
    """Round the relaxation to a feasible solution, then prune it minimal.

    ``plan`` carries the fractional optimum so repeated seeds skip the LP
    solve. ``debug`` re-verifies the covered test and the matching-covered
    component invariant after every iteration.
    """
    if plan is None or plan.original is not inst:
        plan = prepare(inst)
    work, frac = plan.work, plan.fractional
    rng = np.random.default_rng(seed)
    m = work.graph.n_edges

    x_set: frozenset[int] = frozenset()
    records: list[IterationRecord] = []

    def next_scenario(xs: frozenset[int]) -> int | None:
        if not work.vulnerable:
            # nothing is vulnerable: done once the selection holds a matching
            outside = frozenset(range(m)) - xs
            return None if max_matching(work.graph, outside).perfect else NOMINAL_SCENARIO
        return uncovered_vulnerable_edge(work, xs, debug=debug)

    while (f := next_scenario(x_set)) is not None:
        if len(records) >= m:
            raise RuntimeError("rounding exceeded its iteration bound")
        uf_before = _components_uf(work, x_set)
        delta, sampled = _sample_and_filter(work, x_set, frac, f, rng)
        x_set = x_set | delta
        uf_after = _components_uf(work, x_set)
        records.append(
            IterationRecord(
                scenario=f,
                sampled=sampled,
                added=delta,
                components_before=uf_before.count,
                components_after=uf_after.count,
            )
        )
        if debug:
            _assert_covered_components(work, x_set)
            if f != NOMINAL_SCENARIO:
                outside = frozenset(range(m)) - x_set
                if not max_matching(work.graph, outside | {f}).perfect:
                    raise AssertionError(f"scenario {f} still uncovered after its iteration")

    decoded = plan.mapping.decode(x_set) if plan.mapping is not None else x_set
    pruned = prune_to_minimal(inst, solution_for(inst, decoded))
    verify_solution(inst, pruned)
    return pruned, RoundTrace(tuple(records))


def format_trace(trace: RoundTrace) -> str:
    """One line per iteration, stable and diff-friendly."""
    lines = []
    for i, rec in enumerate(trace.records, start=1):
        scen = "nominal" if rec.scenario == NOMINAL_SCENARIO else f"e{rec.scenario}"
        added = ",".join(map(str, sorted(rec.added))) or "-"
        lines.append(
            f"iter {i} scenario {scen} added {added} "
            f"components {rec.components_before}->{rec.components_after}"
        )
    return "\n".join(lines) + ("\n" if lines else "")

