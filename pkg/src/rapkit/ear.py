"""Ear-decomposition heuristic for robust assignment.

Every matching-covered bipartite graph can be grown from a single matching
edge by repeatedly attaching odd-length paths (ears) whose endpoints lie on
different sides and already belong to the partial graph.  Keeping only the
starting edge and the non-trivial ears of such a decomposition yields a
sparse spanning subgraph in which every edge still lies on some perfect
matching, which is exactly the structure a robust solution needs.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np

from .graph_core import (
    BipartiteMultigraph,
    GraphError,
    allowed_edges,
    matching_covered_components,
    max_matching,
)
from .instance import (
    InstanceError,
    RapInstance,
    Solution,
    balanced_completion,
    check_feasible,
    solution_for,
    verify_solution,
)

__all__ = [
    "Ear",
    "EarDecomposition",
    "ear_decomposition",
    "format_ears",
    "parse_ear_order",
    "solve_ear",
]


@dataclass(frozen=True)
class Ear:
    """One ear: a path of edge ids in traversal order.

    The first ear in a decomposition is the starting single matching edge.
    A later ear is trivial when it consists of a single edge joining two
    nodes that were both reached earlier.
    """

    edge_ids: tuple[int, ...]
    trivial: bool

    def __len__(self) -> int:
        return len(self.edge_ids)


@dataclass(frozen=True)
class EarDecomposition:
    """Ears in construction order; ears[0] is the starting edge."""

    ears: tuple[Ear, ...]

    def edge_set(self) -> frozenset[int]:
        out: set[int] = set()
        for ear in self.ears:
            out.update(ear.edge_ids)
        return frozenset(out)

    def nontrivial(self) -> tuple[Ear, ...]:
        return tuple(ear for ear in self.ears[1:] if not ear.trivial)


def _pick(items: Sequence[int], rng: Optional[np.random.Generator]) -> int:
    # items is ascending; lowest wins unless a generator is supplied
    if rng is None:
        return items[0]
    return items[int(rng.integers(len(items)))]


def _lex_min_pm(g: BipartiteMultigraph, active: frozenset[int]) -> set[int]:
    """Lexicographically least perfect matching of the active edge set."""
    every = frozenset(g.edge_ids())
    full = len(max_matching(g, forbidden=every - active))
    chosen: set[int] = set()
    used_r: set[int] = set()
    used_t: set[int] = set()
    for e in sorted(active):
        if len(chosen) == full:
            break
        r, t = g.edges[e]
        if r in used_r or t in used_t:
            continue
        rest = frozenset(
            a
            for a in active
            if g.edges[a][0] not in used_r and g.edges[a][0] != r
            and g.edges[a][1] not in used_t and g.edges[a][1] != t
        )
        if len(max_matching(g, forbidden=every - rest)) == full - len(chosen) - 1:
            chosen.add(e)
            used_r.add(r)
            used_t.add(t)
    return chosen


def ear_decomposition(
    g: BipartiteMultigraph,
    component_edges: Optional[Iterable[int]] = None,
    rng: Optional[np.random.Generator] = None,
) -> EarDecomposition:
    """Decompose one matching-covered component of g into ears.

    component_edges restricts attention to a single component (all edges of
    g by default).  The starting edge is the lowest-numbered edge of the
    component; each ear is grown depth-first, preferring edges that reach
    pairs not yet covered, so ears come out long and few.  Choices follow
    ascending edge ids unless rng is given, which shuffles them instead.
    """
    if component_edges is None:
        active = frozenset(g.edge_ids())
    else:
        active = frozenset(component_edges)
    comps = [c for c in matching_covered_components(g, active) if c.edge_ids]
    if len(comps) != 1 or not comps[0].matching_covered:
        raise GraphError("component not matching-covered")

    matching = _lex_min_pm(g, active)
    match_r: dict[int, int] = {}
    match_t: dict[int, int] = {}
    for e in sorted(matching):
        r, t = g.edges[e]
        match_r[r] = e
        match_t[t] = e

    # Contract matched pairs; each non-matching edge (r, t) becomes an arc
    # from t's pair to r's pair.  Pairs are named by their r node.
    arcs: list[tuple[int, int, int]] = []  # (edge id, tail pair, head pair)
    for e in sorted(active):
        if e in matching:
            continue
        r, t = g.edges[e]
        arcs.append((e, g.edges[match_t[t]][0], r))
    out_arcs: dict[int, list[int]] = {r: [] for r in match_r}
    for idx, (_, tail, _) in enumerate(arcs):
        out_arcs[tail].append(idx)

    def ordered(items: list[int]) -> list[int]:
        if rng is None or len(items) < 2:
            return items
        return [items[i] for i in rng.permutation(len(items))]

    def deep_path(start: int, goals: set[int]) -> list[int]:
        """Arc indices of a start -> goals walk hugging uncovered pairs.

        Depth-first, diving into pairs outside goals for as long as
        possible and closing into goals only when stuck.  Interior pairs
        are distinct and lie outside goals.
        """
        visited = {start}
        entered: dict[int, int] = {}
        fresh: dict[int, list[int]] = {}
        closing: dict[int, list[int]] = {}

        def classify(v: int) -> None:
            heads = [(arcs[i][2], i) for i in out_arcs[v]]
            fresh[v] = ordered([i for h, i in heads if h not in visited and h not in goals])
            closing[v] = ordered([i for h, i in heads if h in goals])

        classify(start)
        stack = [start]
        while stack:
            v = stack[-1]
            advanced = False
            while fresh[v]:
                idx = fresh[v].pop(0)
                head = arcs[idx][2]
                if head in visited:
                    continue
                visited.add(head)
                entered[head] = idx
                classify(head)
                stack.append(head)
                advanced = True
                break
            if advanced:
                continue
            if closing[v]:
                path = [closing[v][0]]
                while v != start:
                    path.append(entered[v])
                    v = arcs[entered[v]][1]
                path.reverse()
                return path
            stack.pop()
        raise GraphError("component not matching-covered")

    def expand(arc_path: Sequence[int]) -> tuple[int, ...]:
        """Interleave arc edges with the matched edges of interior pairs."""
        edge_path = [arcs[arc_path[0]][0]]
        for idx in arc_path[1:]:
            edge_path.append(match_r[arcs[idx][1]])
            edge_path.append(arcs[idx][0])
        if len(edge_path) > 1 and edge_path[0] > edge_path[-1]:
            edge_path.reverse()
        return tuple(edge_path)

    start_edge = min(active)
    start_pair = g.edges[start_edge][0]
    ears: list[Ear] = [Ear((start_edge,), trivial=False)]
    if not arcs:
        return EarDecomposition(ears=tuple(ears))

    used = [False] * len(arcs)
    in_h: set[int] = set()

    incident = [i for i in range(len(arcs)) if start_pair in (arcs[i][1], arcs[i][2])]
    first = _pick(incident, rng)
    tail, head = arcs[first][1], arcs[first][2]
    if tail == head:
        cycle = [first]
    elif tail == start_pair:
        cycle = [first] + deep_path(head, {start_pair})
    else:
        cycle = deep_path(start_pair, {tail}) + [first]
    for idx in cycle:
        used[idx] = True
        in_h.add(arcs[idx][1])
        in_h.add(arcs[idx][2])
    ears.append(Ear(expand(cycle), trivial=len(cycle) == 1))

    while True:
        candidates = [i for i in range(len(arcs)) if not used[i] and arcs[i][1] in in_h]
        if not candidates:
            if not all(used):
                raise GraphError("component not matching-covered")
            break
        idx = _pick(candidates, rng)
        head = arcs[idx][2]
        if head in in_h:
            used[idx] = True
            ears.append(Ear((arcs[idx][0],), trivial=True))
            continue
        path = [idx] + deep_path(head, set(in_h))
        for step in path:
            used[step] = True
            in_h.add(arcs[step][1])
            in_h.add(arcs[step][2])
        ears.append(Ear(expand(path), trivial=False))

    return EarDecomposition(ears=tuple(ears))


def parse_ear_order(order: str) -> Optional[np.random.Generator]:
    """Turn an order name into a generator: "lowest" or "random:<seed>"."""
    if order == "lowest":
        return None
    if order.startswith("random:"):
        seed_text = order[len("random:") :]
        try:
            return np.random.default_rng(int(seed_text))
        except ValueError:
            pass
    raise ValueError(f"unknown ear order {order!r}")


def solve_ear(
    inst: RapInstance,
    ear_order: str = "lowest",
    trace: Optional[list[EarDecomposition]] = None,
) -> Solution:
    """Robust solution via ear decomposition of the allowed subgraph.

    Keeps, per matching-covered component, the starting edge plus every
    non-trivial ear.  When that leaves a component as a single vulnerable
    edge (possible only for a two-node bundle of parallel edges), the
    lowest-numbered parallel edge is kept as well so the component survives
    the loss of either copy.  Output size is at most three times the number
    of task nodes.  Passing a list as ``trace`` collects the decomposition
    of every component as it is built.
    """
    rng = parse_ear_order(ear_order)
    mapping = None
    work = inst
    if not inst.graph.balanced:
        mapping = balanced_completion(inst)
        work = mapping.instance
    if not check_feasible(work):
        raise InstanceError("infeasible instance")

    allowed = allowed_edges(work.graph)
    chosen: set[int] = set()
    for comp in matching_covered_components(work.graph, allowed):
        if not comp.edge_ids:
            continue
        dec = ear_decomposition(work.graph, comp.edge_ids, rng)
        if trace is not None:
            trace.append(dec)
        kept: set[int] = set(dec.ears[0].edge_ids)
        for ear in dec.nontrivial():
            kept.update(ear.edge_ids)
        if len(kept) == 1 and next(iter(kept)) in work.vulnerable:
            spares = sorted(comp.edge_ids - kept)
            if spares:
                kept.add(spares[0])
        chosen.update(kept)

    if len(chosen) > 3 * work.graph.n_t:
        raise RuntimeError("ear solution exceeded its size bound")
    verify_solution(work, solution_for(work, chosen))
    if mapping is not None:
        chosen = set(mapping.decode(chosen))
    return solution_for(inst, chosen)


def format_ears(dec: EarDecomposition) -> str:
    """One line per ear: index, edge ids, and a trivial marker."""
    lines = []
    for i, ear in enumerate(dec.ears):
        ids = ",".join(f"e{e}" for e in ear.edge_ids)
        mark = " trivial" if ear.trivial else ""
        lines.append(f"ear {i} {ids}{mark}")
    return "\n".join(lines)
