"""Matching order and guarded candidate space (GCS) assembly.

After :func:`build_gcs` every downstream module works with order positions:
position ``i`` is the ``i``-th query vertex of the matching order.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Dict, FrozenSet, List, Sequence, Tuple

from .filtering import CandidateSets
from .graph import Graph, is_connected, two_core

CandidateEdges = Dict[Tuple[int, int], Dict[int, Tuple[int, ...]]]


class PlanError(ValueError):
    """The query cannot be planned."""


class DisconnectedQueryError(PlanError):
    pass


class QueryTooLargeError(PlanError):
    pass


@dataclass(frozen=True)
class MatchingOrder:
    """``order[i]`` is the query vertex at position ``i``; ``position`` inverts it."""

    order: Tuple[int, ...]

    @cached_property
    def position(self) -> Tuple[int, ...]:
        pos = [0] * len(self.order)
        for i, u in enumerate(self.order):
            pos[u] = i
        return tuple(pos)

    @classmethod
    def identity(cls, n: int) -> "MatchingOrder":
        return cls(tuple(range(n)))

    def __len__(self) -> int:
        return len(self.order)

    def is_connected_order(self, query: Graph) -> bool:
        """Every vertex after the first has an earlier neighbor."""
        pos = self.position
        for i, u in enumerate(self.order[1:], start=1):
            if not any(pos[w] < i for w in query.neighbor_lists[u]):
                return False
        return True


def build_matching_order(query: Graph, cands: CandidateSets) -> MatchingOrder:
    """Greedy connected order.

    Start at the vertex with the fewest candidates, then repeatedly append the
    frontier vertex minimizing ``|C(u)| / (1 + ordered neighbors)``. Ties go to
    the smaller vertex id.
    """
    n = query.vertex_count
    if n == 0:
        return MatchingOrder(())
    if not is_connected(query):
        raise DisconnectedQueryError("query graph is not connected")
    first = min(range(n), key=lambda u: (cands.size(u), u))
    order = [first]
    placed = {first}
    ordered_neighbors = [0] * n
    for w in query.neighbor_lists[first]:
        ordered_neighbors[w] += 1
    while len(order) < n:
        frontier = [u for u in range(n) if u not in placed and ordered_neighbors[u]]
        nxt = min(
            frontier,
            key=lambda u: (Fraction(cands.size(u), 1 + ordered_neighbors[u]), u),
        )
        order.append(nxt)
        placed.add(nxt)
        for w in query.neighbor_lists[nxt]:
            ordered_neighbors[w] += 1
    return MatchingOrder(tuple(order))


@dataclass
class GCS:
    """Guarded candidate space over order positions.

    ``reservations[i]`` maps a candidate vertex to its non-trivial reservation
    guard; a vertex absent from the map carries the trivial guard ``{v}``.
    Nogood slots are owned by each search (see :mod:`guarded_match.nogood`);
    the GCS only says which query edges carry edge slots.
    """

    query: Graph
    data: Graph
    order: MatchingOrder
    candidates: CandidateSets
    candidate_edges: CandidateEdges
    core_edges: FrozenSet[Tuple[int, int]]
    reservations: List[Dict[int, object]] = field(default_factory=list)

    @property
    def size(self) -> int:
        return self.query.vertex_count

    @cached_property
    def forward(self) -> Tuple[Tuple[int, ...], ...]:
        return tuple(
            tuple(j for j in self.query.neighbor_lists[i] if j > i)
            for i in range(self.size)
        )

    @cached_property
    def backward(self) -> Tuple[Tuple[int, ...], ...]:
        return tuple(
            tuple(j for j in self.query.neighbor_lists[i] if j < i)
            for i in range(self.size)
        )

    @cached_property
    def candidate_edge_sets(self) -> Dict[Tuple[int, int], Dict[int, FrozenSet[int]]]:
        return {
            key: {v: frozenset(ws) for v, ws in adj.items()}
            for key, adj in self.candidate_edges.items()
        }

    def has_ne_slot(self, i: int, j: int) -> bool:
        return (min(i, j), max(i, j)) in self.core_edges

    def edge_targets(self, i: int, j: int, v: int) -> Tuple[int, ...]:
        return self.candidate_edges[(i, j)].get(v, ())

    def to_query_order(self, embedding: Sequence[int]) -> Tuple[int, ...]:
        """Re-index a position-ordered embedding by original query vertex id."""
        pos = self.order.position
        return tuple(embedding[pos[u]] for u in range(self.size))


def renumber_query(query: Graph, order: MatchingOrder) -> Graph:
    pos = order.position
    labels = [query.label(u) for u in order.order]
    edges = [(pos[a], pos[b]) for a, b in query.edges()]
    return Graph.from_edges(labels, edges)


def build_gcs(
    query: Graph, data: Graph, cands: CandidateSets, order: MatchingOrder
) -> GCS:
    """Renumber the query by ``order`` and materialize candidate edges.

    ``cands`` is indexed by original query vertex id.
    """
    renumbered = renumber_query(query, order)
    positioned = cands.renumber(order.order)
    neighbor_sets = data.neighbor_sets
    candidate_edges: CandidateEdges = {}
    for i, j in renumbered.edges():
        targets = positioned[j]
        target_set = set(targets)
        adj: Dict[int, Tuple[int, ...]] = {}
        for v in positioned[i]:
            near = neighbor_sets[v]
            if len(near) < len(targets):
                adj[v] = tuple(sorted(w for w in near if w in target_set))
            else:
                adj[v] = tuple(w for w in targets if w in near)
        candidate_edges[(i, j)] = adj
    core = two_core(renumbered)
    core_edges = frozenset(
        (i, j) for i, j in renumbered.edges() if i in core and j in core
    )
    return GCS(
        query=renumbered,
        data=data,
        order=order,
        candidates=positioned,
        candidate_edges=candidate_edges,
        core_edges=core_edges,
        reservations=[{} for _ in range(renumbered.vertex_count)],
    )
