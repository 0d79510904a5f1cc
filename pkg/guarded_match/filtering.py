"""Candidate filtering: LDF, NLF and a DP fixpoint refinement.

Each stage returns a new :class:`CandidateSets`; sets only ever shrink, and no
data vertex taking part in a full embedding is ever removed.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Dict, List, Sequence, Set, Tuple

from .graph import Graph, dominates, nlf_signature

MAX_REFINE_SWEEPS = 10


@dataclass(frozen=True)
class CandidateSets:
    """Sorted candidate lists ``C(u)`` with the inverse index ``C^-1(v)``."""

    sets: Tuple[Tuple[int, ...], ...]

    @classmethod
    def from_lists(cls, lists: Sequence[Sequence[int]]) -> "CandidateSets":
        return cls(tuple(tuple(sorted(int(v) for v in c)) for c in lists))

    def __len__(self) -> int:
        return len(self.sets)

    def __getitem__(self, u: int) -> Tuple[int, ...]:
        return self.sets[u]

    def size(self, u: int) -> int:
        return len(self.sets[u])

    @cached_property
    def inverse(self) -> Dict[int, Tuple[int, ...]]:
        """``v -> sorted query vertices whose candidate set contains v``."""
        inv: Dict[int, List[int]] = {}
        for u, cands in enumerate(self.sets):
            for v in cands:
                inv.setdefault(v, []).append(u)
        return {v: tuple(us) for v, us in inv.items()}

    def inverse_of(self, v: int) -> Tuple[int, ...]:
        return self.inverse.get(v, ())

    @cached_property
    def inverse_masks(self) -> Dict[int, int]:
        """``v -> bitmask of query vertices whose candidate set contains v``."""
        return {v: sum(1 << u for u in us) for v, us in self.inverse.items()}

    def renumber(self, order: Sequence[int]) -> "CandidateSets":
        """Candidate sets indexed by order position instead of query vertex."""
        return CandidateSets(tuple(self.sets[u] for u in order))

    def any_empty(self) -> bool:
        return any(not c for c in self.sets)


def ldf_filter(query: Graph, data: Graph) -> CandidateSets:
    """Keep data vertices with the query vertex's label and at least its degree."""
    data_degrees = data.degrees
    lists = []
    for u in range(query.vertex_count):
        same_label = data.vertices_with_label(query.label(u))
        keep = same_label[data_degrees[same_label] >= query.degree(u)]
        lists.append(keep.tolist())
    return CandidateSets.from_lists(lists)


def nlf_filter(query: Graph, data: Graph, cands: CandidateSets) -> CandidateSets:
    """Keep ``v`` in ``C(u)`` iff v's neighbor-label counts dominate u's."""
    data_sigs: Dict[int, Dict[int, int]] = {}
    lists = []
    for u in range(query.vertex_count):
        query_sig = nlf_signature(query, u)
        if not query_sig:
            lists.append(list(cands[u]))
            continue
        kept = []
        for v in cands[u]:
            sig = data_sigs.get(v)
            if sig is None:
                sig = data_sigs[v] = nlf_signature(data, v)
            if dominates(sig, query_sig):
                kept.append(v)
        lists.append(kept)
    return CandidateSets.from_lists(lists)


def _refine_vertex(
    query: Graph, data: Graph, sets: List[Set[int]], u: int
) -> bool:
    changed = False
    neighbor_sets = data.neighbor_sets
    for u2 in query.neighbor_lists[u]:
        other = sets[u2]
        doomed = [v for v in sets[u] if neighbor_sets[v].isdisjoint(other)]
        if doomed:
            sets[u].difference_update(doomed)
            changed = True
    return changed


def dp_refine(
    query: Graph,
    data: Graph,
    cands: CandidateSets,
    max_sweeps: int = MAX_REFINE_SWEEPS,
) -> CandidateSets:
    """Refine until every candidate has a candidate neighbor for each query edge.

    Sweeps alternate forward and backward over query vertex ids and stop at the
    fixpoint or after ``max_sweeps`` sweeps.
    """
    sets = [set(c) for c in cands.sets]
    forward = list(range(query.vertex_count))
    for sweep in range(max_sweeps):
        order = forward if sweep % 2 == 0 else forward[::-1]
        changed = False
        for u in order:
            if _refine_vertex(query, data, sets, u):
                changed = True
        if not changed:
            break
    return CandidateSets.from_lists(sets)


def filter_candidates(query: Graph, data: Graph) -> CandidateSets:
    """LDF, then NLF, then the DP refinement."""
    cands = ldf_filter(query, data)
    cands = nlf_filter(query, data, cands)
    return dp_refine(query, data, cands)
