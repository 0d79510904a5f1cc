"""Reservation guards: one small data-vertex set per candidate vertex.

A reservation of ``(u_i, v)`` is a set of data vertices hit by every
subembedding rooted at ``(u_i, v)``. Once all of them are already used by the
partial embedding, ``v`` cannot extend it, so the candidate is pruned.
Guards are built bottom-up over the matching order from vertex covers of the
reservation edge set, keeping only covers that some partial embedding could
actually occupy (matchable sets).
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import AbstractSet, Iterable, List, Optional, Tuple

from .filtering import CandidateSets
from .plan import GCS

MAX_RESERVATION_SIZE = 20


@dataclass(frozen=True)
class ReservationGuard:
    vertices: Tuple[int, ...]
    trivial: bool = False

    @classmethod
    def trivial_for(cls, v: int) -> "ReservationGuard":
        return cls((v,), trivial=True)


@dataclass(frozen=True)
class ReservationEdgeSet:
    edges: Tuple[Tuple[int, int], ...]

    @property
    def vertices(self) -> Tuple[int, ...]:
        return tuple(sorted({x for e in self.edges for x in e}))

    def __len__(self) -> int:
        return len(self.edges)


def reservation_guard(gcs: GCS, i: int, v: int) -> ReservationGuard:
    """The stored guard of ``(u_i, v)``, trivial unless one was generated."""
    guard = gcs.reservations[i].get(v)
    if guard is None:
        return ReservationGuard.trivial_for(v)
    return guard


def is_matchable(vertices: Iterable[int], i: int, cands: CandidateSets) -> bool:
    """Whether some partial embedding of length ``i`` could cover ``vertices``.

    A set is unmatchable when one of its vertices is a candidate of no position
    before ``i``, or when some subset has more vertices than the positions
    before ``i`` that could host them.
    """
    prefix = (1 << i) - 1
    masks = cands.inverse_masks
    hosts = []
    for w in vertices:
        m = masks.get(w, 0) & prefix
        if not m:
            return False
        hosts.append(m)
    for size in range(2, len(hosts) + 1):
        for subset in combinations(hosts, size):
            union = 0
            for m in subset:
                union |= m
            if union.bit_count() < size:
                return False
    return True


def build_reservation_edges(gcs: GCS, i: int, v: int, j: int) -> ReservationEdgeSet:
    """Pairs ``(v', w)``, ``v'`` in N(v) ∩ C(u_j) and ``w`` in R(u_j, v') - {v}."""
    edges: List[Tuple[int, int]] = []
    for v2 in gcs.edge_targets(i, j, v):
        for w in reservation_guard(gcs, j, v2).vertices:
            if w != v:
                edges.append((v2, w))
    return ReservationEdgeSet(tuple(edges))


def approx_vertex_cover(
    edge_set: ReservationEdgeSet, r: int, i: int, cands: CandidateSets
) -> Optional[Tuple[int, ...]]:
    """Greedy matchable vertex cover of at most ``r`` vertices, or ``None``.

    Edges are taken in construction order. For each uncovered edge, the
    endpoint covering more of the remaining edges is tried first; the first
    endpoint that keeps the cover matchable is added.
    """
    cover: set = set()
    edges = edge_set.edges
    for idx, (a, b) in enumerate(edges):
        if a in cover or b in cover:
            continue
        if len(cover) + 1 > r:
            return None
        if a == b:
            choices = [a]
        else:
            rest = edges[idx:]
            hits_a = sum(1 for e in rest if a in e)
            hits_b = sum(1 for e in rest if b in e)
            choices = [a, b] if hits_a >= hits_b else [b, a]
        for x in choices:
            if is_matchable(cover | {x}, i, cands):
                cover.add(x)
                break
        else:
            return None
    return tuple(sorted(cover))


def generate_reservation_guards(gcs: GCS, r: int) -> int:
    """Fill ``gcs.reservations``; returns the number of non-trivial guards.

    Positions are processed in reverse order so forward neighbors already hold
    their guards. For each candidate the smallest cover found over all forward
    neighbors wins; with none found the guard stays trivial.
    """
    if r > MAX_RESERVATION_SIZE:
        raise ValueError(f"reservation size must be <= {MAX_RESERVATION_SIZE}")
    gcs.reservations = [{} for _ in range(gcs.size)]
    if r <= 0:
        return 0
    made = 0
    for i in reversed(range(gcs.size)):
        forward = gcs.forward[i]
        if not forward:
            continue
        slot = gcs.reservations[i]
        for v in gcs.candidates[i]:
            best: Optional[Tuple[int, ...]] = None
            for j in forward:
                cover = approx_vertex_cover(
                    build_reservation_edges(gcs, i, v, j), r, i, gcs.candidates
                )
                if cover is not None and (best is None or len(cover) < len(best)):
                    best = cover
                    if not best:
                        break
            if best is not None:
                slot[v] = ReservationGuard(best)
                made += 1
    return made


def matches_reservation(guard: ReservationGuard, assigned: AbstractSet[int]) -> bool:
    """True iff every guard vertex is already in the partial embedding's image."""
    return all(w in assigned for w in guard.vertices)
