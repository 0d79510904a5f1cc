"""Nogood masks, records and per-search nogood storage.

Query positions are kept in int bitmasks (bit ``i`` = position ``i``). A
nogood discovered in the current partial embedding ``M`` is stored as a
search-node encoded record ``(id, length, mask)``: ``id`` names the node of
the shortest prefix of ``M`` containing the nogood, so a later partial
embedding contains the nogood whenever its ancestor array holds ``id`` at
``length``. Node ids come from a monotone counter, so records left behind by
abandoned subtrees never match again.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, Iterator, List, NamedTuple, Optional, Tuple

ROOT_ID = 0

NvSlot = Tuple[int, int]
NeSlot = Tuple[int, int, int, int]
Assignments = Tuple[Tuple[int, int], ...]


class NogoodRecord(NamedTuple):
    id: int
    length: int
    mask: int


class AuditEntry(NamedTuple):
    kind: str
    slot: tuple
    assignments: Assignments


class ConflictKind(str, Enum):
    INJECTIVITY = "injectivity"
    RESERVATION = "reservation"
    NOGOOD = "nogood"
    NO_CANDIDATE = "no-candidate"


def bit(i: int) -> int:
    return 1 << i


def positions(mask: int) -> Iterator[int]:
    """Ascending positions set in ``mask``."""
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def mask_of(items) -> int:
    out = 0
    for i in items:
        out |= 1 << i
    return out


class AncestorArray:
    """Node ids of every prefix of the current partial embedding.

    ``ids[d]`` is the id of the length-``d`` prefix; ``ids[0]`` is the root.
    """

    __slots__ = ("ids",)

    def __init__(self, size: int) -> None:
        self.ids: List[int] = [ROOT_ID] * (size + 1)

    def __getitem__(self, depth: int) -> int:
        return self.ids[depth]

    def set(self, depth: int, node_id: int) -> None:
        self.ids[depth] = node_id


def matches_record(rec: NogoodRecord, anc: AncestorArray, depth: int) -> bool:
    """True iff the record's prefix node is an ancestor of the current node."""
    return rec.length <= depth and anc.ids[rec.length] == rec.id


def encode_nogood(mask: int, anc: AncestorArray) -> NogoodRecord:
    """Round the nogood ``M[mask]`` up to its shortest enclosing prefix."""
    length = mask.bit_length()
    return NogoodRecord(anc.ids[length], length, mask)


def injectivity_mask(i: int, k: int) -> int:
    return bit(i) | bit(k)


def reservation_mask(guard_vertices, image: Dict[int, int], k: int) -> int:
    return bit(k) | mask_of(image[w] for w in guard_vertices)


def nogood_mask(rec: NogoodRecord, k: int) -> int:
    return rec.mask | bit(k)


def conflict_mask(kind: ConflictKind, k: int, **context) -> int:
    """Mask isolating the cause of a conflict of the extension at position ``k``.

    Context keys: ``other`` (injectivity), ``guard`` and ``image``
    (reservation), ``record`` (nogood), ``bound`` (no-candidate: the bounding
    set of the emptied position after the extension).
    """
    if kind is ConflictKind.INJECTIVITY:
        return injectivity_mask(context["other"], k)
    if kind is ConflictKind.RESERVATION:
        return reservation_mask(context["guard"], context["image"], k)
    if kind is ConflictKind.NOGOOD:
        return nogood_mask(context["record"], k)
    return context["bound"]


class MaskAccumulator:
    """Folds children's masks at depth ``k`` into the node's mask.

    The first child mask without ``k`` short-circuits; otherwise the result is
    the union of child masks and the bounding set of ``k``, minus ``k``.
    """

    __slots__ = ("k", "union", "short_circuit")

    def __init__(self, k: int) -> None:
        self.k = k
        self.union = 0
        self.short_circuit: Optional[int] = None

    def add(self, child_mask: int) -> bool:
        """Fold one child mask; True when it excludes ``k``."""
        if not (child_mask >> self.k) & 1:
            if self.short_circuit is None:
                self.short_circuit = child_mask
            return True
        self.union |= child_mask
        return False

    def fold(self, bound: int) -> int:
        if self.short_circuit is not None:
            return self.short_circuit
        return (self.union | bound) & ~bit(self.k)


def fold_deadend_mask(
    acc: MaskAccumulator, child_mask: Optional[int], k: int, bound: int
) -> int:
    """Add ``child_mask`` (if any) to ``acc`` and fold at depth ``k``."""
    if acc.k != k:
        raise ValueError("accumulator depth mismatch")
    if child_mask is not None:
        acc.add(child_mask)
    return acc.fold(bound)


def fixed_mask_from_deadend(deadend_mask: int, i: int) -> int:
    """Fixed mask past position ``i``: deadend mask of ``M[:i] + v`` minus ``i``."""
    return deadend_mask & ~bit(i)


@dataclass
class NogoodStore:
    """Vertex (NV) and edge (NE) nogood slots owned by one search.

    Slots are keyed ``(i, v)`` and ``(i, v, j, v')`` with ``i < j``; each slot
    holds at most one record and writes overwrite. With ``audit`` on, every
    write is also kept in decoded form.
    """

    audit: bool = False
    nv: Dict[NvSlot, NogoodRecord] = field(default_factory=dict)
    ne: Dict[NeSlot, NogoodRecord] = field(default_factory=dict)
    decoded: Dict[tuple, Assignments] = field(default_factory=dict)
    audit_log: List[AuditEntry] = field(default_factory=list)
    encoding_checks: int = 0

    def record_nv(
        self, slot: NvSlot, rec: NogoodRecord, assignments: Optional[Assignments] = None
    ) -> None:
        self.nv[slot] = rec
        if assignments is not None:
            self._remember("nv", slot, assignments)

    def record_ne(
        self, slot: NeSlot, rec: NogoodRecord, assignments: Optional[Assignments] = None
    ) -> None:
        self.ne[slot] = rec
        if assignments is not None:
            self._remember("ne", slot, assignments)

    def _remember(self, kind: str, slot: tuple, assignments: Assignments) -> None:
        self.decoded[(kind, slot)] = assignments
        if self.audit:
            self.audit_log.append(AuditEntry(kind, slot, assignments))

    def check_contained(
        self, kind: str, slot: tuple, embedding: List[int], depth: int
    ) -> None:
        """Assert the decoded nogood of ``slot`` lies in ``embedding[:depth]``."""
        assignments = self.decoded.get((kind, slot))
        if assignments is None:
            return
        self.encoding_checks += 1
        for pos, v in assignments:
            if pos >= depth or embedding[pos] != v:
                raise AssertionError(
                    f"{kind} record {slot} matched but ({pos}, {v}) is not assigned"
                )
