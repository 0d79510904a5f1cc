"""Guarded backtracking search.

The engine walks the matching order over the GCS. At each level it filters
the local candidates with the injectivity check, the reservation guard and
the vertex nogood (NV), refines the forward local candidate sets by adjacency
and edge nogoods (NE), and recurses. Deadends are turned into nogoods through
conflict / deadend masks, recorded in NV and NE slots, and used to backjump
when a discovered nogood no longer involves the current level.
"""

from __future__ import annotations

import threading
import time
from dataclasses import dataclass, field, fields
from enum import Enum
from typing import (
    Callable,
    Dict,
    FrozenSet,
    List,
    Optional,
    Sequence,
    Set,
    Tuple,
)

from .config import MatchConfig
from .filtering import filter_candidates
from .graph import Graph, is_connected
from .nogood import (
    AncestorArray,
    ConflictKind,
    MaskAccumulator,
    NogoodStore,
    bit,
    conflict_mask,
    encode_nogood,
    fixed_mask_from_deadend,
    fold_deadend_mask,
    matches_record,
    positions,
)
from .plan import (
    GCS,
    DisconnectedQueryError,
    MatchingOrder,
    PlanError,
    QueryTooLargeError,
    build_gcs,
    build_matching_order,
)
from .reservation import generate_reservation_guards, matches_reservation

Embedding = Tuple[int, ...]
EmbeddingSink = Callable[[Embedding], None]
Target = Tuple[int, int]

TIME_POLL_MASK = 1023
_EMPTY: FrozenSet[int] = frozenset()


class Termination(str, Enum):
    COMPLETE = "complete"
    EMBEDDING_LIMIT = "embedding-limit"
    TIME_LIMIT = "time-limit"


class SearchInterrupted(Exception):
    """Unwinds the recursion once a limit fires; never escapes the search."""


@dataclass
class MatchStats:
    recursions: int = 0
    embeddings: int = 0
    candidates: int = 0
    pruned_injectivity: int = 0
    pruned_reservation: int = 0
    pruned_nv: int = 0
    pruned_ne: int = 0
    no_candidate: int = 0
    backjumps: int = 0
    termination: Termination = Termination.COMPLETE

    def merge(self, other: "MatchStats") -> None:
        for f in fields(self):
            if f.name not in ("termination", "embeddings"):
                setattr(self, f.name, getattr(self, f.name) + getattr(other, f.name))

    def prune_ratio(self) -> Dict[str, float]:
        """Fraction of examined local candidates pruned by each guard kind."""
        seen = self.candidates + self.pruned_ne
        if not seen:
            return {"injectivity": 0.0, "reservation": 0.0, "nv": 0.0, "ne": 0.0}
        return {
            "injectivity": self.pruned_injectivity / seen,
            "reservation": self.pruned_reservation / seen,
            "nv": self.pruned_nv / seen,
            "ne": self.pruned_ne / seen,
        }


@dataclass
class MatchResult:
    embedding_count: int
    stats: MatchStats
    termination: Termination
    embeddings: Optional[List[Embedding]] = None

    @property
    def complete(self) -> bool:
        return self.termination is Termination.COMPLETE


class SearchControl:
    """Limits, the embedding counter and the sink, shared by all workers."""

    def __init__(self, cfg: MatchConfig, sink: Optional[EmbeddingSink] = None) -> None:
        self.limit = cfg.embedding_limit
        self.deadline = (
            time.monotonic() + cfg.time_limit if cfg.time_limit is not None else None
        )
        self.sink = sink
        self.embeddings: Optional[List[Embedding]] = [] if cfg.emit_embeddings else None
        self.count = 0
        self.stopped = False
        self.termination = Termination.COMPLETE
        self.busy = 0
        self.lock = threading.Lock()

    def emit(self, embedding: Embedding) -> None:
        with self.lock:
            if self.stopped:
                raise SearchInterrupted()
            self.count += 1
            if self.embeddings is not None:
                self.embeddings.append(embedding)
            if self.sink is not None:
                self.sink(embedding)
            if self.limit is not None and self.count >= self.limit:
                self._stop(Termination.EMBEDDING_LIMIT)
                raise SearchInterrupted()

    def check_deadline(self) -> None:
        if self.deadline is not None and time.monotonic() > self.deadline:
            with self.lock:
                self._stop(Termination.TIME_LIMIT)
            raise SearchInterrupted()

    def _stop(self, reason: Termination) -> None:
        if not self.stopped:
            self.stopped = True
            self.termination = reason

    def task_started(self) -> None:
        with self.lock:
            self.busy += 1

    def task_done(self) -> None:
        with self.lock:
            self.busy -= 1

    def idle(self) -> bool:
        with self.lock:
            return self.busy == 0


@dataclass
class _Outcome:
    found: bool = False
    complete: bool = True
    mask: Optional[int] = None
    fixed: Dict[Target, int] = field(default_factory=dict)
    satisfied: Set[Target] = field(default_factory=set)


_LEAF = _Outcome(found=True)


class _LoopFrame:
    __slots__ = ("depth", "cands", "next", "end", "split")

    def __init__(self, depth: int, cands: Sequence[int]) -> None:
        self.depth = depth
        self.cands = cands
        self.next = 0
        self.end = len(cands)
        self.split = False


class SearchEngine:
    """One backtracking worker with its own state and nogood store.

    ``worker`` and ``stride`` namespace node ids so several engines can run
    over the same GCS; ``lock`` is set only when other workers may steal from
    this one.
    """

    def __init__(
        self,
        gcs: GCS,
        cfg: MatchConfig,
        control: SearchControl,
        *,
        store: Optional[NogoodStore] = None,
        worker: int = 0,
        stride: int = 1,
        lock: Optional[threading.Lock] = None,
    ) -> None:
        self.gcs = gcs
        self.n = gcs.size
        self.control = control
        self.store = store if store is not None else NogoodStore()
        self.stats = MatchStats()
        self.use_reservation = cfg.effective_reservation_size > 0
        self.use_nv = cfg.use_nv
        self.use_ne = cfg.use_ne
        self.use_backjump = cfg.use_backjump
        self.debug = cfg.debug_checks
        self.keep_decoded = self.debug or self.store.audit

        self.embedding: List[int] = [-1] * self.n
        self.image: Dict[int, int] = {}
        self.anc = AncestorArray(self.n)
        self._next_id = worker + 1
        self._stride = stride
        self.lock = lock
        self.loop_stack: List[_LoopFrame] = []

        self.forward = gcs.forward
        self.backward = gcs.backward
        self.edge_sets = gcs.candidate_edge_sets
        self.core = gcs.core_edges
        self.core_forward = tuple(
            tuple(j for j in gcs.forward[i] if (i, j) in gcs.core_edges)
            for i in range(self.n)
        )
        self.adj = gcs.data.neighbor_sets

    def _new_id(self) -> int:
        node_id = self._next_id
        self._next_id += self._stride
        return node_id

    def run_task(
        self, prefix: Sequence[int] = (), only: Optional[Sequence[int]] = None
    ) -> Optional[_Outcome]:
        """Explore below ``prefix``; ``only`` restricts the first level's candidates.

        The prefix is replayed through the same refinement the search uses, so
        the frames and bounding sets below it are rebuilt from scratch.
        """
        frames: List[Sequence[int]] = list(self.gcs.candidates.sets)
        bounds = [0] * self.n
        if any(not f for f in frames):
            self.stats.recursions += 1
            return _Outcome(mask=0)
        self.anc.set(0, 0)
        depth = 0
        try:
            for v in prefix:
                frames, bounds, emptied = self._refine(depth, v, frames, bounds)
                self.embedding[depth] = v
                self.image[v] = depth
                depth += 1
                self.anc.set(depth, self._new_id())
                if emptied is not None:
                    return None
            return self._explore(depth, frames, bounds, set(), only)
        finally:
            for d in range(depth):
                self.image.pop(self.embedding[d], None)
                self.embedding[d] = -1

    def split_work(self) -> Optional[Tuple[Tuple[int, ...], List[int]]]:
        """Hand the upper half of the shallowest splittable loop to a thief."""
        if self.lock is None:
            return None
        with self.lock:
            for lf in self.loop_stack:
                if lf.depth * 2 >= self.n:
                    break
                remaining = lf.end - lf.next
                if remaining >= 4:
                    mid = lf.next + remaining // 2
                    stolen = list(lf.cands[mid : lf.end])
                    lf.end = mid
                    lf.split = True
                    prefix = tuple(self.embedding[: lf.depth])
                    self.control.task_started()
                    return prefix, stolen
        return None

    def _next_candidate(self, lf: _LoopFrame) -> Optional[int]:
        if self.lock is None:
            if lf.next >= lf.end:
                return None
            y = lf.cands[lf.next]
            lf.next += 1
            return y
        with self.lock:
            if lf.next >= lf.end:
                return None
            y = lf.cands[lf.next]
            lf.next += 1
            return y

    def _refine(
        self, k: int, v: int, frames: List[Sequence[int]], bounds: List[int]
    ) -> Tuple[List[Sequence[int]], List[int], Optional[int]]:
        new_frames = list(frames)
        new_bounds = list(bounds)
        kbit = 1 << k
        ids = self.anc.ids
        ne = self.store.ne
        for j in self.forward[k]:
            allowed = self.edge_sets[(k, j)].get(v, _EMPTY)
            old = frames[j]
            kept = [w for w in old if w in allowed]
            b = bounds[j]
            if len(kept) != len(old):
                b |= kbit
            if self.use_ne and (k, j) in self.core and ne:
                survivors = []
                for w in kept:
                    rec = ne.get((k, v, j, w))
                    if (
                        rec is not None
                        and rec.length <= k
                        and ids[rec.length] == rec.id
                    ):
                        if self.debug:
                            self.store.check_contained(
                                "ne", (k, v, j, w), self.embedding, k
                            )
                        self.stats.pruned_ne += 1
                        b |= rec.mask | kbit
                    else:
                        survivors.append(w)
                kept = survivors
            elif self.debug and not self.use_ne:
                self._check_bound(k, v, j, kept, b)
            new_frames[j] = kept
            new_bounds[j] = b
            if not kept:
                return new_frames, new_bounds, j
        return new_frames, new_bounds, None

    def _check_bound(self, k: int, v: int, j: int, kept: Sequence[int], b: int) -> None:
        """Assert the assignments named in ``b`` explain every removal from ``j``."""
        held = [v if a == k else self.embedding[a] for a in positions(b)]
        adj = self.adj
        expect = [
            w for w in self.gcs.candidates.sets[j] if all(w in adj[x] for x in held)
        ]
        if expect != list(kept):
            raise AssertionError(f"bounding set of position {j} misses a removal")

    def _snapshot(self, depth: int, frames: List[Sequence[int]], bounds: List[int]):
        return (
            tuple(self.embedding),
            tuple(sorted(self.image.items())),
            tuple(self.anc.ids[: depth + 1]),
            tuple(tuple(f) for f in frames),
            tuple(bounds),
        )

    def _decode(self, mask: int, extra: Optional[Tuple[int, int]] = None):
        out = [(p, self.embedding[p]) for p in positions(mask)]
        if extra is not None:
            out.append(extra)
        return tuple(out)

    def _record_nv(self, depth: int, y: int, mask: int) -> None:
        if not self.use_nv or not mask:
            return
        i = mask.bit_length() - 1
        v = y if i == depth else self.embedding[i]
        rest = mask & ~bit(i)
        decoded = self._decode(rest) if self.keep_decoded else None
        self.store.record_nv((i, v), encode_nogood(rest, self.anc), decoded)

    def _record_ne(self, k: int, v: int, j: int, w: int, mask: int) -> None:
        decoded = self._decode(mask) if self.keep_decoded else None
        self.store.record_ne((k, v, j, w), encode_nogood(mask, self.anc), decoded)

    def _own_targets(self, k: int, v: int) -> Set[Target]:
        out: Set[Target] = set()
        for j in self.core_forward[k]:
            for w in self.gcs.candidate_edges[(k, j)].get(v, ()):
                out.add((j, w))
        return out

    def _resolve_locally(
        self,
        depth: int,
        target: Target,
        frames: List[Sequence[int]],
        bounds: List[int],
        frame_sets: Dict[int, FrozenSet[int]],
    ) -> Optional[int]:
        """Fixed mask of the current node for ``target`` when it is decided here.

        ``w`` outside the local candidates of ``t``: a non-adjacent assigned
        neighbor (smallest position first), else a matching edge nogood, else
        the bounding set of ``t``. ``w`` still a local candidate: only a
        matching edge nogood decides it.
        """
        t, w = target
        fs = frame_sets.get(t)
        if fs is None:
            fs = frame_sets[t] = frozenset(frames[t])
        in_frame = w in fs
        if not in_frame:
            near = self.adj[w]
            for a in self.backward[t]:
                if a >= depth:
                    break
                if self.embedding[a] not in near:
                    return bit(a)
        if self.use_ne:
            for a in self.backward[t]:
                if a >= depth:
                    break
                if (a, t) not in self.core:
                    continue
                slot = (a, self.embedding[a], t, w)
                rec = self.store.ne.get(slot)
                if rec is not None and matches_record(rec, self.anc, depth):
                    if self.debug:
                        self.store.check_contained("ne", slot, self.embedding, depth)
                    return conflict_mask(ConflictKind.NOGOOD, a, record=rec)
        if not in_frame:
            return bounds[t]
        return None

    def _explore(
        self,
        depth: int,
        frames: List[Sequence[int]],
        bounds: List[int],
        targets: Set[Target],
        only: Optional[Sequence[int]] = None,
    ) -> _Outcome:
        stats = self.stats
        stats.recursions += 1
        control = self.control
        if control.stopped:
            raise SearchInterrupted()
        if not stats.recursions & TIME_POLL_MASK:
            control.check_deadline()
        if depth == self.n:
            control.emit(self.gcs.to_query_order(self.embedding))
            return _LEAF

        fixed: Dict[Target, int] = {}
        level: Set[int] = set()
        deep: Dict[Target, MaskAccumulator] = {}
        frame_sets: Dict[int, FrozenSet[int]] = {}
        for target in targets:
            m = self._resolve_locally(depth, target, frames, bounds, frame_sets)
            if m is not None:
                fixed[target] = m
            elif target[0] == depth:
                level.add(target[1])
            else:
                deep[target] = MaskAccumulator(depth)
        deep_targets = set(deep)

        if only is None:
            cands = frames[depth]
        else:
            allowed = set(only)
            cands = [y for y in frames[depth] if y in allowed]
        lf = _LoopFrame(depth, cands)
        if self.lock is not None:
            with self.lock:
                self.loop_stack.append(lf)

        acc = MaskAccumulator(depth)
        level_masks: Dict[int, int] = {}
        satisfied: Set[Target] = set()
        unknown: Set[Target] = set()
        found = False
        complete = only is None
        backjumped = False
        try:
            while True:
                y = self._next_candidate(lf)
                if y is None:
                    break
                child_mask, child = self._extend(depth, y, frames, bounds, deep_targets)
                if child is not None:
                    found = found or child.found
                    complete = complete and child.complete
                    if child.satisfied:
                        satisfied |= child.satisfied & deep_targets
                if y in level:
                    if child is not None and child.found:
                        satisfied.add((depth, y))
                    elif child_mask is not None:
                        level_masks[y] = child_mask
                for target, tacc in deep.items():
                    if target in satisfied or target in unknown:
                        continue
                    if child is None:
                        tacc.add(child_mask)
                    elif child.complete:
                        m = child.fixed.get(target)
                        if m is None:
                            unknown.add(target)
                        else:
                            tacc.add(m)
                if child_mask is not None and acc.add(child_mask) and not found:
                    if self.use_backjump:
                        stats.backjumps += 1
                        backjumped = True
                        break
        finally:
            if self.lock is not None:
                with self.lock:
                    self.loop_stack.pop()

        if backjumped:
            mask = acc.short_circuit
            for target in targets:
                if target not in fixed and target not in satisfied:
                    fixed[target] = mask
            for w in level:
                if w in level_masks:
                    fixed[(depth, w)] = fixed_mask_from_deadend(level_masks[w], depth)
            return _Outcome(False, True, mask, fixed, satisfied)

        if lf.split or not complete:
            return _Outcome(found, False, None, {}, satisfied)

        bound = bounds[depth]
        mask = None if found else fold_deadend_mask(acc, None, depth, bound)
        for w in level:
            target = (depth, w)
            if target not in satisfied and w in level_masks:
                fixed[target] = fixed_mask_from_deadend(level_masks[w], depth)
        for target, tacc in deep.items():
            if target not in satisfied and target not in unknown:
                fixed[target] = fold_deadend_mask(tacc, None, depth, bound)
        return _Outcome(found, True, mask, fixed, satisfied)

    def _extend(
        self,
        depth: int,
        y: int,
        frames: List[Sequence[int]],
        bounds: List[int],
        deep_targets: Set[Target],
    ) -> Tuple[Optional[int], Optional[_Outcome]]:
        """Try ``M + y`` at ``depth``: conflict mask, or the child's outcome."""
        stats = self.stats
        stats.candidates += 1
        image = self.image
        other = image.get(y)
        if other is not None:
            stats.pruned_injectivity += 1
            mask = conflict_mask(ConflictKind.INJECTIVITY, depth, other=other)
            self._record_nv(depth, y, mask)
            return mask, None
        if self.use_reservation:
            guard = self.gcs.reservations[depth].get(y)
            if guard is not None and matches_reservation(guard, image.keys()):
                stats.pruned_reservation += 1
                mask = conflict_mask(
                    ConflictKind.RESERVATION, depth, guard=guard.vertices, image=image
                )
                self._record_nv(depth, y, mask)
                return mask, None
        if self.use_nv:
            rec = self.store.nv.get((depth, y))
            if rec is not None and matches_record(rec, self.anc, depth):
                if self.debug:
                    self.store.check_contained("nv", (depth, y), self.embedding, depth)
                stats.pruned_nv += 1
                mask = conflict_mask(ConflictKind.NOGOOD, depth, record=rec)
                self._record_nv(depth, y, mask)
                return mask, None

        new_frames, new_bounds, emptied = self._refine(depth, y, frames, bounds)
        if emptied is not None:
            stats.no_candidate += 1
            mask = conflict_mask(
                ConflictKind.NO_CANDIDATE, depth, bound=new_bounds[emptied]
            )
            self._record_nv(depth, y, mask)
            return mask, None

        own = self._own_targets(depth, y) if self.use_ne else set()
        entry = self._snapshot(depth, frames, bounds) if self.debug else None
        self.embedding[depth] = y
        image[y] = depth
        self.anc.set(depth + 1, self._new_id())
        try:
            outcome = self._explore(
                depth + 1, new_frames, new_bounds, deep_targets | own
            )
        finally:
            del image[y]
            self.embedding[depth] = -1
        if entry is not None and entry != self._snapshot(depth, frames, bounds):
            raise AssertionError(f"search state not restored at depth {depth}")

        if not outcome.complete:
            return None, outcome
        for target in own:
            if target in outcome.satisfied:
                continue
            m = outcome.fixed.get(target)
            if m is not None:
                self._record_ne(
                    depth, y, target[0], target[1], fixed_mask_from_deadend(m, depth)
                )
        mask = None if outcome.found else outcome.mask
        if mask is not None:
            self._record_nv(depth, y, mask)
        return mask, outcome


def validate_query(query: Graph, cfg: MatchConfig) -> None:
    if query.vertex_count == 0:
        raise PlanError("query graph has no vertices")
    if query.vertex_count > cfg.mask_width:
        raise QueryTooLargeError(
            f"query has {query.vertex_count} vertices; mask width is {cfg.mask_width}"
        )
    if not is_connected(query):
        raise DisconnectedQueryError("query graph is not connected")


def build_plan(
    query: Graph,
    data: Graph,
    cfg: MatchConfig,
    order: Optional[MatchingOrder] = None,
) -> GCS:
    """Filter candidates, fix the matching order and build the GCS (no guards yet)."""
    validate_query(query, cfg)
    cands = filter_candidates(query, data)
    if order is None:
        order = build_matching_order(query, cands)
    elif not order.is_connected_order(query):
        raise PlanError("matching order is not connected")
    return build_gcs(query, data, cands, order)


def prepare_gcs(
    query: Graph,
    data: Graph,
    cfg: MatchConfig,
    order: Optional[MatchingOrder] = None,
) -> GCS:
    gcs = build_plan(query, data, cfg, order)
    generate_reservation_guards(gcs, cfg.effective_reservation_size)
    return gcs


def _finish(control: SearchControl, stats: MatchStats) -> MatchResult:
    stats.embeddings = control.count
    stats.termination = control.termination
    return MatchResult(
        embedding_count=control.count,
        stats=stats,
        termination=control.termination,
        embeddings=control.embeddings,
    )


def search_gcs(
    gcs: GCS,
    cfg: MatchConfig,
    sink: Optional[EmbeddingSink] = None,
    *,
    store: Optional[NogoodStore] = None,
) -> MatchResult:
    """Run the search over a prepared GCS (threads > 1 go to the stealing pool)."""
    if cfg.thread_count > 1:
        from .parallel import search_parallel

        return search_parallel(gcs, cfg, sink)
    control = SearchControl(cfg, sink)
    engine = SearchEngine(gcs, cfg, control, store=store)
    try:
        engine.run_task()
    except SearchInterrupted:
        pass
    return _finish(control, engine.stats)


def match_query(
    query: Graph,
    data: Graph,
    cfg: Optional[MatchConfig] = None,
    sink: Optional[EmbeddingSink] = None,
    *,
    order: Optional[MatchingOrder] = None,
    store: Optional[NogoodStore] = None,
) -> MatchResult:
    """Enumerate embeddings of ``query`` in ``data``.

    Args:
        query: connected query graph.
        data: data graph.
        cfg: limits and guard toggles; defaults to every guard on, no limits.
        sink: called once per embedding (tuple indexed by query vertex id).
        order: explicit matching order instead of the greedy one.
        store: nogood store to use (single-threaded runs only).

    Returns:
        MatchResult with counts, statistics and termination reason.
    """
    cfg = cfg or MatchConfig()
    gcs = prepare_gcs(query, data, cfg, order)
    return search_gcs(gcs, cfg, sink, store=store)
