"""Labeled simple undirected graphs in compressed sorted-adjacency (CSR) form.

Both query and data graphs use the same immutable :class:`Graph`. Neighbor
lists live in one contiguous numpy array indexed by per-vertex offsets, so
adjacency tests are a binary search over a sorted slice.
"""

from __future__ import annotations

from collections import Counter, deque
from functools import cached_property
from typing import Dict, FrozenSet, Iterable, Iterator, List, Sequence, Tuple

import numpy as np

NlfSignature = Dict[int, int]


class GraphInvariantError(ValueError):
    """Raised when a graph violates simplicity, symmetry or sortedness."""


class Graph:
    """Immutable vertex-labeled simple undirected graph.

    Labels keep their original integer values; ``label_codes`` maps each vertex
    to a dense index into ``label_values`` for label-indexed arrays.
    """

    def __init__(
        self, labels: np.ndarray, offsets: np.ndarray, adjacency: np.ndarray
    ) -> None:
        self.labels = np.array(labels, dtype=np.int64)
        self.offsets = np.array(offsets, dtype=np.int64)
        self.adjacency = np.array(adjacency, dtype=np.int64)
        for arr in (self.labels, self.offsets, self.adjacency):
            arr.setflags(write=False)

    @classmethod
    def from_edges(
        cls, labels: Sequence[int], edges: Iterable[Tuple[int, int]]
    ) -> "Graph":
        """Build a graph from labels and an undirected edge list.

        Duplicate edges are dropped; self-loops and out-of-range endpoints are
        rejected.
        """
        n = len(labels)
        pairs = np.array(list(edges), dtype=np.int64).reshape(-1, 2)
        if pairs.size:
            if pairs.min() < 0 or pairs.max() >= n:
                raise GraphInvariantError("edge endpoint out of range")
            if np.any(pairs[:, 0] == pairs[:, 1]):
                raise GraphInvariantError("self-loops are not allowed")
            pairs = np.sort(pairs, axis=1)
            pairs = np.unique(pairs, axis=0)
        src = np.concatenate([pairs[:, 0], pairs[:, 1]])
        dst = np.concatenate([pairs[:, 1], pairs[:, 0]])
        order = np.lexsort((dst, src))
        src, dst = src[order], dst[order]
        counts = np.bincount(src, minlength=n)
        offsets = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(counts, out=offsets[1:])
        return cls(np.asarray(labels, dtype=np.int64), offsets, dst)

    @property
    def vertex_count(self) -> int:
        return int(self.labels.shape[0])

    @property
    def edge_count(self) -> int:
        return int(self.adjacency.shape[0]) // 2

    def degree(self, v: int) -> int:
        return int(self.offsets[v + 1] - self.offsets[v])

    def neighbors(self, v: int) -> np.ndarray:
        return self.adjacency[self.offsets[v] : self.offsets[v + 1]]

    def label(self, v: int) -> int:
        return int(self.labels[v])

    @cached_property
    def degrees(self) -> np.ndarray:
        return np.diff(self.offsets)

    @cached_property
    def neighbor_lists(self) -> List[Tuple[int, ...]]:
        return [
            tuple(int(w) for w in self.neighbors(v)) for v in range(self.vertex_count)
        ]

    @cached_property
    def neighbor_sets(self) -> List[FrozenSet[int]]:
        return [frozenset(ns) for ns in self.neighbor_lists]

    @cached_property
    def label_values(self) -> np.ndarray:
        return np.unique(self.labels)

    @cached_property
    def label_codes(self) -> np.ndarray:
        return np.searchsorted(self.label_values, self.labels)

    @cached_property
    def _vertices_by_label(self) -> Dict[int, np.ndarray]:
        out: Dict[int, np.ndarray] = {}
        for code, value in enumerate(self.label_values):
            out[int(value)] = np.flatnonzero(self.label_codes == code)
        return out

    def vertices_with_label(self, label: int) -> np.ndarray:
        """Sorted ids of vertices carrying ``label`` (empty if absent)."""
        return self._vertices_by_label.get(int(label), np.empty(0, dtype=np.int64))

    def edges(self) -> Iterator[Tuple[int, int]]:
        """Yield each undirected edge once as ``(a, b)`` with ``a < b``."""
        for a in range(self.vertex_count):
            for b in self.neighbor_lists[a]:
                if a < b:
                    yield a, b

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Graph):
            return NotImplemented
        return (
            np.array_equal(self.labels, other.labels)
            and np.array_equal(self.offsets, other.offsets)
            and np.array_equal(self.adjacency, other.adjacency)
        )

    def __hash__(self) -> int:
        return hash((self.labels.tobytes(), self.adjacency.tobytes()))

    def __repr__(self) -> str:
        return f"Graph(vertices={self.vertex_count}, edges={self.edge_count})"


def has_edge(g: Graph, a: int, b: int) -> bool:
    """True iff ``(a, b)`` is an edge; binary search on a's sorted list."""
    row = g.neighbors(a)
    i = int(np.searchsorted(row, b))
    return i < row.shape[0] and int(row[i]) == b


def nlf_signature(g: Graph, v: int) -> NlfSignature:
    """Count neighbors of ``v`` per label; labels with zero count are absent."""
    return dict(Counter(int(x) for x in g.labels[g.neighbors(v)]))


def dominates(data_sig: NlfSignature, query_sig: NlfSignature) -> bool:
    """True iff ``data_sig`` has at least the query count for every label."""
    return all(data_sig.get(label, 0) >= count for label, count in query_sig.items())


def two_core(g: Graph) -> FrozenSet[int]:
    """Vertices of the 2-core, by peeling vertices of degree <= 1."""
    degree = {v: g.degree(v) for v in range(g.vertex_count)}
    removed = set()
    queue = deque(v for v, d in degree.items() if d <= 1)
    while queue:
        v = queue.popleft()
        if v in removed:
            continue
        removed.add(v)
        for w in g.neighbor_lists[v]:
            if w in removed:
                continue
            degree[w] -= 1
            if degree[w] == 1:
                queue.append(w)
    return frozenset(v for v in range(g.vertex_count) if v not in removed)


def is_connected(g: Graph) -> bool:
    if g.vertex_count == 0:
        return True
    seen = {0}
    queue = deque([0])
    while queue:
        v = queue.popleft()
        for w in g.neighbor_lists[v]:
            if w not in seen:
                seen.add(w)
                queue.append(w)
    return len(seen) == g.vertex_count


def induced_subgraph(g: Graph, vertices: Sequence[int]) -> Graph:
    """Subgraph induced by ``vertices``; vertex ``vertices[i]`` becomes ``i``."""
    index = {int(v): i for i, v in enumerate(vertices)}
    edges = []
    for v, i in index.items():
        for w in g.neighbor_lists[v]:
            j = index.get(w)
            if j is not None and i < j:
                edges.append((i, j))
    labels = [g.label(v) for v in vertices]
    return Graph.from_edges(labels, edges)


def validate(g: Graph) -> None:
    """Assert the simple / symmetric / sorted invariants of ``g``."""
    n = g.vertex_count
    if g.offsets.shape[0] != n + 1 or int(g.offsets[-1]) != g.adjacency.shape[0]:
        raise GraphInvariantError("offsets do not match adjacency length")
    if g.adjacency.shape[0] % 2:
        raise GraphInvariantError("neighbor-list lengths must sum to 2 * edges")
    for v in range(n):
        row = g.neighbors(v)
        if row.shape[0] and (row.min() < 0 or row.max() >= n):
            raise GraphInvariantError(f"vertex {v}: neighbor out of range")
        if np.any(np.diff(row) <= 0):
            raise GraphInvariantError(f"vertex {v}: neighbors not strictly increasing")
        if np.any(row == v):
            raise GraphInvariantError(f"vertex {v}: self-loop")
        for w in row:
            if not has_edge(g, int(w), v):
                raise GraphInvariantError(f"edge ({v}, {int(w)}) is not symmetric")
