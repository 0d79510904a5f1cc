import numpy as np
import pytest

from guarded_match.graph import Graph
from guarded_match.workload import (
    WorkloadError,
    random_labeled_graph,
    random_walk_query,
)

A, B, C, D = 0, 1, 2, 3

# Running example: a 5-vertex query with two triangles sharing u2, and a
# 14-vertex data graph holding exactly one embedding.
SAMPLE_QUERY_LABELS = [A, B, C, D, A]
SAMPLE_QUERY_EDGES = [(0, 1), (0, 2), (1, 2), (2, 3), (2, 4), (3, 4)]
SAMPLE_DATA_LABELS = [A, A, B, B, B, C, C, C, C, D, D, D, D, A]
SAMPLE_DATA_EDGES = [
    (0, 2), (0, 3), (0, 5), (0, 6), (0, 7), (0, 9), (0, 10),
    (1, 4), (1, 7), (1, 8), (1, 11), (1, 12),
    (2, 6), (2, 7),
    (3, 5), (3, 6), (3, 7), (3, 8),
    (4, 7),
    (5, 9), (5, 13),
    (6, 11), (6, 13),
    (7, 10),
    (8, 11), (8, 12), (8, 13),
    (10, 13),
]  # fmt: skip
SAMPLE_EMBEDDING = (1, 4, 7, 10, 0)


@pytest.fixture
def sample_query() -> Graph:
    return Graph.from_edges(SAMPLE_QUERY_LABELS, SAMPLE_QUERY_EDGES)


@pytest.fixture
def sample_data() -> Graph:
    return Graph.from_edges(SAMPLE_DATA_LABELS, SAMPLE_DATA_EDGES)


def clique(n: int, label: int = 0) -> Graph:
    return Graph.from_edges(
        [label] * n, [(a, b) for a in range(n) for b in range(a + 1, n)]
    )


def path(n: int, label: int = 0) -> Graph:
    return Graph.from_edges([label] * n, [(i, i + 1) for i in range(n - 1)])


def make_instances(
    count: int,
    seed: int,
    *,
    min_data: int = 10,
    max_data: int = 24,
    min_query: int = 3,
    max_query: int = 6,
    max_labels: int = 4,
    max_density: int = 3,
):
    """Seeded (query, data) pairs; the defaults stay inside the brute-force envelope."""
    rng = np.random.default_rng(seed)
    out = []
    attempt = 0
    while len(out) < count:
        attempt += 1
        n = int(rng.integers(min_data, max_data + 1))
        labels = int(rng.integers(2, max_labels + 1))
        m = int(rng.integers(n, min(n * (n - 1) // 2, max_density * n) + 1))
        data = random_labeled_graph(n, m, labels, [seed, attempt, 1])
        size = int(rng.integers(min_query, max_query + 1))
        try:
            query = random_walk_query(data, size, [seed, attempt, 2])
        except WorkloadError:
            continue
        out.append((query, data))
    return out


def has_long_cycle(g: Graph, length: int = 4) -> bool:
    """True iff ``g`` has a simple cycle through at least ``length`` vertices."""
    adj = g.neighbor_lists

    def close(start: int, v: int, seen: frozenset) -> bool:
        for w in adj[v]:
            if w == start and len(seen) >= length:
                return True
            if w > start and w not in seen and close(start, w, seen | {w}):
                return True
        return False

    return any(close(s, s, frozenset([s])) for s in range(g.vertex_count))


@pytest.fixture
def instances():
    return make_instances
