"""Random instances and random-walk query workloads.

Queries are induced subgraphs of the data graph collected by a random walk,
so every query has at least one embedding. A query is *sparse* when its
average degree is below three and *dense* otherwise; size classes are named
after the vertex count and that flag, e.g. ``8S`` or ``16D``.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Sequence, Union

import numpy as np

from .graph import Graph, induced_subgraph
from .graph_io import load_graph, serialize_graph

SeedLike = Union[int, Sequence[int]]

SPARSE_DEGREE = 3.0
STALL_FACTOR = 10
MAX_RESTARTS = 100
MAX_ENUMERATED_PAIRS = 2_000_000
MANIFEST = "manifest.txt"


class WorkloadError(RuntimeError):
    """Random instance or query generation failed."""


def random_labeled_graph(n: int, m: int, label_count: int, seed: SeedLike) -> Graph:
    """Uniform simple graph with ``n`` vertices, ``m`` edges and uniform labels."""
    if n < 0 or m < 0 or label_count < 1:
        raise WorkloadError("n, m must be >= 0 and label_count >= 1")
    total = n * (n - 1) // 2
    if m > total:
        raise WorkloadError(f"{m} edges do not fit in a simple graph on {n} vertices")
    rng = np.random.default_rng(seed)
    labels = rng.integers(0, label_count, size=n)
    if m == 0:
        return Graph.from_edges(labels.tolist(), [])
    if total <= MAX_ENUMERATED_PAIRS:
        rows, cols = np.triu_indices(n, k=1)
        picked = rng.choice(total, size=m, replace=False)
        edges = np.stack([rows[picked], cols[picked]], axis=1)
    else:
        chosen = set()
        while len(chosen) < m:
            a, b = (int(x) for x in rng.integers(0, n, size=2))
            if a != b:
                chosen.add((min(a, b), max(a, b)))
        edges = np.array(sorted(chosen), dtype=np.int64)
    return Graph.from_edges(labels.tolist(), edges.tolist())


def random_walk_query(data: Graph, n: int, seed: SeedLike) -> Graph:
    """Induced subgraph on the first ``n`` distinct vertices of a random walk.

    A walk that visits no new vertex for ``10 * n`` steps restarts from a fresh
    uniform vertex; after 100 restarts generation fails.
    """
    if n < 1:
        raise WorkloadError("query size must be positive")
    if n > data.vertex_count:
        raise WorkloadError(
            f"cannot draw {n} vertices from a {data.vertex_count}-vertex graph"
        )
    rng = np.random.default_rng(seed)
    adj = data.neighbor_lists
    for _ in range(MAX_RESTARTS):
        current = int(rng.integers(0, data.vertex_count))
        visited = [current]
        seen = {current}
        stalled = 0
        while len(visited) < n and stalled < STALL_FACTOR * n:
            near = adj[current]
            if not near:
                break
            current = near[int(rng.integers(0, len(near)))]
            if current in seen:
                stalled += 1
            else:
                seen.add(current)
                visited.append(current)
                stalled = 0
        if len(visited) == n:
            return induced_subgraph(data, visited)
    raise WorkloadError(
        f"random walk found no {n} connected vertices after {MAX_RESTARTS} restarts"
    )


def average_degree(g: Graph) -> float:
    return 2.0 * g.edge_count / g.vertex_count if g.vertex_count else 0.0


def is_sparse(g: Graph) -> bool:
    return average_degree(g) < SPARSE_DEGREE


def size_class(g: Graph) -> str:
    return f"{g.vertex_count}{'S' if is_sparse(g) else 'D'}"


@dataclass
class WorkloadQuery:
    name: str
    graph: Graph

    @property
    def size_class(self) -> str:
        return size_class(self.graph)

    @property
    def sparse(self) -> bool:
        return is_sparse(self.graph)


@dataclass
class Workload:
    seed: int
    sizes: List[int]
    count: int
    queries: List[WorkloadQuery] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.queries)

    def classes(self) -> dict:
        """Number of queries per size class."""
        out: dict = {}
        for q in self.queries:
            out[q.size_class] = out.get(q.size_class, 0) + 1
        return out


def generate_workload(
    data: Graph, sizes: Sequence[int], count: int, seed: int
) -> Workload:
    """``count`` random-walk queries per size, each seeded by ``(seed, size, i)``."""
    if count < 0:
        raise WorkloadError("count must be >= 0")
    wl = Workload(seed=seed, sizes=list(sizes), count=count)
    for size in sizes:
        for i in range(count):
            graph = random_walk_query(data, size, [seed, size, i])
            wl.queries.append(WorkloadQuery(f"q{size}_{i:04d}", graph))
    return wl


def write_workload(
    wl: Workload, directory: Union[str, os.PathLike], *, data_path: Optional[str] = None
) -> Path:
    """Write one ``.graph`` file per query plus ``manifest.txt``."""
    out = Path(directory)
    out.mkdir(parents=True, exist_ok=True)
    lines = [
        "# guarded-match workload",
        f"seed {wl.seed}",
        f"sizes {','.join(str(s) for s in wl.sizes)}",
        f"count {wl.count}",
    ]
    if data_path:
        lines.append(f"data {data_path}")
    for q in wl.queries:
        (out / f"{q.name}.graph").write_text(serialize_graph(q.graph))
        deg = average_degree(q.graph)
        lines.append(f"query {q.name}.graph {q.size_class} {deg:.3f}")
    (out / MANIFEST).write_text("\n".join(lines) + "\n")
    return out


def read_workload(directory: Union[str, os.PathLike]) -> Workload:
    """Load a workload written by :func:`write_workload`."""
    root = Path(directory)
    manifest = root / MANIFEST
    if not manifest.exists():
        raise WorkloadError(f"no {MANIFEST} in {root}")
    seed, sizes, count = 0, [], 0
    queries: List[WorkloadQuery] = []
    for raw in manifest.read_text().splitlines():
        parts = raw.split()
        if not parts or parts[0].startswith("#"):
            continue
        key = parts[0]
        if key == "seed":
            seed = int(parts[1])
        elif key == "sizes":
            sizes = [int(s) for s in parts[1].split(",") if s] if len(parts) > 1 else []
        elif key == "count":
            count = int(parts[1])
        elif key == "query":
            name = parts[1]
            queries.append(WorkloadQuery(Path(name).stem, load_graph(root / name)))
    return Workload(seed=seed, sizes=sizes, count=count, queries=queries)
