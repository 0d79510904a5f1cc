"""Brute-force ground truth.

Nothing here goes through filtering, the GCS or any guard: the enumerator
checks the label, adjacency and injectivity constraints directly over label-
compatible data vertices. It is slow on purpose and only meant for small
instances.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Set, Tuple

from .graph import Graph
from .plan import GCS

Embedding = Tuple[int, ...]


@dataclass
class EnumerationResult:
    embeddings: Set[Embedding] = field(default_factory=set)
    truncated: bool = False

    def __len__(self) -> int:
        return len(self.embeddings)


def bfs_order(query: Graph, start: int = 0) -> List[int]:
    """Breadth-first order from ``start``; unreachable vertices follow by id."""
    n = query.vertex_count
    if n == 0:
        return []
    seen = [False] * n
    order: List[int] = []
    for root in [start] + list(range(n)):
        if seen[root]:
            continue
        seen[root] = True
        queue = deque([root])
        while queue:
            u = queue.popleft()
            order.append(u)
            for w in query.neighbor_lists[u]:
                if not seen[w]:
                    seen[w] = True
                    queue.append(w)
    return order


def brute_force_enumerate(
    query: Graph,
    data: Graph,
    cap: Optional[int] = None,
    *,
    order: Optional[Sequence[int]] = None,
) -> EnumerationResult:
    """Every embedding of ``query`` in ``data``, indexed by query vertex id.

    With ``cap`` set, stops after that many embeddings and flags the result as
    truncated when more exist.
    """
    result = EnumerationResult()
    n = query.vertex_count
    if n == 0:
        return result
    order = list(order) if order is not None else bfs_order(query)
    by_label: Dict[int, List[int]] = {}
    for v in range(data.vertex_count):
        by_label.setdefault(data.label(v), []).append(v)
    pools = [by_label.get(query.label(u), []) for u in order]
    pos = {u: i for i, u in enumerate(order)}
    earlier = [
        [pos[w] for w in query.neighbor_lists[u] if pos[w] < i]
        for i, u in enumerate(order)
    ]
    adj = data.neighbor_sets
    assigned: List[int] = [-1] * n
    used: Set[int] = set()

    def dfs(i: int) -> bool:
        if i == n:
            emb = [0] * n
            for k, u in enumerate(order):
                emb[u] = assigned[k]
            if cap is not None and len(result.embeddings) >= cap:
                result.truncated = True
                return False
            result.embeddings.add(tuple(emb))
            return True
        for v in pools[i]:
            if v in used:
                continue
            if any(assigned[k] not in adj[v] for k in earlier[i]):
                continue
            assigned[i] = v
            used.add(v)
            go_on = dfs(i + 1)
            used.discard(v)
            assigned[i] = -1
            if not go_on:
                return False
        return True

    dfs(0)
    return result


def inclusive_descendants(gcs: GCS, i: int) -> List[int]:
    """Positions reachable from ``i`` along forward query edges, ``i`` first."""
    seen = {i}
    out = [i]
    stack = [i]
    while stack:
        for j in gcs.forward[stack.pop()]:
            if j not in seen:
                seen.add(j)
                out.append(j)
                stack.append(j)
    return sorted(out)


def rooted_subembeddings(gcs: GCS, i: int, v: int) -> List[Dict[int, int]]:
    """All subembeddings rooted at ``(i, v)`` as ``{position: data vertex}``.

    A rooted subembedding embeds the subgraph induced by the inclusive
    descendants of ``i``, assigns ``v`` to ``i`` and keeps every position
    inside its candidate set.
    """
    if v not in gcs.candidates[i]:
        return []
    members = inclusive_descendants(gcs, i)
    inside = set(members)
    query_adj = gcs.query.neighbor_lists
    earlier = {
        p: [q for q in query_adj[p] if q in inside and q < p] for p in members
    }
    adj = gcs.data.neighbor_sets
    found: List[Dict[int, int]] = []
    current: Dict[int, int] = {i: v}
    used = {v}

    def dfs(idx: int) -> None:
        if idx == len(members):
            found.append(dict(current))
            return
        p = members[idx]
        for w in gcs.candidates[p]:
            if w in used or any(current[q] not in adj[w] for q in earlier[p]):
                continue
            current[p] = w
            used.add(w)
            dfs(idx + 1)
            used.discard(w)
            del current[p]

    dfs(1)
    return found
