"""Engine-vs-oracle comparison, benchmarking and scaling helpers."""

from __future__ import annotations

import time
from typing import Callable, Dict, List, Optional, Sequence, Set, Tuple

from pydantic import BaseModel, Field

from .config import MatchConfig
from .graph import Graph
from .oracle import brute_force_enumerate
from .reservation import generate_reservation_guards
from .search import Termination, build_plan, match_query, search_gcs
from .workload import Workload, random_labeled_graph, random_walk_query

BUCKETS: Tuple[Tuple[str, float], ...] = (
    (">1s", 1.0),
    (">1min", 60.0),
    (">1hr", 3600.0),
)
DEFAULT_SUBGROUP_SIZE = 100
DEFAULT_SUBGROUP_TIME = 3 * 3600.0


class ConfigRun(BaseModel):
    config: str = Field(description="Guard combination label, e.g. 'all' or 'nv+ne'")
    embedding_count: int
    recursions: int
    termination: str
    set_equal: bool
    missing: Optional[List[int]] = Field(
        None, description="An oracle embedding the engine did not report"
    )
    extra: Optional[List[int]] = Field(
        None, description="An engine embedding the oracle does not know"
    )


class InstanceComparison(BaseModel):
    name: str
    oracle_count: int
    runs: List[ConfigRun] = Field(default_factory=list)

    @property
    def set_equal(self) -> bool:
        return all(r.set_equal for r in self.runs)

    def recursions(self) -> Dict[str, int]:
        return {r.config: r.recursions for r in self.runs}


class ComparisonReport(BaseModel):
    instances: List[InstanceComparison] = Field(default_factory=list)
    mismatches: List[str] = Field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.mismatches

    def extend(self, other: "ComparisonReport") -> None:
        self.instances.extend(other.instances)
        self.mismatches.extend(other.mismatches)


def _first(items: Set[Tuple[int, ...]]) -> Optional[List[int]]:
    return list(min(items)) if items else None


def compare_runs(
    query: Graph,
    data: Graph,
    configs: Sequence[MatchConfig],
    name: str = "instance",
) -> ComparisonReport:
    """Run the oracle once and the engine once per config; compare embedding sets."""
    truth = brute_force_enumerate(query, data).embeddings
    inst = InstanceComparison(name=name, oracle_count=len(truth))
    report = ComparisonReport(instances=[inst])
    for cfg in configs:
        cfg = cfg.model_copy(update={"emit_embeddings": True, "embedding_limit": None})
        result = match_query(query, data, cfg)
        got = set(result.embeddings or [])
        missing, extra = truth - got, got - truth
        equal = not missing and not extra and result.embedding_count == len(truth)
        inst.runs.append(
            ConfigRun(
                config=cfg.label(),
                embedding_count=result.embedding_count,
                recursions=result.stats.recursions,
                termination=result.termination.value,
                set_equal=equal,
                missing=_first(missing),
                extra=_first(extra),
            )
        )
        if not equal:
            report.mismatches.append(
                f"{name} [{cfg.label()}]: engine {result.embedding_count}, "
                f"oracle {len(truth)}"
            )
    return report


class SweepPoint(BaseModel):
    reservation_size: int
    recursions: int
    embedding_count: int
    guards: int
    same_embeddings: bool


def reservation_sweep(
    query: Graph,
    data: Graph,
    sizes: Sequence[int] = (0, 1, 2, 3, 4),
    base: Optional[MatchConfig] = None,
) -> List[SweepPoint]:
    """Recursions and embedding-set agreement for each reservation size ``r``."""
    base = base or MatchConfig()
    reference: Optional[Set[Tuple[int, ...]]] = None
    points: List[SweepPoint] = []
    for r in sizes:
        cfg = base.model_copy(
            update={
                "reservation_size": r,
                "emit_embeddings": True,
                "embedding_limit": None,
            }
        )
        gcs = build_plan(query, data, cfg)
        guards = generate_reservation_guards(gcs, cfg.effective_reservation_size)
        result = search_gcs(gcs, cfg)
        found = set(result.embeddings or [])
        if reference is None:
            reference = found
        points.append(
            SweepPoint(
                reservation_size=r,
                recursions=result.stats.recursions,
                embedding_count=result.embedding_count,
                guards=guards,
                same_embeddings=found == reference,
            )
        )
    return points


class ScalingPoint(BaseModel):
    edges: int
    vertices: int
    build_time: float
    reservation_time: float

    @property
    def total_time(self) -> float:
        return self.build_time + self.reservation_time


def scaling_profile(
    query_size: int,
    edge_counts: Sequence[int],
    seed: int = 0,
    *,
    average_degree: int = 8,
    label_count: int = 8,
    cfg: Optional[MatchConfig] = None,
    repeats: int = 3,
) -> List[ScalingPoint]:
    """Plan-building and guard-generation time for growing data graphs.

    The query is drawn once from the smallest data graph and reused, so only
    the data graph changes between points. Each point keeps the fastest of
    ``repeats`` runs, each over a fresh copy of the data graph.
    """
    cfg = cfg or MatchConfig()
    points: List[ScalingPoint] = []
    query: Optional[Graph] = None
    for m in edge_counts:
        n = max(query_size, 2 * m // average_degree)
        data = random_labeled_graph(n, m, label_count, [seed, m])
        if query is None:
            query = random_walk_query(data, query_size, [seed, 0])
        build_time = reservation_time = float("inf")
        for _ in range(max(1, repeats)):
            # adjacency caches live on the graph object
            fresh = Graph(data.labels, data.offsets, data.adjacency)
            started = time.perf_counter()
            gcs = build_plan(query, fresh, cfg)
            built = time.perf_counter()
            generate_reservation_guards(gcs, cfg.effective_reservation_size)
            done = time.perf_counter()
            build_time = min(build_time, built - started)
            reservation_time = min(reservation_time, done - built)
        points.append(
            ScalingPoint(
                edges=data.edge_count,
                vertices=n,
                build_time=build_time,
                reservation_time=reservation_time,
            )
        )
    return points


class BenchRow(BaseModel):
    query: str
    config: str
    time: float
    recursions: int = 0
    embeddings: int = 0
    termination: Optional[str] = None
    counters: Dict[str, int] = Field(default_factory=dict)
    error: Optional[str] = None


class BenchSummary(BaseModel):
    config: str
    queries: int
    completed: int
    limited: int
    failed: int
    buckets: Dict[str, int]
    mean_recursions: float
    dnf: bool = Field(
        description="Some subgroup of queries exceeded its total time budget"
    )


def bench_query(
    name: str, query: Graph, data: Graph, cfg: MatchConfig
) -> BenchRow:
    """One benchmark row; engine failures are recorded instead of raised."""
    started = time.perf_counter()
    try:
        result = match_query(query, data, cfg)
    except Exception as e:
        return BenchRow(
            query=name,
            config=cfg.label(),
            time=time.perf_counter() - started,
            error=str(e),
        )
    stats = result.stats
    return BenchRow(
        query=name,
        config=cfg.label(),
        time=time.perf_counter() - started,
        recursions=stats.recursions,
        embeddings=result.embedding_count,
        termination=result.termination.value,
        counters={
            "pruned_injectivity": stats.pruned_injectivity,
            "pruned_reservation": stats.pruned_reservation,
            "pruned_nv": stats.pruned_nv,
            "pruned_ne": stats.pruned_ne,
            "no_candidate": stats.no_candidate,
            "backjumps": stats.backjumps,
        },
    )


def summarize_bench(
    rows: Sequence[BenchRow],
    config: str,
    *,
    subgroup_size: int = DEFAULT_SUBGROUP_SIZE,
    subgroup_time: float = DEFAULT_SUBGROUP_TIME,
) -> BenchSummary:
    """Time buckets and the subgroup DNF rule for one config's rows (in query order)."""
    mine = [r for r in rows if r.config == config]
    buckets = {label: sum(1 for r in mine if r.time > t) for label, t in BUCKETS}
    dnf = False
    size = max(1, subgroup_size)
    for start in range(0, len(mine), size):
        if sum(r.time for r in mine[start : start + size]) > subgroup_time:
            dnf = True
            break
    ok = [r for r in mine if r.error is None]
    return BenchSummary(
        config=config,
        queries=len(mine),
        completed=sum(1 for r in ok if r.termination == Termination.COMPLETE.value),
        limited=sum(1 for r in ok if r.termination != Termination.COMPLETE.value),
        failed=len(mine) - len(ok),
        buckets=buckets,
        mean_recursions=(sum(r.recursions for r in ok) / len(ok)) if ok else 0.0,
        dnf=dnf,
    )


def run_bench(
    workload: Workload,
    data: Graph,
    configs: Sequence[MatchConfig],
    *,
    on_row: Optional[Callable[[BenchRow], None]] = None,
) -> List[BenchRow]:
    """Every workload query under every config, query-major."""
    rows: List[BenchRow] = []
    for wq in workload.queries:
        for cfg in configs:
            row = bench_query(wq.name, wq.graph, data, cfg)
            rows.append(row)
            if on_row is not None:
                on_row(row)
    return rows
