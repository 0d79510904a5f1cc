"""Match pipeline orchestration using LangGraph.

This module wires together plan building (filtering, matching order, GCS),
reservation guard generation, the guarded search and the final report into a
single callable function for API and CLI usage.
"""

import time
from typing import Dict, List, Optional, TypedDict

from langgraph.graph import END, START, StateGraph
from pydantic import BaseModel, Field

from .config import MatchConfig
from .graph import Graph
from .plan import GCS
from .reservation import generate_reservation_guards
from .search import EmbeddingSink, MatchResult, build_plan, search_gcs


class RunReport(BaseModel):
    """Structured outcome of one match run."""

    query_path: Optional[str] = None
    data_path: Optional[str] = None
    config: Dict[str, object] = Field(description="Echo of the effective MatchConfig")
    embeddings: int = Field(description="Number of embeddings found")
    termination: str = Field(description="complete, embedding-limit or time-limit")
    wall_time: float
    gcs_build_time: float
    reservation_time: float
    search_time: float
    recursions: int
    backjumps: int
    no_candidate: int
    pruned_injectivity: int
    pruned_reservation: int
    pruned_nv: int
    pruned_ne: int
    prune_ratio: Dict[str, float] = Field(
        default_factory=dict,
        description="Fraction of examined candidates pruned per guard kind",
    )
    reservation_guards: int = 0
    candidate_total: int = 0
    matching_order: List[int] = Field(default_factory=list)


class State(TypedDict):
    query: Graph
    data: Graph
    config: MatchConfig
    sink: Optional[EmbeddingSink]
    query_path: Optional[str]
    data_path: Optional[str]
    gcs: Optional[GCS]
    reservation_guards: Optional[int]
    result: Optional[MatchResult]
    timings: Dict[str, float]
    report: Optional[RunReport]
    started: float


def plan_candidates(state: State):
    query, data = state["query"], state["data"]
    print(
        f"🧮 Plan: filtering candidates for a {query.vertex_count}-vertex query "
        f"over {data.vertex_count} data vertices"
    )
    started = time.perf_counter()
    gcs = build_plan(query, data, state["config"])
    elapsed = time.perf_counter() - started
    total = sum(len(c) for c in gcs.candidates.sets)
    print(f"✅ Plan: {total} candidate vertices, order {list(gcs.order.order)}")
    return {"gcs": gcs, "timings": {**state["timings"], "gcs_build": elapsed}}


def generate_guards(state: State):
    cfg = state["config"]
    r = cfg.effective_reservation_size
    print(f"🛡️ Guards: generating reservation guards (r={r})")
    started = time.perf_counter()
    made = generate_reservation_guards(state["gcs"], r)
    elapsed = time.perf_counter() - started
    print(f"✅ Guards: {made} non-trivial reservations")
    return {
        "reservation_guards": made,
        "timings": {**state["timings"], "reservation": elapsed},
    }


def run_search(state: State):
    cfg = state["config"]
    print(f"🔎 Search: {cfg.label()} guards, {cfg.thread_count} thread(s)")
    started = time.perf_counter()
    result = search_gcs(state["gcs"], cfg, state.get("sink"))
    elapsed = time.perf_counter() - started
    if result.complete:
        print(f"✅ Search: {result.embedding_count} embeddings")
    else:
        print(
            f"⚠️ Search: stopped by {result.termination.value} after "
            f"{result.embedding_count} embeddings"
        )
    return {"result": result, "timings": {**state["timings"], "search": elapsed}}


def build_report(state: State):
    result: MatchResult = state["result"]
    stats = result.stats
    timings = state["timings"]
    gcs = state["gcs"]
    report = RunReport(
        query_path=state.get("query_path"),
        data_path=state.get("data_path"),
        config=state["config"].model_dump(),
        embeddings=result.embedding_count,
        termination=result.termination.value,
        wall_time=time.perf_counter() - state["started"],
        gcs_build_time=timings.get("gcs_build", 0.0),
        reservation_time=timings.get("reservation", 0.0),
        search_time=timings.get("search", 0.0),
        recursions=stats.recursions,
        backjumps=stats.backjumps,
        no_candidate=stats.no_candidate,
        pruned_injectivity=stats.pruned_injectivity,
        pruned_reservation=stats.pruned_reservation,
        pruned_nv=stats.pruned_nv,
        pruned_ne=stats.pruned_ne,
        prune_ratio=stats.prune_ratio(),
        reservation_guards=state.get("reservation_guards") or 0,
        candidate_total=sum(len(c) for c in gcs.candidates.sets),
        matching_order=list(gcs.order.order),
    )
    return {"report": report}


def build_graph() -> StateGraph:
    """Build and compile the LangGraph state machine for the pipeline."""
    graph_builder = StateGraph(State)
    graph_builder.add_node("plan_candidates", plan_candidates)
    graph_builder.add_node("generate_guards", generate_guards)
    graph_builder.add_node("run_search", run_search)
    graph_builder.add_node("build_report", build_report)

    graph_builder.add_edge(START, "plan_candidates")
    graph_builder.add_edge("plan_candidates", "generate_guards")
    graph_builder.add_edge("generate_guards", "run_search")
    graph_builder.add_edge("run_search", "build_report")
    graph_builder.add_edge("build_report", END)
    return graph_builder.compile()


# Compile once at import time for reuse.
graph = build_graph()


def run_match_pipeline(
    query: Graph,
    data: Graph,
    config: Optional[MatchConfig] = None,
    *,
    sink: Optional[EmbeddingSink] = None,
    query_path: Optional[str] = None,
    data_path: Optional[str] = None,
) -> Dict[str, object]:
    """Run the full match pipeline and return the final state.

    Args:
        query: Connected query graph.
        data: Data graph.
        config: Limits and guard toggles (environment defaults when omitted).
        sink: Called once per embedding as it is found.

    Returns:
        Dict with the GCS, the MatchResult and the RunReport under ``report``.
    """
    print("\n🚀 Starting match")
    init_state: State = {
        "query": query,
        "data": data,
        "config": config or MatchConfig.from_env(),
        "sink": sink,
        "query_path": query_path,
        "data_path": data_path,
        "gcs": None,
        "reservation_guards": None,
        "result": None,
        "timings": {},
        "report": None,
        "started": time.perf_counter(),
    }
    final_state = graph.invoke(init_state)
    print("✨ Match pipeline finished.\n")
    return final_state
