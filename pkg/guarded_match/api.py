"""FastAPI application exposing the match pipeline as REST API.

Endpoints:
- GET /health: Simple health check
- POST /api/match: Match an inline query graph against an inline data graph
- POST /api/verify: Compare the engine with the brute-force oracle
- GET/DELETE /api/runs: Stored run reports
"""

import uuid
from typing import Any, Dict, List, Optional

from dotenv import load_dotenv
from fastapi import FastAPI, HTTPException
from fastapi.middleware.cors import CORSMiddleware
from pydantic import BaseModel, Field, ValidationError

from .config import MatchConfig, resolve_presets
from .db import clear_runs as db_clear_runs
from .db import get_run as db_get_run
from .db import init_db
from .db import list_runs as db_list_runs
from .db import save_run as db_save_run
from .graph_io import GraphFormatError, parse_graph
from .harness import InstanceComparison, compare_runs
from .pipeline import RunReport, run_match_pipeline
from .plan import PlanError
from .preflight import OracleEnvelope, preflight_check

load_dotenv()
init_db()

app = FastAPI(title="Guarded Match", version="0.1.0")

# Enable CORS for local dev; adjust origins for production
app.add_middleware(
    CORSMiddleware,
    allow_origins=["*"],
    allow_credentials=True,
    allow_methods=["*"],
    allow_headers=["*"],
)

MAX_RETURNED_EMBEDDINGS = 1000


class MatchRequest(BaseModel):
    query: str = Field(..., description="Query graph in the text graph format")
    data: str = Field(..., description="Data graph in the text graph format")
    limit: Optional[int] = Field(None, description="Embedding limit")
    time_limit: Optional[float] = Field(None, description="Time limit in seconds")
    reservation_size: Optional[int] = None
    use_reservation: bool = True
    use_nv: bool = True
    use_ne: bool = True
    use_backjump: bool = True
    threads: Optional[int] = None
    return_embeddings: bool = Field(
        False, description=f"Include up to {MAX_RETURNED_EMBEDDINGS} embeddings"
    )


class MatchResponse(BaseModel):
    run_id: str
    report: RunReport
    embeddings: Optional[List[List[int]]] = None


class VerifyRequest(BaseModel):
    query: str
    data: str
    configs: str = Field("all,none", description="Comma-separated preset names")
    force: bool = Field(False, description="Skip the oracle size envelope")


class VerifyResponse(BaseModel):
    run_id: str
    ok: bool
    comparison: InstanceComparison
    mismatches: List[str]


def _parse_inputs(query_text: str, data_text: str):
    try:
        return parse_graph(query_text), parse_graph(data_text)
    except GraphFormatError as e:
        raise HTTPException(status_code=400, detail=f"Bad graph: {e}") from e


def _preflight_or_400(query, data, cfg, envelope=None) -> None:
    pf = preflight_check(query, data, cfg, envelope=envelope)
    if pf.get("ok"):
        return
    parts = []
    for k, r in pf.items():
        if isinstance(r, dict) and not r.get("ok"):
            parts.append(f"{k}: {r.get('message')}")
    msg = "; ".join(parts) or "Preflight failed"
    print(f"🚫 Aborting due to preflight failure: {msg}")
    raise HTTPException(status_code=400, detail=f"Preflight failed: {msg}")


@app.get("/health")
def health() -> Dict[str, str]:
    return {"status": "ok"}


@app.post("/api/match", response_model=MatchResponse)
def match(payload: MatchRequest):
    query, data = _parse_inputs(payload.query, payload.data)
    try:
        cfg = MatchConfig.from_env(
            embedding_limit=payload.limit,
            time_limit=payload.time_limit,
            reservation_size=payload.reservation_size,
            use_reservation=payload.use_reservation,
            use_nv=payload.use_nv,
            use_ne=payload.use_ne,
            use_backjump=payload.use_backjump,
            thread_count=payload.threads,
        )
    except ValidationError as e:
        raise HTTPException(status_code=400, detail=str(e)) from e
    _preflight_or_400(query, data, cfg)

    collected: List[List[int]] = []

    def sink(embedding):
        if len(collected) < MAX_RETURNED_EMBEDDINGS:
            collected.append(list(embedding))

    try:
        print("\n🔍 Received match request.")
        state = run_match_pipeline(
            query, data, cfg, sink=sink if payload.return_embeddings else None
        )
    except PlanError as e:
        raise HTTPException(status_code=400, detail=str(e)) from e
    except Exception as e:
        raise HTTPException(status_code=500, detail=str(e)) from e

    report: RunReport = state["report"]
    run_id = uuid.uuid4().hex
    db_save_run(run_id, "match", report.model_dump())
    return MatchResponse(
        run_id=run_id,
        report=report,
        embeddings=collected if payload.return_embeddings else None,
    )


@app.post("/api/verify", response_model=VerifyResponse)
def verify(payload: VerifyRequest):
    query, data = _parse_inputs(payload.query, payload.data)
    try:
        configs = resolve_presets(payload.configs)
    except ValueError as e:
        raise HTTPException(status_code=400, detail=str(e)) from e
    envelope = None if payload.force else OracleEnvelope()
    _preflight_or_400(query, data, configs[0] if configs else None, envelope)
    try:
        report = compare_runs(query, data, configs, name="api")
    except PlanError as e:
        raise HTTPException(status_code=400, detail=str(e)) from e
    except Exception as e:
        raise HTTPException(status_code=500, detail=str(e)) from e

    comparison = report.instances[0]
    run_id = uuid.uuid4().hex
    db_save_run(
        run_id,
        "verify",
        {
            "embeddings": comparison.oracle_count,
            "termination": "verified" if report.ok else "mismatch",
            "comparison": comparison.model_dump(),
        },
    )
    return VerifyResponse(
        run_id=run_id,
        ok=report.ok,
        comparison=comparison,
        mismatches=report.mismatches,
    )


class RunMeta(BaseModel):
    id: str
    ts: int
    kind: str
    embeddings: int
    termination: str


@app.get("/api/runs", response_model=List[RunMeta])
def list_runs():
    return db_list_runs()


@app.get("/api/runs/{run_id}")
def get_run(run_id: str) -> Dict[str, Any]:
    r = db_get_run(run_id)
    if not r:
        raise HTTPException(status_code=404, detail="Run not found")
    return r


@app.delete("/api/runs")
def clear_runs():
    db_clear_runs()
    return {"ok": True}
