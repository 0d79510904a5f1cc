import pytest
from conftest import clique
from fastapi.testclient import TestClient

from guarded_match import api as api_mod
from guarded_match import db
from guarded_match.api import app
from guarded_match.graph_io import serialize_graph


@pytest.fixture
def client(tmp_path, monkeypatch):
    monkeypatch.setattr(db, "DB_PATH", str(tmp_path / "runs.db"))
    for name in ("GMATCH_EMBEDDING_LIMIT", "GMATCH_TIME_LIMIT", "GMATCH_THREADS"):
        monkeypatch.delenv(name, raising=False)
    db.init_db()
    return TestClient(app)


@pytest.fixture
def sample_texts(sample_query, sample_data):
    return serialize_graph(sample_query), serialize_graph(sample_data)


def test_health(client):
    r = client.get("/health")
    assert r.status_code == 200
    assert r.json().get("status") == "ok"


def test_match_and_stored_run(client, sample_texts):
    q, d = sample_texts
    r = client.post(
        "/api/match", json={"query": q, "data": d, "return_embeddings": True}
    )
    assert r.status_code == 200
    body = r.json()
    assert body["report"]["embeddings"] == 1
    assert body["report"]["termination"] == "complete"
    assert body["embeddings"] == [[1, 4, 7, 10, 0]]

    runs = client.get("/api/runs").json()
    assert [x["id"] for x in runs] == [body["run_id"]]
    assert runs[0]["kind"] == "match"
    stored = client.get(f"/api/runs/{body['run_id']}").json()
    assert stored["result"]["recursions"] == body["report"]["recursions"]

    assert client.delete("/api/runs").json() == {"ok": True}
    assert client.get("/api/runs").json() == []


def test_match_limit(client):
    q, d = serialize_graph(clique(3)), serialize_graph(clique(6))
    r = client.post("/api/match", json={"query": q, "data": d, "limit": 10})
    assert r.status_code == 200
    report = r.json()["report"]
    assert report["embeddings"] == 10
    assert report["termination"] == "embedding-limit"
    assert r.json()["embeddings"] is None


def test_bad_graph_is_400(client, sample_texts):
    _, d = sample_texts
    r = client.post("/api/match", json={"query": "t 1 0\nv 0 x 0\n", "data": d})
    assert r.status_code == 400
    assert "line 2" in r.json()["detail"]


def test_disconnected_query_fails_preflight(client, sample_texts):
    _, d = sample_texts
    q = "t 2 0\nv 0 0 0\nv 1 0 0\n"
    r = client.post("/api/match", json={"query": q, "data": d})
    assert r.status_code == 400
    assert "query_connected" in r.json()["detail"]


def test_invalid_config_is_400(client, sample_texts):
    q, d = sample_texts
    r = client.post("/api/match", json={"query": q, "data": d, "threads": 0})
    assert r.status_code == 400


def test_engine_failure_is_500(client, sample_texts, monkeypatch):
    def boom(*args, **kwargs):
        raise RuntimeError("engine exploded")

    monkeypatch.setattr(api_mod, "run_match_pipeline", boom)
    q, d = sample_texts
    r = client.post("/api/match", json={"query": q, "data": d})
    assert r.status_code == 500
    assert r.json()["detail"] == "engine exploded"


def test_verify(client, sample_texts):
    q, d = sample_texts
    r = client.post("/api/verify", json={"query": q, "data": d})
    assert r.status_code == 200
    body = r.json()
    assert body["ok"] is True
    assert body["comparison"]["oracle_count"] == 1
    assert [run["config"] for run in body["comparison"]["runs"]] == ["all", "none"]
    assert client.get("/api/runs").json()[0]["termination"] == "verified"


def test_verify_outside_envelope(client):
    q, d = serialize_graph(clique(3)), serialize_graph(clique(45))
    r = client.post("/api/verify", json={"query": q, "data": d})
    assert r.status_code == 400
    assert "oracle_envelope" in r.json()["detail"]


def test_verify_unknown_preset(client, sample_texts):
    q, d = sample_texts
    r = client.post("/api/verify", json={"query": q, "data": d, "configs": "zzz"})
    assert r.status_code == 400


def test_missing_run_is_404(client):
    assert client.get("/api/runs/nope").status_code == 404
