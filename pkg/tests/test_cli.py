import json
from types import SimpleNamespace

import pytest
from conftest import clique

from guarded_match import harness
from guarded_match.cli import EXIT_ERROR, EXIT_LIMIT, EXIT_MISMATCH, EXIT_OK, main
from guarded_match.graph_io import write_graph
from guarded_match.search import MatchStats, Termination
from guarded_match.workload import read_workload


@pytest.fixture(autouse=True)
def clean_env(monkeypatch):
    for name in (
        "GMATCH_EMBEDDING_LIMIT",
        "GMATCH_TIME_LIMIT",
        "GMATCH_RESERVATION_SIZE",
        "GMATCH_THREADS",
    ):
        monkeypatch.delenv(name, raising=False)


@pytest.fixture
def sample_files(tmp_path, sample_query, sample_data):
    q, d = tmp_path / "q.graph", tmp_path / "d.graph"
    write_graph(sample_query, q)
    write_graph(sample_data, d)
    return str(q), str(d)


def test_match_complete(sample_files, capsys):
    q, d = sample_files
    assert main(["match", "-q", q, "-d", d]) == EXIT_OK
    assert "Embeddings:   1 (complete)" in capsys.readouterr().out


def test_match_json_and_embedding_dump(sample_files, tmp_path, capsys):
    q, d = sample_files
    dump = tmp_path / "emb.txt"
    code = main(["match", "-q", q, "-d", d, "--json", "--emit-embeddings", str(dump)])
    assert code == EXIT_OK
    report = json.loads(capsys.readouterr().out)
    assert report["embeddings"] == 1
    assert report["termination"] == "complete"
    assert report["query_path"] == q
    assert dump.read_text() == "1 4 7 10 0\n"


def test_match_limit_exit_code(tmp_path, capsys):
    q, d = tmp_path / "q.graph", tmp_path / "d.graph"
    write_graph(clique(3), q)
    write_graph(clique(6), d)
    assert main(["match", "-q", str(q), "-d", str(d), "--limit", "5"]) == EXIT_LIMIT
    assert "embedding-limit" in capsys.readouterr().out
    assert main(["match", "-q", str(q), "-d", str(d), "--limit", "0"]) == EXIT_OK


def test_match_parse_error(tmp_path, sample_files, capsys):
    bad = tmp_path / "bad.graph"
    bad.write_text("t 1 0\nv 0 x 0\n")
    _, d = sample_files
    assert main(["match", "-q", str(bad), "-d", d]) == EXIT_ERROR
    assert "line 2" in capsys.readouterr().err


def test_verify_ok(sample_files, capsys):
    q, d = sample_files
    assert main(["verify", "-q", q, "-d", d, "--configs", "matrix"]) == EXIT_OK
    out = capsys.readouterr().out
    assert out.count("✅ ") >= 16


def test_verify_refuses_large_instances(tmp_path, capsys):
    q, d = tmp_path / "q.graph", tmp_path / "d.graph"
    write_graph(clique(3), q)
    write_graph(clique(45), d)
    assert main(["verify", "-q", str(q), "-d", str(d)]) == EXIT_ERROR
    assert "Refusing to verify" in capsys.readouterr().err


def test_verify_reports_mismatch(monkeypatch, sample_files, capsys):
    def broken(query, data, cfg):
        return SimpleNamespace(
            embeddings=[],
            embedding_count=0,
            stats=MatchStats(),
            termination=Termination.COMPLETE,
        )

    monkeypatch.setattr(harness, "match_query", broken)
    q, d = sample_files
    assert main(["verify", "-q", q, "-d", d, "--json"]) == EXIT_MISMATCH
    captured = capsys.readouterr()
    assert json.loads(captured.out)["ok"] is False
    assert "missing embedding [1, 4, 7, 10, 0]" in captured.err


def test_gen_and_bench(tmp_path, sample_data, capsys):
    d = tmp_path / "d.graph"
    write_graph(sample_data, d)
    wl = tmp_path / "wl"
    args = ["gen", "-d", str(d), "-o", str(wl), "--sizes", "3", "--count", "10"]
    assert main(args) == EXIT_OK
    assert len(read_workload(wl)) == 10
    capsys.readouterr()

    code = main(
        ["bench", "-d", str(d), "-w", str(wl), "--configs", "all,none", "--json"]
    )
    assert code == EXIT_OK
    lines = [json.loads(x) for x in capsys.readouterr().out.splitlines()]
    rows = [x["row"] for x in lines if "row" in x]
    summaries = [x["summary"] for x in lines if "summary" in x]
    assert len(rows) == 20
    assert [s["config"] for s in summaries] == ["all", "none"]
    assert all(s["completed"] == 10 for s in summaries)


def test_gen_with_zero_count(tmp_path, sample_data):
    d = tmp_path / "d.graph"
    write_graph(sample_data, d)
    wl = tmp_path / "wl"
    assert main(["gen", "-d", str(d), "-o", str(wl), "--count", "0"]) == EXIT_OK
    assert len(read_workload(wl)) == 0


def test_unknown_preset_is_an_error(sample_files, capsys):
    q, d = sample_files
    assert main(["verify", "-q", q, "-d", d, "--configs", "bogus"]) == EXIT_ERROR
    assert "unknown config preset" in capsys.readouterr().err
