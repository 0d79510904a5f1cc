import json
import os
import sqlite3
import time
from typing import Any, Dict, List, Optional

DB_PATH = os.environ.get("GMATCH_DB_PATH", os.path.join(os.getcwd(), "gmatch.db"))


def _get_conn() -> sqlite3.Connection:
    conn = sqlite3.connect(DB_PATH)
    conn.row_factory = sqlite3.Row
    return conn


def init_db() -> None:
    conn = _get_conn()
    try:
        c = conn.cursor()
        c.execute(
            """
            CREATE TABLE IF NOT EXISTS runs (
                id TEXT PRIMARY KEY,
                ts INTEGER NOT NULL,
                kind TEXT NOT NULL,
                embeddings INTEGER NOT NULL,
                termination TEXT NOT NULL,
                result TEXT NOT NULL
            )
            """
        )
        conn.commit()
    finally:
        conn.close()


def save_run(run_id: str, kind: str, result: Dict[str, Any]) -> None:
    """Store one run; ``result`` is a JSON-able report (match or verify)."""
    conn = _get_conn()
    try:
        c = conn.cursor()
        c.execute(
            (
                "INSERT INTO runs (id, ts, kind, embeddings, termination, result) "
                "VALUES (?, ?, ?, ?, ?, ?)"
            ),
            (
                run_id,
                int(time.time()),
                kind,
                int(result.get("embeddings", 0)),
                str(result.get("termination", "")),
                json.dumps(result),
            ),
        )
        conn.commit()
    finally:
        conn.close()


def list_runs() -> List[Dict[str, Any]]:
    conn = _get_conn()
    try:
        c = conn.cursor()
        rows = c.execute(
            "SELECT id, ts, kind, embeddings, termination FROM runs ORDER BY ts DESC"
        ).fetchall()
        return [
            {
                "id": r["id"],
                "ts": r["ts"],
                "kind": r["kind"],
                "embeddings": r["embeddings"],
                "termination": r["termination"],
            }
            for r in rows
        ]
    finally:
        conn.close()


def get_run(run_id: str) -> Optional[Dict[str, Any]]:
    conn = _get_conn()
    try:
        c = conn.cursor()
        row = c.execute(
            "SELECT id, ts, kind, result FROM runs WHERE id = ?", (run_id,)
        ).fetchone()
        if not row:
            return None
        return {
            "id": row["id"],
            "ts": row["ts"],
            "kind": row["kind"],
            "result": json.loads(row["result"]),
        }
    finally:
        conn.close()


def clear_runs() -> None:
    conn = _get_conn()
    try:
        c = conn.cursor()
        c.execute("DELETE FROM runs")
        conn.commit()
    finally:
        conn.close()
