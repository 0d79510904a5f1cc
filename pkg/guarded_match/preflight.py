from dataclasses import dataclass
from typing import Dict, Optional

from .config import MatchConfig
from .graph import Graph, is_connected


@dataclass(frozen=True)
class OracleEnvelope:
    """Largest instance the brute-force oracle is expected to finish quickly."""

    max_data_vertices: int = 40
    max_query_vertices: int = 8
    max_labels: int = 6


def check_query_nonempty(query: Graph) -> Dict[str, object]:
    if query.vertex_count == 0:
        return {"ok": False, "message": "Query graph has no vertices"}
    return {"ok": True, "message": f"{query.vertex_count} query vertices"}


def check_query_connected(query: Graph) -> Dict[str, object]:
    if query.vertex_count and not is_connected(query):
        return {"ok": False, "message": "Query graph is not connected"}
    return {"ok": True, "message": "Connected"}


def check_mask_width(query: Graph, cfg: MatchConfig) -> Dict[str, object]:
    if query.vertex_count > cfg.mask_width:
        return {
            "ok": False,
            "message": (
                f"{query.vertex_count} query vertices exceed mask width "
                f"{cfg.mask_width}"
            ),
        }
    return {"ok": True, "message": f"Fits in {cfg.mask_width}-bit masks"}


def check_labels_present(query: Graph, data: Graph) -> Dict[str, object]:
    """Labels of the query absent from the data graph; never fails the run."""
    missing = sorted(
        {query.label(u) for u in range(query.vertex_count)}
        - {data.label(v) for v in range(data.vertex_count)}
    )
    if missing:
        return {
            "ok": True,
            "warning": True,
            "message": f"Labels {missing} never occur in the data graph (0 embeddings)",
        }
    return {"ok": True, "message": "Every query label occurs in the data graph"}


def check_oracle_envelope(
    query: Graph, data: Graph, envelope: OracleEnvelope
) -> Dict[str, object]:
    labels = len(
        {query.label(u) for u in range(query.vertex_count)}
        | {data.label(v) for v in range(data.vertex_count)}
    )
    problems = []
    if data.vertex_count > envelope.max_data_vertices:
        problems.append(
            f"data has {data.vertex_count} > {envelope.max_data_vertices} vertices"
        )
    if query.vertex_count > envelope.max_query_vertices:
        problems.append(
            f"query has {query.vertex_count} > {envelope.max_query_vertices} vertices"
        )
    if labels > envelope.max_labels:
        problems.append(f"{labels} > {envelope.max_labels} distinct labels")
    if problems:
        return {"ok": False, "message": "; ".join(problems)}
    return {"ok": True, "message": "Within the brute-force envelope"}


def preflight_check(
    query: Graph,
    data: Graph,
    cfg: Optional[MatchConfig] = None,
    *,
    envelope: Optional[OracleEnvelope] = None,
) -> Dict[str, object]:
    """Run a suite of preflight checks and print CLI logs.

    Returns a dict with aggregate status and per-check results.
    """
    print("\n🚦 Preflight: checking inputs…")
    cfg = cfg or MatchConfig()
    results: Dict[str, object] = {}

    checks = [
        ("query_nonempty", "🔢 Query size", check_query_nonempty(query)),
        ("query_connected", "🔗 Query connectivity", check_query_connected(query)),
        ("mask_width", "🧮 Mask width", check_mask_width(query, cfg)),
        ("labels_present", "🏷️ Labels", check_labels_present(query, data)),
    ]
    if envelope is not None:
        checks.append(
            (
                "oracle_envelope",
                "📏 Oracle envelope",
                check_oracle_envelope(query, data, envelope),
            )
        )
    for key, title, res in checks:
        status = "OK" if res["ok"] else "FAIL"
        if res.get("warning"):
            status = "WARN"
        print(f"   {title}: {status}: {res['message']}")
        results[key] = res

    all_ok = all(res["ok"] for _, _, res in checks)
    results["ok"] = all_ok
    print(
        "✅ Preflight: all checks passed\n"
        if all_ok
        else "❌ Preflight: issues detected.\n"
    )
    return results
