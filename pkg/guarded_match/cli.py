"""Console script entrypoint for guarded-match.

Subcommands: ``match``, ``verify``, ``gen`` and ``bench``. Exit codes: 0 on
a complete run, 1 on errors, 2 when a limit stopped the search, 3 when
verification finds a mismatch.
"""

import argparse
import contextlib
import json
import sys
from typing import List, Optional, Sequence

from pydantic import ValidationError

from .config import DEFAULT_EMBEDDING_LIMIT, MatchConfig, resolve_presets
from .graph_io import GraphFormatError, load_graph
from .harness import (
    DEFAULT_SUBGROUP_SIZE,
    DEFAULT_SUBGROUP_TIME,
    BenchRow,
    compare_runs,
    run_bench,
    summarize_bench,
)
from .pipeline import RunReport, run_match_pipeline
from .plan import PlanError
from .preflight import OracleEnvelope, preflight_check
from .workload import WorkloadError, generate_workload, read_workload, write_workload

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_LIMIT = 2
EXIT_MISMATCH = 3


def _add_config_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--limit", type=int, help="Embedding limit (0: none)")
    p.add_argument("--time-limit", type=float, default=None, help="Seconds")
    p.add_argument("--reservation-size", type=int, help="Max guard size r")
    p.add_argument("--no-reservation", action="store_true")
    p.add_argument("--no-nv", action="store_true")
    p.add_argument("--no-ne", action="store_true")
    p.add_argument("--no-backjump", action="store_true")
    p.add_argument("--threads", type=int, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--debug-checks", action="store_true")
    p.add_argument("--json", action="store_true", help="Machine-readable output")


def _config_from_args(args: argparse.Namespace, **extra) -> MatchConfig:
    cfg = MatchConfig.from_env(
        embedding_limit=args.limit if args.limit else None,
        time_limit=args.time_limit,
        reservation_size=args.reservation_size,
        use_reservation=not args.no_reservation,
        use_nv=not args.no_nv,
        use_ne=not args.no_ne,
        use_backjump=not args.no_backjump,
        thread_count=args.threads,
        seed=args.seed,
        debug_checks=args.debug_checks or None,
        **extra,
    )
    if args.limit == 0:
        cfg = cfg.model_copy(update={"embedding_limit": None})
    elif cfg.embedding_limit is None and args.limit is None:
        cfg = cfg.model_copy(update={"embedding_limit": DEFAULT_EMBEDDING_LIMIT})
    return cfg


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="guarded-match",
        description="Guarded subgraph matching: enumerate query embeddings",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    m = sub.add_parser("match", help="Enumerate embeddings of a query graph")
    m.add_argument("-d", "--data", required=True)
    m.add_argument("-q", "--query", required=True)
    m.add_argument("--emit-embeddings", metavar="PATH", default=None)
    m.add_argument("--strict-degrees", action="store_true")
    _add_config_flags(m)

    v = sub.add_parser("verify", help="Compare the engine with the oracle")
    v.add_argument("-d", "--data", required=True)
    v.add_argument("-q", "--query", required=True)
    v.add_argument("--configs", default="all", help="Preset names or 'matrix'")
    v.add_argument("--force", action="store_true", help="Ignore the size envelope")
    v.add_argument("--strict-degrees", action="store_true")
    _add_config_flags(v)

    g = sub.add_parser("gen", help="Generate a random-walk query workload")
    g.add_argument("-d", "--data", required=True)
    g.add_argument("-o", "--out", required=True, help="Workload directory")
    g.add_argument("--sizes", default="8", help="Comma-separated query sizes")
    g.add_argument("--count", type=int, default=100, help="Queries per size")
    g.add_argument("--seed", type=int, default=0)

    b = sub.add_parser("bench", help="Run a workload under guard configurations")
    b.add_argument("-d", "--data", required=True)
    b.add_argument("-w", "--workload", required=True)
    b.add_argument("--configs", default="all", help="Preset names or 'matrix'")
    b.add_argument("--per-query-time-limit", type=float, default=None)
    b.add_argument("--subgroup-limit", type=int, default=DEFAULT_SUBGROUP_SIZE)
    b.add_argument("--subgroup-time", type=float, default=DEFAULT_SUBGROUP_TIME)
    _add_config_flags(b)
    return parser


def _progress(args: argparse.Namespace):
    """Progress lines go to stderr when stdout carries JSON."""
    if args.json:
        return contextlib.redirect_stdout(sys.stderr)
    return contextlib.nullcontext()


def _print_report(report: RunReport) -> None:
    print(f"Embeddings:   {report.embeddings} ({report.termination})")
    print(
        f"Time:         {report.wall_time:.3f}s (plan {report.gcs_build_time:.3f}s, "
        f"guards {report.reservation_time:.3f}s, search {report.search_time:.3f}s)"
    )
    print(f"Recursions:   {report.recursions}  backjumps: {report.backjumps}")
    print(
        "Pruned:       "
        f"injectivity {report.pruned_injectivity}, "
        f"reservation {report.pruned_reservation}, "
        f"nv {report.pruned_nv}, ne {report.pruned_ne}, "
        f"no-candidate {report.no_candidate}"
    )


def cmd_match(args: argparse.Namespace) -> int:
    cfg = _config_from_args(args)
    query = load_graph(args.query, strict_degrees=args.strict_degrees)
    data = load_graph(args.data, strict_degrees=args.strict_degrees)
    out = sys.stdout
    dump = None
    if args.emit_embeddings:
        dump = open(args.emit_embeddings, "w", encoding="utf-8")
    try:
        sink = None
        if dump is not None:

            def sink(embedding):
                dump.write(" ".join(str(v) for v in embedding) + "\n")

        with _progress(args):
            state = run_match_pipeline(
                query,
                data,
                cfg,
                sink=sink,
                query_path=args.query,
                data_path=args.data,
            )
    finally:
        if dump is not None:
            dump.close()
    report: RunReport = state["report"]
    if args.json:
        out.write(json.dumps(report.model_dump()) + "\n")
    else:
        _print_report(report)
    return EXIT_OK if report.termination == "complete" else EXIT_LIMIT


def cmd_verify(args: argparse.Namespace) -> int:
    base = _config_from_args(args)
    query = load_graph(args.query, strict_degrees=args.strict_degrees)
    data = load_graph(args.data, strict_degrees=args.strict_degrees)
    configs = resolve_presets(args.configs, base)
    out = sys.stdout
    with _progress(args):
        envelope = None if args.force else OracleEnvelope()
        pf = preflight_check(query, data, base, envelope=envelope)
        if not pf["ok"]:
            failed = [
                f"{k}: {r['message']}"
                for k, r in pf.items()
                if isinstance(r, dict) and not r["ok"]
            ]
            print(f"❌ Refusing to verify: {'; '.join(failed)}", file=sys.stderr)
            return EXIT_ERROR
        print(f"🧪 Verify: {len(configs)} config(s) against the brute-force oracle")
        report = compare_runs(query, data, configs, name=args.query)
    inst = report.instances[0]
    if args.json:
        out.write(
            json.dumps(
                {
                    "ok": report.ok,
                    **inst.model_dump(),
                    "mismatches": report.mismatches,
                }
            )
            + "\n"
        )
    else:
        for run in inst.runs:
            mark = "✅" if run.set_equal else "❌"
            print(
                f"{mark} {run.config}: {run.embedding_count} embeddings "
                f"(oracle {inst.oracle_count}), {run.recursions} recursions"
            )
    if report.ok:
        return EXIT_OK
    for run in inst.runs:
        if not run.set_equal:
            if run.missing is not None:
                print(
                    f"❌ {run.config}: missing embedding {run.missing}",
                    file=sys.stderr,
                )
            if run.extra is not None:
                print(
                    f"❌ {run.config}: unexpected embedding {run.extra}",
                    file=sys.stderr,
                )
            break
    return EXIT_MISMATCH


def cmd_gen(args: argparse.Namespace) -> int:
    data = load_graph(args.data)
    sizes = [int(s) for s in args.sizes.split(",") if s.strip()]
    print(f"🎲 Gen: {args.count} queries per size {sizes} (seed {args.seed})")
    wl = generate_workload(data, sizes, args.count, args.seed)
    write_workload(wl, args.out, data_path=args.data)
    classes = ", ".join(f"{k}: {v}" for k, v in sorted(wl.classes().items()))
    print(f"✅ Gen: wrote {len(wl)} queries to {args.out} {classes}".rstrip())
    return EXIT_OK


def cmd_bench(args: argparse.Namespace) -> int:
    extra = {}
    if args.per_query_time_limit is not None:
        extra["time_limit"] = args.per_query_time_limit
    base = _config_from_args(args, **extra)
    configs = resolve_presets(args.configs, base)
    data = load_graph(args.data)
    wl = read_workload(args.workload)
    out = sys.stdout

    def on_row(row: BenchRow) -> None:
        if args.json:
            out.write(json.dumps({"row": row.model_dump()}) + "\n")
        else:
            status = row.error or row.termination
            out.write(
                f"{row.query}\t{row.config}\t{row.time:.3f}s\t"
                f"{row.recursions}\t{status}\n"
            )

    with _progress(args):
        print(f"🏁 Bench: {len(wl)} queries x {len(configs)} config(s)")
        rows: List[BenchRow] = run_bench(wl, data, configs, on_row=on_row)
    labels = list(dict.fromkeys(cfg.label() for cfg in configs))
    for label in labels:
        summary = summarize_bench(
            rows,
            label,
            subgroup_size=args.subgroup_limit,
            subgroup_time=args.subgroup_time,
        )
        if args.json:
            out.write(json.dumps({"summary": summary.model_dump()}) + "\n")
        else:
            buckets = ", ".join(f"{k}: {v}" for k, v in summary.buckets.items())
            dnf = " DNF" if summary.dnf else ""
            out.write(
                f"📊 {label}: {summary.completed}/{summary.queries} complete, "
                f"{summary.limited} limited, {summary.failed} failed; {buckets}; "
                f"mean recursions {summary.mean_recursions:.1f}{dnf}\n"
            )
    return EXIT_OK


COMMANDS = {
    "match": cmd_match,
    "verify": cmd_verify,
    "gen": cmd_gen,
    "bench": cmd_bench,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except (
        GraphFormatError,
        PlanError,
        WorkloadError,
        ValidationError,
        ValueError,
        OSError,
    ) as e:
        print(f"❌ {e}", file=sys.stderr)
        return EXIT_ERROR
