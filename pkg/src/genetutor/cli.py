"""Command-line entry points: serve, validate, replay, process.

`serve` runs the HTTP service; the other subcommands drive the core package
headlessly for authoring and regression work. Flags fall back to GENETUTOR_*
environment variables where one exists.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .adjacency import DEFAULT_GAP_THRESHOLD, DEFAULT_MIN_MATCH, TabFileError, \
    parse_refseq_tab, run_analysis
from .graph import GraphError, parse_graph, validate_graph
from .mastery import apply_verdict, export_table, init_mastery
from .tracer import Transaction, VerdictKind, replay
from .service.config import ServiceConfig


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="genetutor",
        description="Example-tracing tutor and gene-adjacency toolkit.")
    sub = parser.add_subparsers(dest="command", required=True)

    serve = sub.add_parser("serve", help="run the HTTP service")
    serve.add_argument("--port", type=int, default=None)
    serve.add_argument("--data-dir", type=Path, default=None)
    serve.add_argument("--problems-dir", type=Path, default=None)
    serve.add_argument("--gap-threshold", type=int, default=None)
    serve.add_argument("--ui-dir", type=Path, default=None,
                       help="built web UI to serve at /ui")

    validate = sub.add_parser("validate", help="check behavior-graph files")
    validate.add_argument("graphs", nargs="+", type=Path, metavar="GRAPH")

    replay_cmd = sub.add_parser("replay", help="re-run a transaction log")
    replay_cmd.add_argument("graph", type=Path, metavar="GRAPH")
    replay_cmd.add_argument("log", type=Path, metavar="LOG")
    replay_cmd.add_argument("--skills", action="store_true",
                            help="print the mastery table after the verdicts")

    process = sub.add_parser("process", help="headless gene-adjacency run")
    process.add_argument("files", nargs="+", type=Path, metavar="FILE")
    process.add_argument("--gap-threshold", type=int, default=DEFAULT_GAP_THRESHOLD)
    process.add_argument("--min-len", type=int, default=DEFAULT_MIN_MATCH,
                         help="minimum shared-segment length for comparisons")
    process.add_argument("--records", action="store_true",
                         help="emit the machine-readable variant instead")
    return parser


def _cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .service.app import create_app

    config = ServiceConfig.from_env()
    if args.port is not None:
        config.port = args.port
    if args.data_dir is not None:
        config.data_dir = args.data_dir
    if args.problems_dir is not None:
        config.problems_dir = args.problems_dir
    if args.gap_threshold is not None:
        config.gap_threshold = args.gap_threshold
    if args.ui_dir is not None:
        config.ui_dir = args.ui_dir
    app = create_app(config)
    uvicorn.run(app, host="127.0.0.1", port=config.port, log_level="info")
    return 0


def _cmd_validate(args: argparse.Namespace) -> int:
    exit_code = 0
    for path in args.graphs:
        try:
            graph = parse_graph(path.read_text(encoding="utf-8"))
        except GraphError as exc:
            print(f"{path}: {exc}", file=sys.stderr)
            exit_code = max(exit_code, 2)
            continue
        diagnostics = validate_graph(graph)
        for diag in diagnostics:
            print(f"{path}: {diag}")
        if diagnostics:
            exit_code = max(exit_code, 1)
    return exit_code


def _read_log(path: Path) -> list[Transaction]:
    txns = []
    for line in path.read_text(encoding="utf-8").splitlines():
        if not line.strip():
            continue
        record = json.loads(line)
        if record.get("type", "transaction") != "transaction":
            continue  # hint/file/process events do not trace
        txns.append(Transaction(record["selection"], record["action"],
                                record.get("input", ""), record.get("timestamp", 0)))
    return txns


def _cmd_replay(args: argparse.Namespace) -> int:
    try:
        graph = parse_graph(args.graph.read_text(encoding="utf-8"))
    except GraphError as exc:
        print(f"{args.graph}: {exc}", file=sys.stderr)
        return 2
    verdicts = replay(graph, _read_log(args.log))
    for verdict in verdicts:
        if verdict.kind is VerdictKind.CORRECT:
            print("Correct")
        else:
            print(f"Incorrect\t{verdict.message}")
    if args.skills:
        mastery = init_mastery(graph)
        for verdict in verdicts:
            mastery = apply_verdict(mastery, graph, verdict)
        sys.stdout.write("\n" + export_table(mastery))
    return 0


def _cmd_process(args: argparse.Namespace) -> int:
    records = []
    for path in args.files:
        try:
            records.extend(parse_refseq_tab(path.read_text(encoding="utf-8")))
        except TabFileError as exc:
            print(f"{path}: {exc}", file=sys.stderr)
            return 1
    result = run_analysis(records, args.gap_threshold, args.min_len)
    sys.stdout.write(result.records if args.records else result.report)
    return 0


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    handlers = {
        "serve": _cmd_serve,
        "validate": _cmd_validate,
        "replay": _cmd_replay,
        "process": _cmd_process,
    }
    return handlers[args.command](args)


if __name__ == "__main__":
    sys.exit(main())
