"""Session persistence: file-per-session state, append-only logs, results.

Layout under the data directory:

    problems/<name>.brd.xml      read-only problem library
    sessions/<sid>/meta.json     identity record, written once
    sessions/<sid>/transactions.log  append-only event log (see below)
    sessions/<sid>/files/<name>  uploaded annotation tables
    results/<rid>.txt            immutable processing results

Log records are one JSON object per line. Plain transactions carry exactly
the fields selection, action, input, timestamp; auxiliary events carry a
``type`` discriminator (hint, file, process). Replaying the log through the
same fold the live service uses rebuilds trace and mastery state exactly,
which is what makes sessions survive a hard kill.
"""

from __future__ import annotations

import json
import logging
import os
import re
import secrets
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path

from ..adjacency import parse_refseq_tab, run_analysis
from ..graph import BehaviorGraph, GraphError, has_errors, parse_graph, validate_graph
from ..mastery import SkillMastery, apply_verdict, init_mastery
from ..tracer import (
    AlreadyDone,
    HintResponse,
    TraceState,
    Transaction,
    Verdict,
    request_hint,
    start_trace,
    trace,
)
from .config import ServiceConfig

logger = logging.getLogger(__name__)

_FILE_NAME_RE = re.compile(r"[A-Za-z0-9][A-Za-z0-9._\-]*\Z")


class ServiceError(Exception):
    """Base for request-level failures; carries the wire code and HTTP status."""

    code = "ServiceError"
    status = 500

    def __init__(self, message: str, **context):
        self.context = context
        super().__init__(message)


class UnknownGraph(ServiceError):
    code, status = "UnknownGraph", 404


class UnknownSession(ServiceError):
    code, status = "UnknownSession", 404


class UnknownResult(ServiceError):
    code, status = "UnknownResult", 404


class SessionDone(ServiceError):
    code, status = "SessionDone", 409


class HintUnavailable(ServiceError):
    code, status = "AlreadyDone", 409


class DuplicateName(ServiceError):
    code, status = "DuplicateName", 409


class NoFiles(ServiceError):
    code, status = "NoFiles", 409


class InvalidFileName(ServiceError):
    code, status = "InvalidFileName", 422


@dataclass
class TutorSession:
    """In-memory view of one learner session; disk is the source of truth."""

    session_id: str
    graph_id: str
    created_at: int
    trace: TraceState
    mastery: SkillMastery
    uploaded_files: list[str] = field(default_factory=list)
    result_id: str | None = None
    hint_history: list[HintResponse] = field(default_factory=list)
    last_verdict: Verdict | None = None
    lock: threading.Lock = field(default_factory=threading.Lock, repr=False)


def _now_ms() -> int:
    return int(time.time() * 1000)


def _new_id() -> str:
    return secrets.token_hex(16)


class TutorStore:
    """All session state behind the HTTP surface; thread-safe per session."""

    def __init__(self, config: ServiceConfig):
        config.check()
        self.config = config
        self.data_dir = config.data_dir
        self.sessions_dir = self.data_dir / "sessions"
        self.results_dir = self.data_dir / "results"
        self.sessions_dir.mkdir(parents=True, exist_ok=True)
        self.results_dir.mkdir(parents=True, exist_ok=True)
        self._graphs = self._load_library(config.resolved_problems_dir)
        self._sessions: dict[str, TutorSession] = {}
        self._registry_lock = threading.Lock()
        for meta_path in sorted(self.sessions_dir.glob("*/meta.json")):
            session = self._rebuild(meta_path)
            self._sessions[session.session_id] = session

    # -- problem library ----------------------------------------------------

    @staticmethod
    def _load_library(problems_dir: Path) -> dict[str, BehaviorGraph]:
        """Load every tutor-ready graph; a broken file must not brick the service."""
        graphs: dict[str, BehaviorGraph] = {}
        for path in sorted(problems_dir.glob("*.brd.xml")):
            try:
                graph = parse_graph(path.read_text(encoding="utf-8"))
            except GraphError as exc:
                logger.warning("skipping unparseable problem %s: %s", path.name, exc)
                continue
            diagnostics = validate_graph(graph)
            if has_errors(diagnostics):
                logger.warning("skipping problem %s: %s", path.name,
                               "; ".join(str(d) for d in diagnostics))
                continue
            graphs[graph.id] = graph
        return graphs

    def list_problems(self) -> list[BehaviorGraph]:
        return [self._graphs[k] for k in sorted(self._graphs)]

    def get_graph(self, graph_id: str) -> BehaviorGraph:
        graph = self._graphs.get(graph_id)
        if graph is None:
            raise UnknownGraph(f"no problem graph with id {graph_id!r}")
        return graph

    # -- session lifecycle ---------------------------------------------------

    def create_session(self, graph_id: str) -> TutorSession:
        graph = self.get_graph(graph_id)
        session_id = _new_id()
        created_at = _now_ms()
        session_dir = self.sessions_dir / session_id
        (session_dir / "files").mkdir(parents=True)
        (session_dir / "meta.json").write_text(json.dumps({
            "session_id": session_id,
            "graph_id": graph_id,
            "created_at": created_at,
        }, indent=2) + "\n", encoding="utf-8")
        (session_dir / "transactions.log").touch()
        session = TutorSession(
            session_id=session_id,
            graph_id=graph_id,
            created_at=created_at,
            trace=start_trace(graph),
            mastery=init_mastery(graph),
        )
        with self._registry_lock:
            self._sessions[session_id] = session
        return session

    def get_session(self, session_id: str) -> TutorSession:
        session = self._sessions.get(session_id)
        if session is None:
            raise UnknownSession(f"no session with id {session_id!r}")
        return session

    # -- event log -----------------------------------------------------------

    def _append(self, session: TutorSession, record: dict) -> None:
        path = self.sessions_dir / session.session_id / "transactions.log"
        with path.open("a", encoding="utf-8") as handle:
            handle.write(json.dumps(record) + "\n")
            handle.flush()
            os.fsync(handle.fileno())

    def _rebuild(self, meta_path: Path) -> TutorSession:
        meta = json.loads(meta_path.read_text(encoding="utf-8"))
        graph = self.get_graph(meta["graph_id"])
        session = TutorSession(
            session_id=meta["session_id"],
            graph_id=meta["graph_id"],
            created_at=meta["created_at"],
            trace=start_trace(graph),
            mastery=init_mastery(graph),
        )
        log_path = meta_path.parent / "transactions.log"
        if not log_path.exists():
            return session
        for line in log_path.read_text(encoding="utf-8").splitlines():
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError:
                break  # torn tail write from a hard kill; everything before is good
            kind = record.get("type", "transaction")
            if kind == "transaction":
                txn = Transaction(record["selection"], record["action"],
                                  record["input"], record["timestamp"])
                session.trace, verdict = trace(session.trace, txn)
                session.mastery = apply_verdict(session.mastery, graph, verdict)
                session.last_verdict = verdict
            elif kind == "hint":
                self._serve_hint(session)
            elif kind == "file":
                session.uploaded_files.append(record["name"])
            elif kind == "process":
                session.result_id = record["result_id"]
        return session

    # -- tutoring operations ---------------------------------------------------

    def post_transaction(self, session_id: str, selection: str, action: str,
                         input_value: str, timestamp: int | None = None
                         ) -> tuple[TutorSession, Verdict]:
        session = self.get_session(session_id)
        graph = self.get_graph(session.graph_id)
        with session.lock:
            if session.trace.done:
                raise SessionDone("session is already complete")
            txn = Transaction(selection, action, input_value,
                              timestamp if timestamp is not None else _now_ms())
            new_trace, verdict = trace(session.trace, txn)
            new_mastery = apply_verdict(session.mastery, graph, verdict)
            self._append(session, {
                "selection": txn.selection, "action": txn.action,
                "input": txn.input, "timestamp": txn.timestamp,
            })
            session.trace = new_trace
            session.mastery = new_mastery
            session.last_verdict = verdict
            return session, verdict

    def _serve_hint(self, session: TutorSession) -> HintResponse:
        """Shared by the live path and log replay so both move state identically."""
        new_trace, response = request_hint(session.trace)
        if self.config.hint_policy.escalate:
            session.trace = new_trace
        session.hint_history.append(response)
        return response

    def get_hint(self, session_id: str) -> tuple[TutorSession, HintResponse]:
        session = self.get_session(session_id)
        with session.lock:
            snapshot = session.trace
            try:
                response = self._serve_hint(session)
            except AlreadyDone as exc:
                raise HintUnavailable(str(exc)) from exc
            if self.config.hint_policy.log_events:
                try:
                    self._append(session, {"type": "hint", "timestamp": _now_ms()})
                except Exception:
                    session.trace = snapshot
                    session.hint_history.pop()
                    raise
            return session, response

    def upload_file(self, session_id: str, name: str, content: str) -> dict:
        session = self.get_session(session_id)
        with session.lock:
            if not _FILE_NAME_RE.fullmatch(name):
                raise InvalidFileName(f"unusable file name {name!r}")
            if name in session.uploaded_files:
                raise DuplicateName(f"file {name!r} already uploaded")
            records = parse_refseq_tab(content)  # TabFileError maps to 422
            target = self.sessions_dir / session.session_id / "files" / name
            target.write_text(content, encoding="utf-8")
            self._append(session, {"type": "file", "name": name,
                                   "timestamp": _now_ms()})
            session.uploaded_files.append(name)
            return {
                "name": name,
                "records": len(records),
                "genome_ids": sorted({r.genome_id for r in records}),
            }

    def process_files(self, session_id: str, gap_threshold: int | None = None) -> str:
        session = self.get_session(session_id)
        with session.lock:
            if not session.uploaded_files:
                raise NoFiles("no uploaded files to process")
            gap = gap_threshold if gap_threshold is not None \
                else self.config.gap_threshold
            records = []
            files_dir = self.sessions_dir / session.session_id / "files"
            for name in session.uploaded_files:
                records.extend(parse_refseq_tab(
                    (files_dir / name).read_text(encoding="utf-8")))
            analysis = run_analysis(records, gap, self.config.min_match)
            result_id = _new_id()
            (self.results_dir / f"{result_id}.txt").write_text(
                analysis.report, encoding="utf-8")
            self._append(session, {"type": "process", "gap_threshold": gap,
                                   "result_id": result_id, "timestamp": _now_ms()})
            session.result_id = result_id
            return result_id

    def get_result(self, result_id: str) -> str:
        path = self.results_dir / f"{result_id}.txt"
        if not _FILE_NAME_RE.fullmatch(result_id) or not path.exists():
            raise UnknownResult(f"no result with id {result_id!r}")
        return path.read_text(encoding="utf-8")
