"""FastAPI application: the HTTP surface over one TutorStore."""

from __future__ import annotations

from fastapi import FastAPI, Query, Request, Response
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse, PlainTextResponse

from .. import __version__
from ..adjacency import TabFileError
from ..graph import Evaluation
from ..mastery import export_table, select_next_problem
from .config import ServiceConfig
from .schemas import (
    CreateSessionIn,
    HintOut,
    ProblemListOut,
    ProblemOut,
    ProcessIn,
    ProcessOut,
    SessionOut,
    SkillOut,
    TransactionIn,
    TransactionOut,
    UploadIn,
    UploadOut,
    VerdictOut,
    mastery_out,
    session_out,
)
from .store import ServiceError, TutorStore


def create_app(config: ServiceConfig | None = None) -> FastAPI:
    config = config or ServiceConfig.from_env()
    store = TutorStore(config)
    app = FastAPI(title="genetutor", version=__version__)
    app.state.store = store
    app.state.config = config
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"])

    @app.exception_handler(ServiceError)
    async def service_error(_request: Request, exc: ServiceError) -> JSONResponse:
        body = {"error": {"code": exc.code, "message": str(exc), **exc.context}}
        return JSONResponse(status_code=exc.status, content=body)

    @app.exception_handler(TabFileError)
    async def parse_error(_request: Request, exc: TabFileError) -> JSONResponse:
        body = {"error": {"code": "ParseError", "message": str(exc), "line": exc.line}}
        return JSONResponse(status_code=422, content=body)

    @app.get("/problems", response_model=ProblemListOut)
    def list_problems(session_id: str | None = Query(default=None)) -> ProblemListOut:
        graphs = store.list_problems()
        problems = [
            ProblemOut(
                graph_id=g.id,
                title=g.title,
                steps=sum(1 for ln in g.links if ln.evaluation is Evaluation.CORRECT),
                skills=sorted(g.skills),
            )
            for g in graphs
        ]
        recommended = None
        if session_id is not None and graphs:
            session = store.get_session(session_id)
            recommended = select_next_problem(session.mastery, graphs,
                                              config.mastery_threshold)
        return ProblemListOut(problems=problems, recommended=recommended)

    @app.post("/sessions", response_model=SessionOut, status_code=201)
    def create_session(body: CreateSessionIn) -> SessionOut:
        session = store.create_session(body.graph_id)
        return session_out(session, store.get_graph(session.graph_id).title)

    @app.get("/sessions/{session_id}", response_model=SessionOut)
    def get_session(session_id: str) -> SessionOut:
        session = store.get_session(session_id)
        return session_out(session, store.get_graph(session.graph_id).title)

    @app.post("/sessions/{session_id}/transactions", response_model=TransactionOut)
    def post_transaction(session_id: str, body: TransactionIn) -> TransactionOut:
        session, verdict = store.post_transaction(
            session_id, body.selection, body.action, body.input, body.timestamp)
        return TransactionOut(
            verdict=VerdictOut.from_verdict(verdict),
            done=session.trace.done,
            mastery=mastery_out(session.mastery),
        )

    @app.post("/sessions/{session_id}/hint", response_model=HintOut)
    def get_hint(session_id: str) -> HintOut:
        _session, hint = store.get_hint(session_id)
        return HintOut.from_hint(hint)

    @app.post("/sessions/{session_id}/files", response_model=UploadOut, status_code=201)
    def upload_file(session_id: str, body: UploadIn) -> UploadOut:
        summary = store.upload_file(session_id, body.name, body.content)
        return UploadOut(**summary)

    @app.post("/sessions/{session_id}/process", response_model=ProcessOut)
    def process_files(session_id: str, body: ProcessIn | None = None) -> ProcessOut:
        gap = body.gap_threshold if body is not None else None
        return ProcessOut(result_id=store.process_files(session_id, gap))

    @app.get("/results/{result_id}", response_class=PlainTextResponse)
    def get_result(result_id: str) -> PlainTextResponse:
        return PlainTextResponse(store.get_result(result_id))

    @app.get("/sessions/{session_id}/skills")
    def get_skills(session_id: str,
                   format: str = Query(default="json", pattern="^(json|tsv)$")
                   ) -> Response:
        session = store.get_session(session_id)
        if format == "tsv":
            return PlainTextResponse(export_table(session.mastery))
        skills = [SkillOut(skill=name, p_know=state.p_know,
                           opportunities=state.opportunities).model_dump()
                  for name, state in sorted(session.mastery.entries.items())]
        return JSONResponse({"skills": skills})

    if config.ui_dir is not None and config.ui_dir.is_dir():
        from fastapi.staticfiles import StaticFiles
        app.mount("/ui", StaticFiles(directory=config.ui_dir, html=True), name="ui")

    return app
