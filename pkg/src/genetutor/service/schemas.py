"""Request/response models; field names are frozen in docs/api-reference.md."""

from __future__ import annotations

from typing import Literal

from pydantic import BaseModel, Field

from ..mastery import SkillMastery
from ..tracer import HintResponse, Verdict

from .store import TutorSession


class CreateSessionIn(BaseModel):
    graph_id: str = Field(min_length=1)


class TransactionIn(BaseModel):
    selection: str = Field(min_length=1)
    action: str = Field(min_length=1)
    input: str = ""
    timestamp: int | None = None  # server-assigned when omitted


class VerdictOut(BaseModel):
    kind: Literal["correct", "incorrect"]
    message: str | None
    matched_links: list[str]
    hint_target: str | None

    @classmethod
    def from_verdict(cls, verdict: Verdict) -> "VerdictOut":
        return cls(kind=verdict.kind.value, message=verdict.message,
                   matched_links=list(verdict.matched_links),
                   hint_target=verdict.hint_target)


class SkillOut(BaseModel):
    skill: str
    p_know: float
    opportunities: int


class TransactionOut(BaseModel):
    verdict: VerdictOut
    done: bool
    mastery: list[SkillOut]


class HintOut(BaseModel):
    target_link: str
    level: int
    message: str
    is_bottom_out: bool

    @classmethod
    def from_hint(cls, hint: HintResponse) -> "HintOut":
        return cls(target_link=hint.target_link, level=hint.level,
                   message=hint.message, is_bottom_out=hint.is_bottom_out)


class SessionOut(BaseModel):
    session_id: str
    graph_id: str
    graph_title: str
    created_at: int
    done: bool
    steps_taken: int
    files: list[str]
    result_id: str | None
    hints_shown: list[HintOut]
    last_verdict: VerdictOut | None


class UploadIn(BaseModel):
    name: str = Field(min_length=1)
    content: str


class UploadOut(BaseModel):
    name: str
    records: int
    genome_ids: list[str]


class ProcessIn(BaseModel):
    gap_threshold: int | None = Field(default=None, ge=0)


class ProcessOut(BaseModel):
    result_id: str


class ProblemOut(BaseModel):
    graph_id: str
    title: str
    steps: int
    skills: list[str]


class ProblemListOut(BaseModel):
    problems: list[ProblemOut]
    recommended: str | None = None


def mastery_out(mastery: SkillMastery) -> list[SkillOut]:
    return [
        SkillOut(skill=name, p_know=state.p_know, opportunities=state.opportunities)
        for name, state in sorted(mastery.entries.items())
    ]


def session_out(session: TutorSession, graph_title: str) -> SessionOut:
    steps = len(session.trace.interpretations[0].path)
    return SessionOut(
        session_id=session.session_id,
        graph_id=session.graph_id,
        graph_title=graph_title,
        created_at=session.created_at,
        done=session.trace.done,
        steps_taken=steps,
        files=list(session.uploaded_files),
        result_id=session.result_id,
        hints_shown=[HintOut.from_hint(h) for h in session.hint_history],
        last_verdict=VerdictOut.from_verdict(session.last_verdict)
        if session.last_verdict else None,
    )
