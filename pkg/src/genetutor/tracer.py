"""Example-tracing engine: matches learner transactions against a behavior graph.

The tracer keeps every interpretation of the learner's behavior that is still
consistent with the graph (ambiguous steps fork, unexplained interpretations
die), emits a correct/incorrect verdict per transaction, and serves escalating
next-step hints. States are immutable values: every operation returns a new
state, so distinct sessions can trace in parallel without locking.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from enum import Enum

from .graph import (
    BehaviorGraph,
    Diagnostic,
    Evaluation,
    GraphLink,
    GroupRegion,
    group_regions,
    has_errors,
    validate_graph,
)

__all__ = [
    "Transaction",
    "Interpretation",
    "VerdictKind",
    "Verdict",
    "HintResponse",
    "TraceState",
    "InvalidGraph",
    "AlreadyDone",
    "GENERIC_INCORRECT_MESSAGE",
    "SUBOPTIMAL_NOTE",
    "start_trace",
    "trace",
    "request_hint",
    "is_done",
    "replay",
]

GENERIC_INCORRECT_MESSAGE = "That step doesn't match. Try HINT."
SUBOPTIMAL_NOTE = "That step works, but there is a more direct way."


class InvalidGraph(Exception):
    """Raised when tracing is started on a graph with validation errors."""

    def __init__(self, diagnostics: list[Diagnostic]):
        self.diagnostics = diagnostics
        summary = "; ".join(str(d) for d in diagnostics) or "graph failed validation"
        super().__init__(summary)


class AlreadyDone(Exception):
    """Raised when a hint is requested on a finished trace."""


@dataclass(frozen=True)
class Transaction:
    """One learner action as seen by the tutor."""

    selection: str
    action: str
    input: str = ""
    timestamp: int = 0


@dataclass(frozen=True)
class Interpretation:
    """One hypothesis about the learner's path through the graph.

    While an unordered group is partially consumed, ``frontier`` stays at the
    group's entry node and ``consumed`` records which members were matched;
    the frontier jumps to the group's exit once the group completes.
    """

    path: tuple[str, ...]
    frontier: str
    group: frozenset[str] | None = None
    consumed: frozenset[str] = frozenset()

    @property
    def key(self) -> tuple[str, frozenset[str]]:
        return (self.frontier, self.consumed)


class VerdictKind(str, Enum):
    CORRECT = "correct"
    INCORRECT = "incorrect"


@dataclass(frozen=True)
class Verdict:
    """Outcome of matching one transaction.

    ``matched_links`` is ordered by document order; for correct verdicts it
    holds every link the step could be, for modeled errors the incorrect
    link(s) that recognized it. ``hint_target`` records, for unmodeled
    (generic) errors, the step the tutor would have hinted at the time, so
    mastery updates can attribute the error without the trace state.
    """

    kind: VerdictKind
    message: str | None = None
    matched_links: tuple[str, ...] = ()
    hint_target: str | None = None

    @property
    def correct(self) -> bool:
        return self.kind is VerdictKind.CORRECT


@dataclass(frozen=True)
class HintResponse:
    target_link: str
    level: int
    message: str
    is_bottom_out: bool


@dataclass(frozen=True)
class TraceState:
    """The learner's position: all live interpretations plus history."""

    graph: BehaviorGraph
    interpretations: tuple[Interpretation, ...]
    history: tuple[tuple[Transaction, Verdict], ...]
    hint_levels: dict[str, int]
    done: bool


class _Index:
    """Per-graph lookup tables for candidate computation."""

    def __init__(self, graph: BehaviorGraph):
        self.graph = graph
        self.link_by_id = {ln.id: ln for ln in graph.links}
        self.regions = sorted(group_regions(graph).values(), key=lambda r: r.order)
        self.region_by_link: dict[str, GroupRegion] = {
            link_id: region for region in self.regions for link_id in region.links
        }
        self.regions_by_entry: dict[str, list[GroupRegion]] = {}
        for region in self.regions:
            self.regions_by_entry.setdefault(region.entry, []).append(region)

    def plain_outgoing(self, node: str) -> list[GraphLink]:
        return sorted(
            (ln for ln in self.graph.links
             if ln.source == node and ln.advancing and ln.id not in self.region_by_link),
            key=lambda ln: ln.document_order)

    def incorrect_outgoing(self, node: str) -> list[GraphLink]:
        return sorted(
            (ln for ln in self.graph.links
             if ln.source == node and ln.evaluation is Evaluation.INCORRECT),
            key=lambda ln: ln.document_order)

    def terminal(self, node: str) -> bool:
        return not any(ln.source == node and ln.evaluation is Evaluation.CORRECT
                       for ln in self.graph.links)

    def candidates(self, interp: Interpretation) -> list[GraphLink]:
        """Advancing links this interpretation may take next, by document order."""
        if interp.group is not None:
            region = next(r for r in self.regions if r.links == interp.group)
            links = [self.link_by_id[i] for i in region.links - interp.consumed]
        else:
            links = self.plain_outgoing(interp.frontier)
            for region in self.regions_by_entry.get(interp.frontier, []):
                links.extend(self.link_by_id[i] for i in region.links)
        return sorted(links, key=lambda ln: ln.document_order)

    def advance(self, interp: Interpretation, link: GraphLink) -> Interpretation:
        path = interp.path + (link.id,)
        region = self.region_by_link.get(link.id)
        if region is None:
            return Interpretation(path=path, frontier=link.target)
        consumed = interp.consumed | {link.id}
        if consumed == region.links:
            return Interpretation(path=path, frontier=region.exit)
        return Interpretation(path=path, frontier=region.entry,
                              group=region.links, consumed=consumed)


def start_trace(graph: BehaviorGraph) -> TraceState:
    """Begin a trace at the graph's start node.

    Raises :class:`InvalidGraph` when validation reports any error-severity
    diagnostic.
    """
    diags = validate_graph(graph)
    if has_errors(diags):
        raise InvalidGraph([d for d in diags if d.severity.value == "error"])
    index = _Index(graph)
    interp = Interpretation(path=(), frontier=graph.start_node)
    return TraceState(
        graph=graph,
        interpretations=(interp,),
        history=(),
        hint_levels={},
        done=index.terminal(graph.start_node),
    )


def trace(state: TraceState, txn: Transaction) -> tuple[TraceState, Verdict]:
    """Match one transaction and return the successor state plus a verdict.

    Matching prefers advancing (correct/suboptimal) links across all live
    interpretations; the new interpretation set is every extension by a
    matching link, de-duplicated by (frontier, consumed group links). With no
    advancing match, modeled incorrect links yield their buggy message;
    otherwise the verdict is the generic incorrect one. Errors never change
    the interpretation set.
    """
    index = _Index(state.graph)

    matched_ids: set[str] = set()
    extensions: list[Interpretation] = []
    seen: set[tuple[str, frozenset[str]]] = set()
    for interp in state.interpretations:
        for link in index.candidates(interp):
            if not link.matcher.accepts(txn.selection, txn.action, txn.input):
                continue
            matched_ids.add(link.id)
            successor = index.advance(interp, link)
            if successor.key not in seen:
                seen.add(successor.key)
                extensions.append(successor)

    if extensions:
        matched = _by_document_order(index, matched_ids)
        first = index.link_by_id[matched[0]]
        message = SUBOPTIMAL_NOTE if first.evaluation is Evaluation.SUBOPTIMAL else None
        verdict = Verdict(VerdictKind.CORRECT, message, tuple(matched))
        now_done = state.done or any(
            interp.group is None and index.terminal(interp.frontier)
            for interp in extensions)
        new_state = replace(state, interpretations=tuple(extensions),
                            history=state.history + ((txn, verdict),), done=now_done)
        return new_state, verdict

    buggy_ids: set[str] = set()
    for interp in state.interpretations:
        for link in index.incorrect_outgoing(interp.frontier):
            if link.matcher.accepts(txn.selection, txn.action, txn.input):
                buggy_ids.add(link.id)
    if buggy_ids:
        matched = _by_document_order(index, buggy_ids)
        first = index.link_by_id[matched[0]]
        message = first.buggy_message or GENERIC_INCORRECT_MESSAGE
        verdict = Verdict(VerdictKind.INCORRECT, message, tuple(matched))
    else:
        verdict = Verdict(VerdictKind.INCORRECT, GENERIC_INCORRECT_MESSAGE, (),
                          hint_target=_hint_target(index, state))
    new_state = replace(state, history=state.history + ((txn, verdict),))
    return new_state, verdict


def _by_document_order(index: _Index, link_ids: set[str]) -> list[str]:
    return sorted(link_ids, key=lambda i: index.link_by_id[i].document_order)


def _hint_target(index: _Index, state: TraceState) -> str | None:
    """The correct link the tutor points at: lowest document order across frontiers."""
    best: GraphLink | None = None
    for interp in state.interpretations:
        for link in index.candidates(interp):
            if link.evaluation is not Evaluation.CORRECT:
                continue
            if best is None or link.document_order < best.document_order:
                best = link
    return best.id if best else None


def request_hint(state: TraceState) -> tuple[TraceState, HintResponse]:
    """Serve the next hint for the step the learner should take.

    Repeated requests on the same step escalate through its hint chain and
    stay clamped at the bottom-out hint. Raises :class:`AlreadyDone` on a
    finished trace.
    """
    if state.done:
        raise AlreadyDone("trace is already complete")
    index = _Index(state.graph)
    target = _hint_target(index, state)
    if target is None:
        raise AlreadyDone("no correct step remains to hint at")
    link = index.link_by_id[target]
    last = len(link.hints) - 1
    level = min(state.hint_levels.get(target, 0), last)
    response = HintResponse(
        target_link=target,
        level=level,
        message=link.hints[level],
        is_bottom_out=level == last,
    )
    new_levels = dict(state.hint_levels)
    new_levels[target] = min(level + 1, last)
    return replace(state, hint_levels=new_levels), response


def is_done(state: TraceState) -> bool:
    """Whether the learner has reached a state with no required next step.

    Sticky: once a trace reaches a done state it stays done even if later
    transactions prune the completed interpretation.
    """
    return state.done


def replay(graph: BehaviorGraph, txns: list[Transaction]) -> list[Verdict]:
    """Trace a logged transaction sequence from the start; pure in its inputs."""
    state = start_trace(graph)
    verdicts = []
    for txn in txns:
        state, verdict = trace(state, txn)
        verdicts.append(verdict)
    return verdicts
