"""Behavior-graph problem format: types, XML parsing, serialization, validation.

A behavior graph describes one tutoring problem: nodes are problem-solving
states, links are learner steps annotated with input matchers, a correctness
evaluation, hint chains and skill labels. Graphs are immutable after parsing
and safe to share across threads. The on-disk format is a small documented
XML dialect (see docs/graph-format.md), files conventionally named
``*.brd.xml``.
"""

from __future__ import annotations

import re
import xml.etree.ElementTree as ET
import xml.sax
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache

__all__ = [
    "Evaluation",
    "PatternKind",
    "MatchPattern",
    "StepMatcher",
    "SkillDef",
    "GraphNode",
    "GraphLink",
    "GroupRegion",
    "BehaviorGraph",
    "GraphError",
    "MalformedXml",
    "SchemaViolation",
    "DanglingReference",
    "DuplicateId",
    "NoStartNode",
    "Severity",
    "DiagnosticKind",
    "Diagnostic",
    "SkillMatrix",
    "parse_graph",
    "serialize_graph",
    "validate_graph",
    "has_errors",
    "skill_matrix",
    "group_regions",
    "interpretation_bound",
]

INTERPRETATION_CAP = 256

# Defaults applied when a <skill> omits its knowledge-tracing parameters.
DEFAULT_P_INIT = 0.25
DEFAULT_P_TRANSIT = 0.2
DEFAULT_P_SLIP = 0.1
DEFAULT_P_GUESS = 0.2

_ID_RE = re.compile(r"[A-Za-z0-9][A-Za-z0-9_.\-]*\Z")


class Evaluation(str, Enum):
    CORRECT = "correct"
    INCORRECT = "incorrect"
    SUBOPTIMAL = "suboptimal"


class PatternKind(str, Enum):
    EXACT = "exact"
    WILDCARD = "wildcard"
    REGEX = "regex"


@lru_cache(maxsize=512)
def _compile_pattern(kind: PatternKind, pattern: str) -> re.Pattern[str]:
    if kind is PatternKind.REGEX:
        return re.compile(pattern)
    # Wildcard: only * (any run) and ? (any single char) are special.
    parts = []
    for ch in pattern:
        if ch == "*":
            parts.append(".*")
        elif ch == "?":
            parts.append(".")
        else:
            parts.append(re.escape(ch))
    return re.compile("".join(parts), re.DOTALL)


@dataclass(frozen=True)
class MatchPattern:
    """Pattern over a transaction's input value; whole-input matching."""

    kind: PatternKind = PatternKind.EXACT
    pattern: str = ""

    def accepts(self, value: str) -> bool:
        if self.kind is PatternKind.EXACT:
            return value == self.pattern
        return _compile_pattern(self.kind, self.pattern).fullmatch(value) is not None


ANY_INPUT = MatchPattern(PatternKind.WILDCARD, "*")


@dataclass(frozen=True)
class StepMatcher:
    """Selection-action-input triple a link uses to recognize a learner step."""

    selection: str
    action: str
    input: MatchPattern = ANY_INPUT

    def accepts(self, selection: str, action: str, input_value: str) -> bool:
        return (
            selection == self.selection
            and action == self.action
            and self.input.accepts(input_value)
        )


@dataclass(frozen=True)
class SkillDef:
    """A declared skill with its knowledge-tracing parameters."""

    name: str
    label: str
    p_init: float = DEFAULT_P_INIT
    p_transit: float = DEFAULT_P_TRANSIT
    p_slip: float = DEFAULT_P_SLIP
    p_guess: float = DEFAULT_P_GUESS


@dataclass(frozen=True)
class GraphNode:
    id: str
    label: str = ""


@dataclass(frozen=True)
class GraphLink:
    id: str
    source: str
    target: str
    matcher: StepMatcher
    evaluation: Evaluation
    hints: tuple[str, ...] = ()
    buggy_message: str | None = None
    skills: tuple[str, ...] = ()
    document_order: int = 0

    @property
    def advancing(self) -> bool:
        return self.evaluation is not Evaluation.INCORRECT


@dataclass(frozen=True)
class GroupRegion:
    """An unordered group resolved to its chain: entry/exit nodes and link order."""

    links: frozenset[str]
    entry: str
    exit: str
    order: tuple[str, ...]


@dataclass
class BehaviorGraph:
    """One authored tutoring problem."""

    id: str
    title: str
    start_node: str
    nodes: dict[str, GraphNode]
    links: tuple[GraphLink, ...]
    skills: dict[str, SkillDef]
    unordered_groups: frozenset[frozenset[str]] = frozenset()

    def link(self, link_id: str) -> GraphLink:
        for ln in self.links:
            if ln.id == link_id:
                return ln
        raise KeyError(link_id)

    def links_from(self, node_id: str) -> list[GraphLink]:
        return [ln for ln in self.links if ln.source == node_id]


# ---------------------------------------------------------------------------
# Errors
# ---------------------------------------------------------------------------

class GraphError(Exception):
    """Base for behavior-graph file errors; carries element/line context."""

    def __init__(self, message: str, *, element: str | None = None, line: int | None = None):
        self.message = message
        self.element = element
        self.line = line
        ctx = []
        if element:
            ctx.append(f"element <{element}>")
        if line is not None:
            ctx.append(f"line {line}")
        super().__init__(f"{message} ({', '.join(ctx)})" if ctx else message)


class MalformedXml(GraphError):
    pass


class SchemaViolation(GraphError):
    pass


class DanglingReference(GraphError):
    pass


class DuplicateId(GraphError):
    pass


class NoStartNode(GraphError):
    pass


# ---------------------------------------------------------------------------
# Parsing
# ---------------------------------------------------------------------------

class _LineCollector(xml.sax.ContentHandler):
    """Records the source line of every element start, in document order."""

    def __init__(self) -> None:
        super().__init__()
        self.lines: list[int] = []
        self._locator = None

    def setDocumentLocator(self, locator) -> None:  # noqa: N802 (sax API)
        self._locator = locator

    def startElement(self, name, attrs) -> None:  # noqa: N802 (sax API)
        self.lines.append(self._locator.getLineNumber() if self._locator else 0)


def _read_xml(xml_text: str) -> tuple[ET.Element, dict[int, int]]:
    """Parse text into an element tree plus an id(elem) -> line-number map."""
    try:
        root = ET.fromstring(xml_text)
    except ET.ParseError as exc:
        line = exc.position[0] if exc.position else None
        raise MalformedXml(f"not well-formed XML: {exc.msg if hasattr(exc, 'msg') else exc}",
                           line=line) from exc
    collector = _LineCollector()
    try:
        xml.sax.parseString(xml_text.encode("utf-8"), collector)
    except xml.sax.SAXException:
        collector.lines = []
    # tree.iter() walks in document order, matching the SAX event order
    lines: dict[int, int] = {}
    for elem, line in zip(root.iter(), collector.lines):
        lines[id(elem)] = line
    return root, lines


class _ElemReader:
    """Strict accessor over one element: unknown attributes are schema errors."""

    def __init__(self, elem: ET.Element, line: int | None):
        self.elem = elem
        self.tag = elem.tag
        self.line = line
        self._attrs = dict(elem.attrib)

    def err(self, cls: type[GraphError], message: str) -> GraphError:
        return cls(message, element=self.tag, line=self.line)

    def required(self, name: str) -> str:
        if name not in self._attrs:
            raise self.err(SchemaViolation, f"missing required attribute '{name}'")
        return self._attrs.pop(name)

    def optional(self, name: str, default: str | None = None) -> str | None:
        return self._attrs.pop(name, default)

    def finish(self) -> None:
        if self._attrs:
            unknown = ", ".join(sorted(self._attrs))
            raise self.err(SchemaViolation, f"unknown attribute(s): {unknown}")

    def identifier(self, name: str) -> str:
        value = self.required(name)
        if not _ID_RE.fullmatch(value):
            raise self.err(SchemaViolation,
                           f"attribute '{name}' is not a valid identifier: {value!r}")
        return value

    def probability(self, name: str, default: float) -> float:
        raw = self.optional(name)
        if raw is None:
            return default
        try:
            value = float(raw)
        except ValueError:
            raise self.err(SchemaViolation, f"attribute '{name}' is not a number: {raw!r}")
        if not 0.0 <= value <= 1.0:
            raise self.err(SchemaViolation, f"attribute '{name}' out of [0, 1]: {value}")
        return value


def _parse_matcher(reader: _ElemReader) -> StepMatcher:
    selection = reader.required("selection")
    action = reader.required("action")
    if not selection or not action:
        raise reader.err(SchemaViolation, "matcher selection and action must be non-empty")
    raw_input = reader.optional("input")
    raw_kind = reader.optional("match")
    reader.finish()
    if raw_input is None:
        if raw_kind is not None:
            raise reader.err(SchemaViolation, "'match' requires an 'input' pattern")
        return StepMatcher(selection, action)
    kind = PatternKind.EXACT
    if raw_kind is not None:
        try:
            kind = PatternKind(raw_kind)
        except ValueError:
            raise reader.err(SchemaViolation, f"unknown match kind: {raw_kind!r}")
    if kind is PatternKind.REGEX:
        try:
            re.compile(raw_input)
        except re.error as exc:
            raise reader.err(SchemaViolation, f"regex does not compile: {exc}")
    return StepMatcher(selection, action, MatchPattern(kind, raw_input))


def _chain_region(links_by_id: dict[str, GraphLink], member_ids: frozenset[str]) -> GroupRegion:
    """Resolve a group's members into a simple chain, or raise ValueError."""
    members = [links_by_id[i] for i in sorted(member_ids)]
    if any(not ln.advancing for ln in members):
        raise ValueError("unordered groups may only contain correct/suboptimal links")
    sources = {ln.source for ln in members}
    targets = {ln.target for ln in members}
    if len(sources) != len(members):
        raise ValueError("group links must form a chain (repeated source node)")
    entries = sources - targets
    if len(entries) != 1:
        raise ValueError("group links must form a single chain with one entry")
    entry = entries.pop()
    by_source = {ln.source: ln for ln in members}
    order: list[str] = []
    seen_nodes = {entry}
    node = entry
    while node in by_source:
        ln = by_source[node]
        order.append(ln.id)
        node = ln.target
        if node in seen_nodes:
            raise ValueError("group links must form a chain (cycle detected)")
        seen_nodes.add(node)
    if len(order) != len(members):
        raise ValueError("group links must form one contiguous chain")
    return GroupRegion(links=member_ids, entry=entry, exit=node, order=tuple(order))


def _group_isolation_problems(all_links: tuple[GraphLink, ...], region: GroupRegion) -> list[str]:
    """Non-member links may not touch a group chain's interior nodes."""
    members = {ln.id for ln in all_links if ln.id in region.links}
    interior = set()
    for ln in all_links:
        if ln.id in members:
            interior.update((ln.source, ln.target))
    interior -= {region.entry, region.exit}
    problems = []
    for ln in all_links:
        if ln.id in members:
            continue
        if ln.source in interior or ln.target in interior:
            problems.append(
                f"link {ln.id!r} touches node(s) inside the unordered group "
                f"{{{' '.join(sorted(region.links))}}}")
    return problems


def parse_graph(xml_text: str) -> BehaviorGraph:
    """Parse behavior-graph XML into a validated :class:`BehaviorGraph`.

    Raises :class:`MalformedXml`, :class:`SchemaViolation`,
    :class:`DanglingReference`, :class:`DuplicateId` or :class:`NoStartNode`,
    each with line/element context. Link ``document_order`` follows file order.
    """
    root, lines = _read_xml(xml_text)

    def reader(elem: ET.Element) -> _ElemReader:
        return _ElemReader(elem, lines.get(id(elem)))

    top = reader(root)
    if root.tag != "graph":
        raise top.err(SchemaViolation, f"root element must be <graph>, got <{root.tag}>")
    graph_id = top.identifier("id")
    title = top.required("title")
    start = top.optional("start")
    top.finish()

    nodes: dict[str, GraphNode] = {}
    skills: dict[str, SkillDef] = {}
    links: list[GraphLink] = []
    link_elems: list[_ElemReader] = []
    group_sets: list[tuple[frozenset[str], _ElemReader]] = []

    for child in root:
        r = reader(child)
        if child.tag == "node":
            node_id = r.identifier("id")
            label = r.optional("label", "") or ""
            r.finish()
            if node_id in nodes:
                raise r.err(DuplicateId, f"duplicate node id {node_id!r}")
            nodes[node_id] = GraphNode(node_id, label)
        elif child.tag == "skill":
            name = r.identifier("name")
            label = r.optional("label", name) or name
            skill = SkillDef(
                name=name,
                label=label,
                p_init=r.probability("p-init", DEFAULT_P_INIT),
                p_transit=r.probability("p-transit", DEFAULT_P_TRANSIT),
                p_slip=r.probability("p-slip", DEFAULT_P_SLIP),
                p_guess=r.probability("p-guess", DEFAULT_P_GUESS),
            )
            r.finish()
            if name in skills:
                raise r.err(DuplicateId, f"duplicate skill name {name!r}")
            skills[name] = skill
        elif child.tag == "link":
            link_id = r.identifier("id")
            source = r.required("source")
            target = r.required("target")
            raw_eval = r.required("evaluation")
            try:
                evaluation = Evaluation(raw_eval)
            except ValueError:
                raise r.err(SchemaViolation, f"unknown evaluation: {raw_eval!r}")
            raw_skills = r.optional("skills", "") or ""
            buggy = r.optional("buggy")
            r.finish()

            matcher: StepMatcher | None = None
            hints: list[str] = []
            for sub in child:
                sr = reader(sub)
                if sub.tag == "matcher":
                    if matcher is not None:
                        raise sr.err(SchemaViolation, "link has more than one <matcher>")
                    matcher = _parse_matcher(sr)
                elif sub.tag == "hint":
                    if list(sub):
                        raise sr.err(SchemaViolation, "<hint> must not contain elements")
                    hints.append((sub.text or "").strip())
                else:
                    raise sr.err(SchemaViolation, f"unknown element <{sub.tag}> inside <link>")
            if matcher is None:
                raise r.err(SchemaViolation, f"link {link_id!r} has no <matcher>")
            if evaluation is Evaluation.CORRECT and not hints:
                raise r.err(SchemaViolation,
                            f"correct link {link_id!r} must declare at least one <hint>")
            if evaluation is Evaluation.INCORRECT and source != target:
                raise r.err(SchemaViolation,
                            f"incorrect link {link_id!r} must be a self-loop "
                            f"(source {source!r} != target {target!r})")
            if any(link.id == link_id for link in links):
                raise r.err(DuplicateId, f"duplicate link id {link_id!r}")
            skill_names = raw_skills.split()
            if len(set(skill_names)) != len(skill_names):
                raise r.err(SchemaViolation, f"link {link_id!r} lists a skill twice")
            links.append(GraphLink(
                id=link_id,
                source=source,
                target=target,
                matcher=matcher,
                evaluation=evaluation,
                hints=tuple(hints),
                buggy_message=buggy,
                skills=tuple(skill_names),
                document_order=len(links),
            ))
            link_elems.append(r)
        elif child.tag == "group":
            raw = r.required("links")
            r.finish()
            member_ids = raw.split()
            if not member_ids:
                raise r.err(SchemaViolation, "group must list at least one link id")
            if len(set(member_ids)) != len(member_ids):
                raise r.err(SchemaViolation, "group lists a link id twice")
            group_sets.append((frozenset(member_ids), r))
        else:
            raise r.err(SchemaViolation, f"unknown element <{child.tag}> inside <graph>")

    if start is None or start not in nodes:
        raise NoStartNode(
            f"start node {start!r} is not a defined node" if start is not None
            else "graph declares no start node",
            element="graph", line=lines.get(id(root)))

    links_by_id = {ln.id: ln for ln in links}
    for ln, r in zip(links, link_elems):
        for endpoint, role in ((ln.source, "source"), (ln.target, "target")):
            if endpoint not in nodes:
                raise r.err(DanglingReference,
                            f"link {ln.id!r} {role} references undefined node {endpoint!r}")
        for skill_name in ln.skills:
            if skill_name not in skills:
                raise r.err(DanglingReference,
                            f"link {ln.id!r} references undefined skill {skill_name!r}")

    grouped: set[str] = set()
    groups: set[frozenset[str]] = set()
    for member_ids, r in group_sets:
        for member in member_ids:
            if member not in links_by_id:
                raise r.err(DanglingReference,
                            f"group references undefined link {member!r}")
            if member in grouped:
                raise r.err(SchemaViolation,
                            f"link {member!r} appears in more than one group")
            grouped.add(member)
        try:
            region = _chain_region(links_by_id, member_ids)
        except ValueError as exc:
            raise r.err(SchemaViolation, str(exc))
        problems = _group_isolation_problems(tuple(links), region)
        if problems:
            raise r.err(SchemaViolation, problems[0])
        groups.add(member_ids)

    return BehaviorGraph(
        id=graph_id,
        title=title,
        start_node=start,
        nodes=nodes,
        links=tuple(links),
        skills=skills,
        unordered_groups=frozenset(groups),
    )


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------

def serialize_graph(graph: BehaviorGraph) -> str:
    """Render a graph back to its XML form; round-trips to an equal graph."""
    root = ET.Element("graph", {
        "id": graph.id, "title": graph.title, "start": graph.start_node,
    })
    for node in graph.nodes.values():
        attrs = {"id": node.id}
        if node.label:
            attrs["label"] = node.label
        ET.SubElement(root, "node", attrs)
    for skill in graph.skills.values():
        ET.SubElement(root, "skill", {
            "name": skill.name,
            "label": skill.label,
            "p-init": _fmt(skill.p_init),
            "p-transit": _fmt(skill.p_transit),
            "p-slip": _fmt(skill.p_slip),
            "p-guess": _fmt(skill.p_guess),
        })
    for link in sorted(graph.links, key=lambda ln: ln.document_order):
        attrs = {
            "id": link.id, "source": link.source, "target": link.target,
            "evaluation": link.evaluation.value,
        }
        if link.skills:
            attrs["skills"] = " ".join(link.skills)
        if link.buggy_message is not None:
            attrs["buggy"] = link.buggy_message
        link_elem = ET.SubElement(root, "link", attrs)
        m = link.matcher
        m_attrs = {"selection": m.selection, "action": m.action}
        if m.input != ANY_INPUT:
            m_attrs["input"] = m.input.pattern
            if m.input.kind is not PatternKind.EXACT:
                m_attrs["match"] = m.input.kind.value
        ET.SubElement(link_elem, "matcher", m_attrs)
        for hint in link.hints:
            ET.SubElement(link_elem, "hint").text = hint
    for members in sorted(graph.unordered_groups, key=lambda s: sorted(s)):
        ET.SubElement(root, "group", {"links": " ".join(sorted(members))})
    ET.indent(root, space="  ")
    return '<?xml version="1.0" encoding="UTF-8"?>\n' + ET.tostring(root, encoding="unicode") + "\n"


def _fmt(value: float) -> str:
    return repr(value)  # shortest form that parses back to the same float


# ---------------------------------------------------------------------------
# Validation
# ---------------------------------------------------------------------------

class Severity(str, Enum):
    WARNING = "warning"
    ERROR = "error"


class DiagnosticKind(str, Enum):
    UNREACHABLE = "Unreachable"
    NO_PATH_TO_DONE = "NoPathToDone"
    HINTLESS_CORRECT_LINK = "HintlessCorrectLink"
    SKILL_NEVER_EXERCISED = "SkillNeverExercised"
    SLIP_GUESS_SUM_EXCEEDS_ONE = "SlipGuessSumExceedsOne"
    NO_START_NODE = "NoStartNode"
    DUPLICATE_ID = "DuplicateId"
    DANGLING_REFERENCE = "DanglingReference"
    INVALID_LINK = "InvalidLink"
    INVALID_SKILL = "InvalidSkill"
    INVALID_GROUP = "InvalidGroup"
    INVALID_PATTERN = "InvalidPattern"
    INTERPRETATION_BOUND = "InterpretationBoundExceeded"


@dataclass(frozen=True)
class Diagnostic:
    kind: DiagnosticKind
    severity: Severity
    subject: str
    message: str

    def __str__(self) -> str:
        return f"{self.severity.value}: {self.kind.value}({self.subject}): {self.message}"


def has_errors(diagnostics: list[Diagnostic]) -> bool:
    return any(d.severity is Severity.ERROR for d in diagnostics)


def interpretation_bound(graph: BehaviorGraph) -> int:
    """Worst-case count of distinct tracer interpretations for this graph."""
    bound = len(graph.nodes)
    for members in graph.unordered_groups:
        bound += 2 ** len(members) - 2
    return bound


def validate_graph(graph: BehaviorGraph) -> list[Diagnostic]:
    """Check a structurally built graph for authoring problems.

    Returns an empty list exactly when the graph is tutor-ready. Works on
    graphs built programmatically, so it re-checks the structural invariants
    that :func:`parse_graph` enforces, then adds the graph-walk diagnostics
    (unreachable states, states that cannot reach a done state, hintless
    correct steps, skills never exercised, degenerate skill parameters).
    """
    diags: list[Diagnostic] = []

    def err(kind: DiagnosticKind, subject: str, msg: str) -> None:
        diags.append(Diagnostic(kind, Severity.ERROR, subject, msg))

    def warn(kind: DiagnosticKind, subject: str, msg: str) -> None:
        diags.append(Diagnostic(kind, Severity.WARNING, subject, msg))

    link_ids: set[str] = set()
    structural_ok = True
    for ln in graph.links:
        if ln.id in link_ids:
            err(DiagnosticKind.DUPLICATE_ID, ln.id, "duplicate link id")
            structural_ok = False
        link_ids.add(ln.id)
        for endpoint, role in ((ln.source, "source"), (ln.target, "target")):
            if endpoint not in graph.nodes:
                err(DiagnosticKind.DANGLING_REFERENCE, ln.id,
                    f"{role} references undefined node {endpoint!r}")
                structural_ok = False
        for name in ln.skills:
            if name not in graph.skills:
                err(DiagnosticKind.DANGLING_REFERENCE, ln.id,
                    f"references undefined skill {name!r}")
        if len(set(ln.skills)) != len(ln.skills):
            err(DiagnosticKind.INVALID_LINK, ln.id, "lists a skill twice")
        if ln.evaluation is Evaluation.INCORRECT and ln.source != ln.target:
            err(DiagnosticKind.INVALID_LINK, ln.id, "incorrect link is not a self-loop")
        if not ln.matcher.selection or not ln.matcher.action:
            err(DiagnosticKind.INVALID_LINK, ln.id, "matcher selection/action empty")
        if ln.matcher.input.kind is PatternKind.REGEX:
            try:
                re.compile(ln.matcher.input.pattern)
            except re.error as exc:
                err(DiagnosticKind.INVALID_PATTERN, ln.id, f"regex does not compile: {exc}")

    order_seen: set[tuple[str, int]] = set()
    for ln in graph.links:
        key = (ln.source, ln.document_order)
        if key in order_seen:
            err(DiagnosticKind.INVALID_LINK, ln.id,
                f"document_order {ln.document_order} repeats for source {ln.source!r}")
        order_seen.add(key)

    if graph.start_node not in graph.nodes:
        err(DiagnosticKind.NO_START_NODE, graph.start_node or "<missing>",
            "start node is not a defined node")
        structural_ok = False

    links_by_id = {ln.id: ln for ln in graph.links}
    grouped: set[str] = set()
    for members in graph.unordered_groups:
        subject = "{" + " ".join(sorted(members)) + "}"
        missing = [m for m in members if m not in links_by_id]
        if missing:
            err(DiagnosticKind.DANGLING_REFERENCE, subject,
                f"group references undefined link(s): {', '.join(sorted(missing))}")
            continue
        overlap = grouped & members
        if overlap:
            err(DiagnosticKind.INVALID_GROUP, subject,
                f"link(s) in more than one group: {', '.join(sorted(overlap))}")
        grouped |= members
        try:
            region = _chain_region(links_by_id, members)
        except ValueError as exc:
            err(DiagnosticKind.INVALID_GROUP, subject, str(exc))
            continue
        for problem in _group_isolation_problems(graph.links, region):
            err(DiagnosticKind.INVALID_GROUP, subject, problem)

    for ln in graph.links:
        if ln.evaluation is Evaluation.CORRECT and not ln.hints:
            err(DiagnosticKind.HINTLESS_CORRECT_LINK, ln.id, "correct link has no hints")

    for skill in graph.skills.values():
        params = (skill.p_init, skill.p_transit, skill.p_slip, skill.p_guess)
        if any(not 0.0 <= p <= 1.0 for p in params):
            err(DiagnosticKind.INVALID_SKILL, skill.name, "parameter outside [0, 1]")
        elif skill.p_slip + skill.p_guess > 1.0:
            err(DiagnosticKind.SLIP_GUESS_SUM_EXCEEDS_ONE, skill.name,
                f"p_slip + p_guess = {skill.p_slip + skill.p_guess:g} > 1")

    exercised = {name for ln in graph.links
                 if ln.evaluation is Evaluation.CORRECT for name in ln.skills}
    for name in graph.skills:
        if name not in exercised:
            warn(DiagnosticKind.SKILL_NEVER_EXERCISED, name,
                 "no correct link exercises this skill")

    if interpretation_bound(graph) > INTERPRETATION_CAP:
        err(DiagnosticKind.INTERPRETATION_BOUND, graph.id,
            f"worst-case interpretation count {interpretation_bound(graph)} "
            f"exceeds the cap of {INTERPRETATION_CAP}")

    if structural_ok and graph.start_node in graph.nodes:
        advancing = [ln for ln in graph.links if ln.advancing]
        reachable = {graph.start_node}
        frontier = [graph.start_node]
        while frontier:
            node = frontier.pop()
            for ln in advancing:
                if ln.source == node and ln.target not in reachable:
                    reachable.add(ln.target)
                    frontier.append(ln.target)
        for node_id in graph.nodes:
            if node_id not in reachable:
                warn(DiagnosticKind.UNREACHABLE, node_id, "not reachable from the start node")

        correct_out = {ln.source for ln in graph.links if ln.evaluation is Evaluation.CORRECT}
        terminals = {n for n in graph.nodes if n not in correct_out}
        reaches_done = set(terminals)
        changed = True
        while changed:
            changed = False
            for ln in advancing:
                if ln.target in reaches_done and ln.source not in reaches_done:
                    reaches_done.add(ln.source)
                    changed = True
        for node_id in graph.nodes:
            if node_id not in reaches_done:
                warn(DiagnosticKind.NO_PATH_TO_DONE, node_id,
                     "no done state is reachable from here")

    return diags


def group_regions(graph: BehaviorGraph) -> dict[frozenset[str], GroupRegion]:
    """Resolve every unordered group of a valid graph to its chain region."""
    links_by_id = {ln.id: ln for ln in graph.links}
    return {members: _chain_region(links_by_id, members)
            for members in graph.unordered_groups}


# ---------------------------------------------------------------------------
# Skill matrix
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SkillMatrix:
    """0/1 matrix mapping correct links (rows) to declared skills (columns)."""

    links: tuple[str, ...]
    skills: tuple[str, ...]
    cells: tuple[tuple[int, ...], ...]


def skill_matrix(graph: BehaviorGraph) -> SkillMatrix:
    """Build the step-by-skill matrix: rows in document order, columns by name."""
    rows = sorted((ln for ln in graph.links if ln.evaluation is Evaluation.CORRECT),
                  key=lambda ln: ln.document_order)
    cols = tuple(sorted(graph.skills))
    cells = tuple(tuple(1 if name in ln.skills else 0 for name in cols) for ln in rows)
    return SkillMatrix(links=tuple(ln.id for ln in rows), skills=cols, cells=cells)
