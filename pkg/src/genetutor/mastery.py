"""Per-skill mastery tracking via two-step Bayesian knowledge tracing.

Each traced step updates the learner's probability of knowing the skills the
matched link exercises: a Bayesian posterior given the observed outcome, then
one application of the learning rate. Mastery values drive individualized
problem selection. Mastery states are immutable values.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, replace

from .graph import BehaviorGraph, Evaluation, SkillDef
from .tracer import Verdict

__all__ = [
    "MASTERY_THRESHOLD",
    "SkillState",
    "SkillMastery",
    "UnknownSkill",
    "EmptyLibrary",
    "DegenerateEvidenceWarning",
    "init_mastery",
    "update_on_evidence",
    "apply_verdict",
    "select_next_problem",
    "export_table",
]

MASTERY_THRESHOLD = 0.95


class UnknownSkill(Exception):
    """Evidence was applied to a skill the mastery state does not track."""


class EmptyLibrary(Exception):
    """Problem selection was asked to choose from no graphs."""


class DegenerateEvidenceWarning(UserWarning):
    """The Bayesian posterior was undefined (zero denominator); prior kept."""


@dataclass(frozen=True)
class SkillState:
    params: SkillDef
    p_know: float
    opportunities: int


@dataclass(frozen=True)
class SkillMastery:
    entries: dict[str, SkillState]

    def p_know(self, skill: str) -> float:
        return self.entries[skill].p_know


def init_mastery(graph: BehaviorGraph) -> SkillMastery:
    """One entry per declared skill, starting at its p_init with no practice."""
    return SkillMastery(entries={
        name: SkillState(params=skill, p_know=skill.p_init, opportunities=0)
        for name, skill in graph.skills.items()
    })


def update_on_evidence(mastery: SkillMastery, skill: str, correct: bool) -> SkillMastery:
    """Fold one observed outcome into a skill's mastery estimate.

    Posterior of knowing given the outcome, then the transit step:
    p' = posterior + (1 - posterior) * p_transit. Only the named skill's
    entry changes.
    """
    state = mastery.entries.get(skill)
    if state is None:
        raise UnknownSkill(skill)
    p = state.params
    know = state.p_know
    if correct:
        numerator = know * (1.0 - p.p_slip)
        denominator = numerator + (1.0 - know) * p.p_guess
    else:
        numerator = know * p.p_slip
        denominator = numerator + (1.0 - know) * (1.0 - p.p_slip)
    if denominator == 0.0:
        warnings.warn(
            f"degenerate evidence for skill {skill!r}: posterior undefined, keeping prior",
            DegenerateEvidenceWarning, stacklevel=2)
        posterior = know
    else:
        posterior = numerator / denominator
    updated = replace(state,
                      p_know=posterior + (1.0 - posterior) * p.p_transit,
                      opportunities=state.opportunities + 1)
    entries = dict(mastery.entries)
    entries[skill] = updated
    return SkillMastery(entries=entries)


def apply_verdict(mastery: SkillMastery, graph: BehaviorGraph, verdict: Verdict) -> SkillMastery:
    """Attribute one verdict's outcome to the skills of the step it concerns.

    Correct verdicts credit the first (lowest document order) matched link's
    skills; modeled errors debit the matched incorrect link's skills; generic
    errors debit the skills of the step the tutor was pointing at, when known.
    """
    if verdict.correct:
        link_id, outcome = verdict.matched_links[0], True
    elif verdict.matched_links:
        link_id, outcome = verdict.matched_links[0], False
    elif verdict.hint_target is not None:
        link_id, outcome = verdict.hint_target, False
    else:
        return mastery
    for skill in graph.link(link_id).skills:
        mastery = update_on_evidence(mastery, skill, outcome)
    return mastery


def _exercised_skills(graph: BehaviorGraph) -> set[str]:
    return {name for ln in graph.links
            if ln.evaluation is Evaluation.CORRECT for name in ln.skills}


def _step_count(graph: BehaviorGraph) -> int:
    return sum(1 for ln in graph.links if ln.evaluation is Evaluation.CORRECT)


def select_next_problem(mastery: SkillMastery, library: list[BehaviorGraph],
                        threshold: float = MASTERY_THRESHOLD) -> str:
    """Pick the problem exercising the most unmastered skills.

    A skill is unmastered below the threshold; skills the mastery state has
    never seen count as unmastered. Ties fall to the graph with the fewest
    steps, then the lexicographically smallest id.
    """
    if not library:
        raise EmptyLibrary("no problem graphs to select from")

    def unmastered(skill: str) -> bool:
        state = mastery.entries.get(skill)
        return state is None or state.p_know < threshold

    def rank(graph: BehaviorGraph) -> tuple[int, int, str]:
        coverage = sum(1 for s in _exercised_skills(graph) if unmastered(s))
        return (-coverage, _step_count(graph), graph.id)

    return min(library, key=rank).id


def export_table(mastery: SkillMastery) -> str:
    """Tab-separated snapshot: skill, p_know, opportunities; sorted by skill."""
    lines = ["skill\tp_know\topportunities"]
    for name in sorted(mastery.entries):
        state = mastery.entries[name]
        lines.append(f"{name}\t{state.p_know:.6f}\t{state.opportunities}")
    return "\n".join(lines) + "\n"
