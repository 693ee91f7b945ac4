"""Shared fixtures: repo paths, parsed graphs, randomized case generators."""

from __future__ import annotations

import random
from dataclasses import replace
from pathlib import Path

import pytest

from genetutor.adjacency import GeneRecord, Genome
from genetutor.graph import (
    BehaviorGraph,
    Evaluation,
    GraphLink,
    GraphNode,
    MatchPattern,
    PatternKind,
    SkillDef,
    StepMatcher,
    parse_graph,
)
from genetutor.tracer import Transaction

REPO_ROOT = Path(__file__).resolve().parent.parent
FIXTURES = REPO_ROOT / "fixtures"


@pytest.fixture(scope="session")
def fixtures_dir() -> Path:
    return FIXTURES


@pytest.fixture(scope="session")
def graph_corpus() -> dict[str, BehaviorGraph]:
    return {p.stem.removesuffix(".brd"): parse_graph(p.read_text())
            for p in sorted((FIXTURES / "graphs").glob("*.brd.xml"))}


@pytest.fixture(scope="session")
def six_step(graph_corpus) -> BehaviorGraph:
    return graph_corpus["six_step_flow"]


GOLDEN_TRANSACTIONS = [
    Transaction("CHOOSE FILE", "FileSelected", "genomeA.RefSeq.cds.tab", 1_700_000_001_000),
    Transaction("ADD FILE", "ButtonPressed", "", 1_700_000_002_000),
    Transaction("CHOOSE FILE", "FileSelected", "genomeB.RefSeq.cds.tab", 1_700_000_003_000),
    Transaction("PROCESS FILES", "ButtonPressed", "", 1_700_000_004_000),
    Transaction("DOWNLOAD TXT", "ButtonPressed", "", 1_700_000_005_000),
    Transaction("DONE", "ButtonPressed", "", 1_700_000_006_000),
]

GOLDEN_STEP_LINKS = ["c1", "c2", "c3", "c4", "c5", "c6"]


# ---------------------------------------------------------------------------
# Randomized case generation (shared by tracer tests and the acceptance suite)
# ---------------------------------------------------------------------------

_SELECTIONS = ["S1", "S2", "S3"]
_ACTIONS = ["A1", "A2"]
_INPUTS = ["", "x", "y", "xy"]


def _random_matcher(rng: random.Random) -> StepMatcher:
    selection = rng.choice(_SELECTIONS)
    action = rng.choice(_ACTIONS)
    roll = rng.random()
    if roll < 0.45:
        return StepMatcher(selection, action, MatchPattern(PatternKind.EXACT,
                                                           rng.choice(_INPUTS)))
    if roll < 0.75:
        return StepMatcher(selection, action)  # any input
    if roll < 0.9:
        pattern = rng.choice(["x*", "?", "*y", "x?"])
        return StepMatcher(selection, action, MatchPattern(PatternKind.WILDCARD, pattern))
    pattern = rng.choice(["[xy]", "x|y", "x.*"])
    return StepMatcher(selection, action, MatchPattern(PatternKind.REGEX, pattern))


def random_graph(rng: random.Random, max_nodes: int = 8, max_links: int = 12) -> BehaviorGraph:
    """A small valid graph: optional unordered group, ambiguity, buggy loops."""
    n_nodes = rng.randint(1, max_nodes)
    node_ids = [f"n{i}" for i in range(n_nodes)]
    nodes = {nid: GraphNode(nid, f"state {nid}") for nid in node_ids}
    links: list[GraphLink] = []
    groups: list[frozenset[str]] = []
    interior: set[str] = set()

    def add_link(source: str, target: str, evaluation: Evaluation,
                 matcher: StepMatcher | None = None) -> GraphLink:
        link = GraphLink(
            id=f"l{len(links)}",
            source=source,
            target=target,
            matcher=matcher or _random_matcher(rng),
            evaluation=evaluation,
            hints=tuple(f"hint {i} for l{len(links)}"
                        for i in range(rng.randint(1, 3)))
            if evaluation is not Evaluation.INCORRECT else (),
            buggy_message=(rng.choice([None, f"modeled error {len(links)}"])
                           if evaluation is Evaluation.INCORRECT else None),
            skills=(),
            document_order=len(links),
        )
        links.append(link)
        return link

    # Optionally reserve a node chain for one unordered group.
    if n_nodes >= 4 and rng.random() < 0.35:
        size = rng.randint(2, min(3, n_nodes - 1))
        chain = rng.sample(node_ids, size + 1)
        member_ids = []
        for a, b in zip(chain, chain[1:]):
            evaluation = Evaluation.SUBOPTIMAL if rng.random() < 0.1 else Evaluation.CORRECT
            member_ids.append(add_link(a, b, evaluation).id)
        groups.append(frozenset(member_ids))
        interior = set(chain[1:-1])

    usable = [nid for nid in node_ids if nid not in interior]
    out_degree = {nid: 0 for nid in node_ids}
    for link in links:
        out_degree[link.source] += 1
    budget = rng.randint(0, max_links - len(links))
    for _ in range(budget):
        source = rng.choice(usable)
        roll = rng.random()
        if roll < 0.25:
            add_link(source, source, Evaluation.INCORRECT)
            continue
        if out_degree[source] >= 3:
            continue
        target = rng.choice(usable)
        evaluation = Evaluation.SUBOPTIMAL if roll < 0.35 else Evaluation.CORRECT
        add_link(source, target, evaluation)
        out_degree[source] += 1

    skills: dict[str, SkillDef] = {}
    if rng.random() < 0.5 and links:
        skills["sk"] = SkillDef("sk", "a skill", 0.3, 0.2, 0.1, 0.2)
        for idx in rng.sample(range(len(links)), k=rng.randint(1, len(links))):
            links[idx] = replace(links[idx], skills=("sk",))

    return BehaviorGraph(
        id="random-graph",
        title="randomly generated",
        start_node="n0",
        nodes=nodes,
        links=tuple(links),
        skills=skills,
        unordered_groups=frozenset(groups),
    )


def random_transactions(rng: random.Random, max_len: int = 10) -> list[Transaction]:
    return [
        Transaction(
            selection=rng.choice(_SELECTIONS),
            action=rng.choice(_ACTIONS),
            input=rng.choice(_INPUTS),
            timestamp=1_700_000_000_000 + i,
        )
        for i in range(rng.randint(0, max_len))
    ]


def random_genome(rng: random.Random, genome_id: str = "g",
                  max_genes: int = 50) -> Genome:
    n = rng.randint(0, max_genes)
    genes = []
    prev_start, prev_end = 0, 0
    for i in range(n):
        start = max(prev_start + 1, prev_end + rng.randint(-150, 400), 1)
        end = start + rng.randint(0, 3000)
        genes.append(GeneRecord(genome_id, f"{genome_id}{i:03d}",
                                rng.choice("+-"), start, end))
        prev_start, prev_end = start, end
    return Genome(genome_id, tuple(genes))


def mirror_genome(genome: Genome) -> Genome:
    """Reverse gene order, flip strands, mirror coordinates (gaps preserved)."""
    if not genome.genes:
        return genome
    pivot = max(g.end for g in genome.genes) + 1
    flipped = [
        GeneRecord(genome.genome_id, g.gene_id,
                   "-" if g.strand == "+" else "+",
                   pivot - g.end, pivot - g.start)
        for g in reversed(genome.genes)
    ]
    return Genome(genome.genome_id, tuple(flipped))
