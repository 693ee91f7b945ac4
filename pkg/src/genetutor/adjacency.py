"""Gene adjacency analysis: coding-sequence tables to neighborhood binary codes.

Parses RefSeq-style ``.cds.tab`` annotation tables, derives a per-genome bit
string (bit i is 1 when genes i and i+1 are co-directional and closer than a
gap threshold), predicts transcriptional units as maximal runs of 1-bits, and
compares genomes by shared code segments. All operations are pure; the
line-oriented text report is byte-deterministic for fixed inputs.
"""

from __future__ import annotations

from dataclasses import dataclass

__all__ = [
    "DEFAULT_GAP_THRESHOLD",
    "DEFAULT_MIN_MATCH",
    "HEADER_COLUMNS",
    "GeneRecord",
    "Genome",
    "AdjacencyCode",
    "TranscriptionalUnit",
    "SharedSegment",
    "AnalysisResult",
    "TabFileError",
    "BadHeader",
    "BadStrand",
    "BadCoordinate",
    "ColumnCount",
    "LengthMismatch",
    "EmptyPattern",
    "parse_refseq_tab",
    "build_genomes",
    "adjacency_code",
    "predict_units",
    "match_pattern",
    "compare_genomes",
    "export_report",
    "export_records",
    "run_analysis",
]

DEFAULT_GAP_THRESHOLD = 200
DEFAULT_MIN_MATCH = 2
HEADER_COLUMNS = ("genome_id", "gene_id", "strand", "start", "end")


@dataclass(frozen=True)
class GeneRecord:
    genome_id: str
    gene_id: str
    strand: str
    start: int
    end: int


@dataclass(frozen=True)
class Genome:
    """All genes of one genome, sorted by start coordinate."""

    genome_id: str
    genes: tuple[GeneRecord, ...]


@dataclass(frozen=True)
class AdjacencyCode:
    """Neighborhood bit string; one bit per consecutive gene pair."""

    genome_id: str
    bits: str


@dataclass(frozen=True)
class TranscriptionalUnit:
    """Inclusive index range [first, last] into the sorted gene list."""

    genome_id: str
    first: int
    last: int


@dataclass(frozen=True)
class SharedSegment:
    """A maximal code substring two genomes share, at specific offsets."""

    genome_a: str
    genome_b: str
    offset_a: int
    offset_b: int
    length: int
    bits: str


class TabFileError(Exception):
    """Base for annotation-table errors; carries the 1-based line number."""

    def __init__(self, message: str, line: int):
        self.line = line
        super().__init__(f"line {line}: {message}")


class BadHeader(TabFileError):
    pass


class BadStrand(TabFileError):
    pass


class BadCoordinate(TabFileError):
    pass


class ColumnCount(TabFileError):
    pass


class LengthMismatch(Exception):
    """Adjacency code length does not fit the genome's gene count."""


class EmptyPattern(Exception):
    """Pattern search requires a non-empty pattern."""


def parse_refseq_tab(text: str) -> list[GeneRecord]:
    """Parse a ``.cds.tab`` table into gene records.

    The first significant line must be the exact header
    ``genome_id gene_id strand start end`` (tab-separated). Blank lines and
    ``#`` comments are skipped anywhere. Raises :class:`BadHeader`,
    :class:`ColumnCount`, :class:`BadStrand` or :class:`BadCoordinate`, each
    carrying the offending line number.
    """
    records: list[GeneRecord] = []
    header_seen = False
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.rstrip("\r\n")
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        fields = line.split("\t")
        if not header_seen:
            if tuple(fields) != HEADER_COLUMNS:
                raise BadHeader(
                    f"expected header {' '.join(HEADER_COLUMNS)!r}, got {line!r}", line_no)
            header_seen = True
            continue
        if len(fields) != len(HEADER_COLUMNS):
            raise ColumnCount(
                f"expected {len(HEADER_COLUMNS)} columns, got {len(fields)}", line_no)
        genome_id, gene_id, strand, raw_start, raw_end = fields
        if not genome_id or not gene_id:
            raise ColumnCount("genome_id and gene_id must be non-empty", line_no)
        strand = strand.replace("−", "-")
        if strand not in ("+", "-"):
            raise BadStrand(f"strand must be + or -, got {strand!r}", line_no)
        try:
            start, end = int(raw_start), int(raw_end)
        except ValueError:
            raise BadCoordinate(
                f"start/end must be integers, got {raw_start!r}/{raw_end!r}", line_no)
        if start <= 0 or end <= 0:
            raise BadCoordinate(f"coordinates must be positive: {start}..{end}", line_no)
        if start > end:
            raise BadCoordinate(f"start {start} > end {end}", line_no)
        records.append(GeneRecord(genome_id, gene_id, strand, start, end))
    if not header_seen:
        raise BadHeader("file has no header line", 1)
    return records


def build_genomes(records: list[GeneRecord]) -> list[Genome]:
    """Group records by genome and sort each gene list by start coordinate."""
    by_genome: dict[str, list[GeneRecord]] = {}
    for record in records:
        by_genome.setdefault(record.genome_id, []).append(record)
    return [
        Genome(genome_id, tuple(sorted(genes, key=lambda g: (g.start, g.end, g.gene_id))))
        for genome_id, genes in sorted(by_genome.items())
    ]


def adjacency_code(genome: Genome, gap_threshold: int = DEFAULT_GAP_THRESHOLD) -> AdjacencyCode:
    """Derive the neighborhood code: 1 = same strand and gap within threshold.

    The gap is ``next.start - current.end``; overlapping genes (negative gap)
    count as within any threshold.
    """
    if gap_threshold < 0:
        raise ValueError("gap_threshold must be >= 0")
    bits = []
    for current, nxt in zip(genome.genes, genome.genes[1:]):
        same_strand = current.strand == nxt.strand
        close = (nxt.start - current.end) <= gap_threshold
        bits.append("1" if same_strand and close else "0")
    return AdjacencyCode(genome_id=genome.genome_id, bits="".join(bits))


def predict_units(genome: Genome, code: AdjacencyCode) -> list[TranscriptionalUnit]:
    """Cut the gene list into transcriptional units at every 0-bit.

    A maximal run of 1-bits spans one unit (the run's gene pairs plus both
    flanks); genes in no run are singleton units. The result partitions the
    gene list in order.
    """
    n = len(genome.genes)
    if len(code.bits) != max(n - 1, 0):
        raise LengthMismatch(
            f"code length {len(code.bits)} does not fit {n} genes (want {max(n - 1, 0)})")
    units = []
    i = 0
    while i < n:
        j = i
        while j < n - 1 and code.bits[j] == "1":
            j += 1
        units.append(TranscriptionalUnit(genome.genome_id, i, j))
        i = j + 1
    return units


def match_pattern(codes: list[AdjacencyCode], pattern: str) -> list[tuple[str, int]]:
    """All (genome_id, offset) occurrences of pattern, overlaps included."""
    if not pattern:
        raise EmptyPattern("pattern must be non-empty")
    hits = []
    for code in codes:
        offset = code.bits.find(pattern)
        while offset != -1:
            hits.append((code.genome_id, offset))
            offset = code.bits.find(pattern, offset + 1)
    hits.sort()
    return hits


def compare_genomes(a: AdjacencyCode, b: AdjacencyCode,
                    min_len: int = DEFAULT_MIN_MATCH) -> list[SharedSegment]:
    """All maximal shared code segments of length >= min_len.

    A segment at (offset_a, offset_b) is maximal when it cannot be extended
    on either side and still match at those offsets; each qualifying offset
    pair is reported once, sorted by (offset_a, offset_b).
    """
    if min_len < 1:
        raise ValueError("min_len must be >= 1")
    sa, sb = a.bits, b.bits
    segments = []
    for i in range(len(sa)):
        for j in range(len(sb)):
            if sa[i] != sb[j]:
                continue
            if i > 0 and j > 0 and sa[i - 1] == sb[j - 1]:
                continue  # extendable left: covered by an earlier offset pair
            length = 1
            while i + length < len(sa) and j + length < len(sb) \
                    and sa[i + length] == sb[j + length]:
                length += 1
            if length >= min_len:
                segments.append(SharedSegment(
                    genome_a=a.genome_id, genome_b=b.genome_id,
                    offset_a=i, offset_b=j, length=length,
                    bits=sa[i:i + length]))
    segments.sort(key=lambda s: (s.offset_a, s.offset_b))
    return segments


def export_report(genomes: list[Genome], codes: list[AdjacencyCode],
                  units: list[TranscriptionalUnit],
                  matches: list[SharedSegment]) -> str:
    """Render the plain-text result report; ordering and bytes are stable.

    Sections run in genome_id order; unit lines use 1-based inclusive gene
    numbers; the match section is present whenever at least one genome is.
    """
    lines = ["gene adjacency report", f"genomes {len(genomes)}"]
    code_by_genome = {c.genome_id: c for c in codes}
    for genome in sorted(genomes, key=lambda g: g.genome_id):
        bits = code_by_genome[genome.genome_id].bits
        lines.append("")
        lines.append(f"genome {genome.genome_id}")
        lines.append(f"genes {len(genome.genes)}")
        lines.append(f"code {bits if bits else '-'}")
        for unit in units:
            if unit.genome_id == genome.genome_id:
                lines.append(f"unit genes {unit.first + 1}..{unit.last + 1}")
    if genomes:
        lines.append("")
        lines.append(f"matches {len(matches)}")
        for seg in sorted(matches, key=lambda s: (s.genome_a, s.genome_b,
                                                  s.offset_a, s.offset_b)):
            lines.append(
                f"match {seg.genome_a} {seg.genome_b} offsets {seg.offset_a} "
                f"{seg.offset_b} length {seg.length} code {seg.bits}")
    return "\n".join(lines) + "\n"


def export_records(genomes: list[Genome], codes: list[AdjacencyCode],
                   units: list[TranscriptionalUnit],
                   matches: list[SharedSegment]) -> str:
    """Machine-readable variant: one tab-separated record per line."""
    rows = []
    code_by_genome = {c.genome_id: c for c in codes}
    for genome in sorted(genomes, key=lambda g: g.genome_id):
        rows.append(("code", genome.genome_id, code_by_genome[genome.genome_id].bits))
    for unit in sorted(units, key=lambda u: (u.genome_id, u.first)):
        rows.append(("unit", unit.genome_id, str(unit.first + 1), str(unit.last + 1)))
    for seg in sorted(matches, key=lambda s: (s.genome_a, s.genome_b,
                                              s.offset_a, s.offset_b)):
        rows.append(("match", seg.genome_a, seg.genome_b, str(seg.offset_a),
                     str(seg.offset_b), str(seg.length), seg.bits))
    return "".join("\t".join(row) + "\n" for row in rows)


@dataclass(frozen=True)
class AnalysisResult:
    genomes: tuple[Genome, ...]
    codes: tuple[AdjacencyCode, ...]
    units: tuple[TranscriptionalUnit, ...]
    matches: tuple[SharedSegment, ...]
    report: str
    records: str


def run_analysis(records: list[GeneRecord],
                 gap_threshold: int = DEFAULT_GAP_THRESHOLD,
                 min_len: int = DEFAULT_MIN_MATCH) -> AnalysisResult:
    """Full pipeline over parsed records: codes, units, pairwise comparisons."""
    genomes = build_genomes(records)
    codes = [adjacency_code(g, gap_threshold) for g in genomes]
    code_by_genome = {c.genome_id: c for c in codes}
    units = [u for g in genomes for u in predict_units(g, code_by_genome[g.genome_id])]
    matches = []
    for idx, first in enumerate(genomes):
        for second in genomes[idx + 1:]:
            matches.extend(compare_genomes(
                code_by_genome[first.genome_id], code_by_genome[second.genome_id], min_len))
    report = export_report(genomes, codes, units, matches)
    records_text = export_records(genomes, codes, units, matches)
    return AnalysisResult(tuple(genomes), tuple(codes), tuple(units),
                          tuple(matches), report, records_text)
