"""Alignment evaluation: hit@k, open-world one-to-one P/R/F, threshold sweep,
gold-standard loading, and triple-level gold construction."""
from __future__ import annotations

import enum
import xml.etree.ElementTree as ET
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping

from .errors import FtmError
from .kg import Iri, KnowledgeGraph, Triple
from .labels import normalize_label
from .literals import LiteralKind, LiteralValue

ALIGNMENT_NS = "http://knowledgeweb.semanticweb.org/heterogeneity/alignment"
RDF_SYNTAX_NS = "http://www.w3.org/1999/02/22-rdf-syntax-ns#"


@dataclass(frozen=True, slots=True)
class GoldStandard:
    """Reference entity alignment: a set of (source, target) pairs."""

    pairs: frozenset[tuple[Iri, Iri]]

    @property
    def sources(self) -> frozenset[Iri]:
        return frozenset(left for left, _ in self.pairs)

    @property
    def targets(self) -> frozenset[Iri]:
        return frozenset(right for _, right in self.pairs)

    def targets_of(self, source: Iri) -> set[Iri]:
        return {right for left, right in self.pairs if left == source}


def read_gold_tsv(path: str) -> GoldStandard:
    pairs = set()
    with open(path, "r", encoding="utf-8") as handle:
        for line_no, line in enumerate(handle, start=1):
            row = line.rstrip("\n")
            if not row.strip() or row.lstrip().startswith("#"):
                continue
            columns = row.split("\t")
            if len(columns) < 2 or not columns[0] or not columns[1]:
                raise FtmError(f"{path}:{line_no}: expected two tab-separated IRIs")
            pairs.add((columns[0], columns[1]))
    return GoldStandard(frozenset(pairs))


def read_gold_xml(path: str) -> GoldStandard:
    """Read an OAEI Alignment-format file; keeps equivalence cells only."""
    try:
        tree = ET.parse(path)
    except ET.ParseError as exc:
        raise FtmError(f"cannot parse alignment XML {path!r}: {exc}") from exc
    ns = {"a": ALIGNMENT_NS, "rdf": RDF_SYNTAX_NS}
    pairs = set()
    for cell in tree.getroot().iter(f"{{{ALIGNMENT_NS}}}Cell"):
        entity1 = cell.find("a:entity1", ns)
        entity2 = cell.find("a:entity2", ns)
        if entity1 is None or entity2 is None:
            continue
        left = entity1.get(f"{{{RDF_SYNTAX_NS}}}resource")
        right = entity2.get(f"{{{RDF_SYNTAX_NS}}}resource")
        if not left or not right:
            continue
        relation = cell.findtext("a:relation", default="=", namespaces=ns)
        if relation.strip() == "=":
            pairs.add((left, right))
    return GoldStandard(frozenset(pairs))


def load_gold(path: str) -> GoldStandard:
    if Path(path).suffix.lower() in (".xml", ".rdf", ".owl"):
        return read_gold_xml(path)
    return read_gold_tsv(path)


def rank_targets(scores: Mapping[tuple[Iri, Iri], float]) -> dict[Iri, list[Iri]]:
    """Per-source target lists, best first; ties break on target IRI."""
    per_source: dict[Iri, list[tuple[float, Iri]]] = {}
    for (left, right), score in scores.items():
        per_source.setdefault(left, []).append((score, right))
    return {left: [right for _, right in
                   sorted(items, key=lambda item: (-item[0], item[1]))]
            for left, items in per_source.items()}


def hit_at_k(ranked: Mapping[Iri, list[Iri]], gold: GoldStandard, k: int) -> float:
    """Fraction of gold sources with a gold target among their top k."""
    sources = gold.sources
    if not sources:
        return 0.0
    hits = 0
    for source in sources:
        top = ranked.get(source, ())[:k]
        if any((source, target) in gold.pairs for target in top):
            hits += 1
    return hits / len(sources)


@dataclass(slots=True)
class EvalReport:
    threshold: float
    true_positives: int
    false_positives: int
    false_negatives: int
    precision: float
    recall: float
    f_measure: float
    hits: dict[int, float] = field(default_factory=dict)
    flags: list[str] = field(default_factory=list)

    def as_dict(self) -> dict:
        return {
            "threshold": self.threshold,
            "true_positives": self.true_positives,
            "false_positives": self.false_positives,
            "false_negatives": self.false_negatives,
            "precision": self.precision,
            "recall": self.recall,
            "f_measure": self.f_measure,
            "hits": {f"hit@{k}": v for k, v in sorted(self.hits.items())},
            "flags": list(self.flags),
        }


def select_predictions(scores: Mapping[tuple[Iri, Iri], float],
                       threshold: float) -> list[tuple[Iri, Iri]]:
    """Each source's maximum-score target(s) at or above the threshold.

    Score ties all survive, so a source can keep several targets.
    """
    best: dict[Iri, float] = {}
    for (left, right), score in scores.items():
        if score < threshold:
            continue
        current = best.get(left)
        if current is None or score > current:
            best[left] = score
    return sorted((left, right) for (left, right), score in scores.items()
                  if left in best and score == best[left])


def prf_one_to_one(scores: Mapping[tuple[Iri, Iri], float], gold: GoldStandard,
                   threshold: float) -> EvalReport:
    """Open-world one-to-one precision/recall/F over thresholded predictions.

    Each source entity keeps only its best-scoring target(s). Predictions
    touching no gold entity on either side are invisible to the counts;
    recall divides by the full gold size.
    """
    flags = []
    if not gold.pairs:
        return EvalReport(threshold, 0, 0, 0, 0.0, 0.0, 0.0, flags=["empty-gold"])
    selected = select_predictions(scores, threshold)
    sources, targets = gold.sources, gold.targets
    visible = [pair for pair in selected
               if pair[0] in sources or pair[1] in targets]
    tp = sum(1 for pair in visible if pair in gold.pairs)
    fp = len(visible) - tp
    fn = len(gold.pairs) - tp
    if tp + fp == 0:
        flags.append("no-visible-predictions")
        precision = 0.0
    else:
        precision = tp / (tp + fp)
    recall = tp / len(gold.pairs)
    denominator = 2 * tp + fp + fn
    f_measure = (2 * tp / denominator) if denominator else 0.0
    return EvalReport(threshold, tp, fp, fn, precision, recall, f_measure,
                      flags=flags)


@dataclass(slots=True)
class SweepPoint:
    threshold: float
    precision: float
    recall: float
    f_measure: float


@dataclass(slots=True)
class SweepResult:
    best_threshold: float
    best_report: EvalReport
    points: list[SweepPoint]


def threshold_sweep(scores: Mapping[tuple[Iri, Iri], float], gold: GoldStandard,
                    step: float = 0.01) -> SweepResult:
    """Evaluate every threshold on a step grid; best F wins, ties take the lowest."""
    if not 0.0 < step <= 1.0:
        raise FtmError(f"sweep step must be in (0, 1], got {step}")
    count = round(1.0 / step)
    points = []
    best = None
    best_threshold = 0.0
    for index in range(count + 1):
        threshold = round(index * step, 10)
        report = prf_one_to_one(scores, gold, threshold)
        points.append(SweepPoint(threshold, report.precision, report.recall,
                                 report.f_measure))
        if best is None or report.f_measure > best.f_measure:
            best = report
            best_threshold = threshold
    return SweepResult(best_threshold, best, points)


class GoldLabel(enum.Enum):
    COMPATIBLE = "Compatible"
    DIVERGENT = "Divergent"
    NEEDS_REVIEW = "NeedsReview"


def _number_rule(a: float, b: float) -> GoldLabel:
    if a == b:
        return GoldLabel.COMPATIBLE
    if abs(a) < 100 and abs(b) < 100 and abs(a - b) < 10:
        return GoldLabel.COMPATIBLE
    scale = max(abs(a), abs(b))
    if scale > 0 and abs(a - b) / scale < 0.10:
        return GoldLabel.COMPATIBLE
    return GoldLabel.DIVERGENT


def _same_day(a: LiteralValue, b: LiteralValue) -> bool:
    from .objects import _utc_date

    return _utc_date(a.parsed_timestamp) == _utc_date(b.parsed_timestamp)


def auto_label_triple_pair(graph1: KnowledgeGraph, graph2: KnowledgeGraph,
                           t1: Triple, t2: Triple,
                           gold: GoldStandard) -> GoldLabel:
    """Heuristic gold label for one triple pair.

    Numbers agree under a 10% relative (or small absolute) tolerance; dates
    must share a calendar day; equal normalized strings are compatible and
    unequal ones are left for review; entity pairs follow the entity gold.
    An entity against a literal is compatible when a label matches exactly,
    divergent when the literal is a number or date (datatype mismatch), and
    left for review when it is free text.
    """
    o1, o2 = t1.object, t2.object
    e1 = o1 if isinstance(o1, str) else None
    e2 = o2 if isinstance(o2, str) else None

    if e1 is not None and e2 is not None:
        if (e1, e2) in gold.pairs:
            return GoldLabel.COMPATIBLE
        if e1 in gold.sources or e2 in gold.targets:
            return GoldLabel.DIVERGENT
        return GoldLabel.NEEDS_REVIEW

    if e1 is not None or e2 is not None:
        entity = e1 if e1 is not None else e2
        labels = (graph1.labels_for(entity) if e1 is not None
                  else graph2.labels_for(entity))
        literal = o2 if e1 is not None else o1
        text = normalize_label(literal.raw)
        if text and any(normalize_label(label) == text for label in labels):
            return GoldLabel.COMPATIBLE
        if literal.kind is not LiteralKind.TEXT:
            return GoldLabel.DIVERGENT
        return GoldLabel.NEEDS_REVIEW

    kind1, kind2 = o1.kind, o2.kind
    if kind1 is LiteralKind.NUMBER and kind2 is LiteralKind.NUMBER:
        return _number_rule(o1.parsed_number, o2.parsed_number)
    if kind1 is LiteralKind.DATETIME and kind2 is LiteralKind.DATETIME:
        return GoldLabel.COMPATIBLE if _same_day(o1, o2) else GoldLabel.DIVERGENT
    if kind1 is LiteralKind.TEXT and kind2 is LiteralKind.TEXT:
        if normalize_label(o1.raw) == normalize_label(o2.raw):
            return GoldLabel.COMPATIBLE
        return GoldLabel.NEEDS_REVIEW
    return GoldLabel.DIVERGENT


@dataclass(frozen=True, slots=True)
class TripleGoldRow:
    left_id: int
    right_id: int
    label: GoldLabel


def build_triple_dataset(graph1: KnowledgeGraph, graph2: KnowledgeGraph,
                         gold: GoldStandard,
                         min_functionality: float = 0.8) -> list[TripleGoldRow]:
    """Triple-level dataset over gold pairs.

    The gold standard carries both entity and predicate pairs. For each gold
    entity pair, crosses the outbound triples whose predicate functionality
    is strictly above ``min_functionality`` on both sides, keeps only the
    combinations whose predicates are themselves gold-matched, and labels
    every surviving combination heuristically.
    """
    rows = []
    for left, right in sorted(gold.pairs):
        ids1 = [i for i in graph1.triples_with_subject(left)
                if graph1.stats[graph1.triples[i].predicate].functionality
                > min_functionality]
        ids2 = [j for j in graph2.triples_with_subject(right)
                if graph2.stats[graph2.triples[j].predicate].functionality
                > min_functionality]
        for i in ids1:
            for j in ids2:
                pred_pair = (graph1.triples[i].predicate,
                             graph2.triples[j].predicate)
                if pred_pair not in gold.pairs:
                    continue
                label = auto_label_triple_pair(graph1, graph2,
                                               graph1.triples[i],
                                               graph2.triples[j], gold)
                rows.append(TripleGoldRow(i, j, label))
    return rows
