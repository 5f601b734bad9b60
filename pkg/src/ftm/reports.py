"""Output artifacts: mapping TSVs, run reports, and stats tables.

Mapping TSVs are headerless; terms are serialized in N-Triples syntax so
embedded tabs and newlines stay escaped. Scores print with six decimals.
"""
from __future__ import annotations

import dataclasses
import json
from typing import Iterable, Mapping

from .config import RunConfig
from .errors import FtmError
from .kg import Iri, KnowledgeGraph
from .matcher import EntityMapping, MatchResult, TripleMapping
from .rdf import format_term


def _score(value: float | None) -> str:
    return "" if value is None else f"{value:.6f}"


def write_entity_mappings(path: str,
                          mappings: Mapping[tuple[Iri, Iri], EntityMapping]) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        for key in sorted(mappings):
            m = mappings[key]
            handle.write(f"{m.left}\t{m.right}\t{_score(m.combined)}"
                         f"\t{_score(m.label_confidence)}"
                         f"\t{_score(m.triple_confidence)}\n")


def read_entity_mappings(path: str) -> dict[tuple[Iri, Iri], EntityMapping]:
    out = {}
    with open(path, "r", encoding="utf-8") as handle:
        for line_no, line in enumerate(handle, start=1):
            row = line.rstrip("\n")
            if not row.strip():
                continue
            columns = row.split("\t")
            if len(columns) != 5:
                raise FtmError(
                    f"{path}:{line_no}: expected 5 tab-separated columns,"
                    f" found {len(columns)}")
            left, right, combined, label_conf, triple_conf = columns
            try:
                mapping = EntityMapping(
                    left, right, float(combined),
                    float(label_conf) if label_conf else None,
                    float(triple_conf) if triple_conf else None)
            except ValueError as exc:
                raise FtmError(f"{path}:{line_no}: bad score: {exc}") from exc
            out[(left, right)] = mapping
    return out


def write_triple_mappings(path: str, mappings: Iterable[TripleMapping],
                          graph1: KnowledgeGraph, graph2: KnowledgeGraph) -> None:
    rows = []
    for m in mappings:
        t1 = graph1.triples[m.left_id]
        t2 = graph2.triples[m.right_id]
        rows.append((
            t1.subject, t1.predicate, format_term(t1.object),
            t2.subject, t2.predicate, format_term(t2.object),
            f"{m.compatibility:.6f}", f"{m.divergence:.6f}", m.phase.value,
            m.classification.value if m.classification else ""))
    rows.sort()
    with open(path, "w", encoding="utf-8") as handle:
        for row in rows:
            handle.write("\t".join(row) + "\n")


def run_report_dict(result: MatchResult, graph1: KnowledgeGraph,
                    graph2: KnowledgeGraph, config: RunConfig,
                    wall_seconds: float) -> dict:
    return {
        "graphs": {
            "source": {"name": graph1.name, "triples": len(graph1),
                       "entities": len(graph1.entities),
                       "predicates": len(graph1.predicates)},
            "target": {"name": graph2.name, "triples": len(graph2),
                       "entities": len(graph2.entities),
                       "predicates": len(graph2.predicates)},
        },
        "label_mappings": {
            "entities": len(result.label_mappings.entities),
            "predicates": len(result.label_mappings.predicates),
        },
        "entity_mappings": len(result.entity_mappings),
        "triple_mappings": len(result.triple_mappings),
        "iterations": [
            {
                "iteration": record.iteration,
                "matched_sources": record.matched_sources,
                "growth": record.growth if record.growth != float("inf") else "inf",
                "argmax_shift": record.argmax_shift,
                "phase_new_mappings": record.phase_new_mappings,
                "duration_seconds": record.duration_seconds,
            }
            for record in result.history
        ],
        "stop_reason": result.stop_reason,
        "wall_seconds": wall_seconds,
        "config": dataclasses.asdict(config),
    }


def write_run_report(path: str, result: MatchResult, graph1: KnowledgeGraph,
                     graph2: KnowledgeGraph, config: RunConfig,
                     wall_seconds: float) -> None:
    report = run_report_dict(result, graph1, graph2, config, wall_seconds)
    with open(path, "w", encoding="utf-8") as handle:
        json.dump(report, handle, indent=2, sort_keys=True)
        handle.write("\n")


def format_stats_table(graph: KnowledgeGraph) -> str:
    lines = [f"graph: {graph.name}",
             f"triples: {len(graph)}  entities: {len(graph.entities)}"
             f"  predicates: {len(graph.predicates)}",
             "predicate\ttriples\tsubjects\tobjects\tfun\tinv_fun\tunique_ratio"]
    by_count = sorted(graph.stats,
                      key=lambda p: (-graph.stats[p].triple_count, p))
    for predicate in by_count:
        s = graph.stats[predicate]
        lines.append(f"{predicate}\t{s.triple_count}\t{s.distinct_subjects}"
                     f"\t{s.distinct_objects}\t{s.functionality:.4f}"
                     f"\t{s.inverse_functionality:.4f}\t{s.unique_ratio:.4f}")
    return "\n".join(lines)
