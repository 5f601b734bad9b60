"""Probabilistic triple matching and the fixed-point alignment pipeline.

A triple pair's compatibility combines two routes, one weighted by the
predicates' functionality and one by their inverse functionality:

    p_f = ent * pred * fun1 * fun2 * obj
    p_i = ent * pred * inv1 * inv2 * obj
    compatibility = 1 - (1 - p_f) * (1 - p_i)

where ``ent`` is the subject-pair similarity and ``obj`` the object-pair
similarity. Divergence is the same product with ``obj`` replaced by
``1 - obj``. Per-entity triple evidence aggregates as a noisy-OR over the
pair's triple compatibilities, computed in log space.

Each iteration refreshes entity scores from label and triple evidence,
runs three matching phases (shared exact attributes, inbound neighbours
of the current top pairs, outbound triples of the current top pairs), and
stops early once matched sources and argmax targets both settle.
"""
from __future__ import annotations

import enum
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, Sequence

from .config import RunConfig
from .errors import ContractViolationError
from .ingest import common_literals
from .kg import Iri, KnowledgeGraph
from .labels import LabelMapping, LabelMappings, clamp01, embedding_similarity
from .objects import (CategoricalDomain, SimilarityContext, detect_categoricals,
                      make_object_ref, object_similarity)


def _check_unit(name: str, value: float) -> float:
    if not 0.0 <= value <= 1.0:
        raise ContractViolationError(f"{name} must be in [0, 1], got {value}")
    return value


def triple_similarity(ent: float, pred: float, fun1: float, fun2: float,
                      inv_fun1: float, inv_fun2: float, obj: float) -> float:
    """Compatibility of one triple pair; every input must sit in [0, 1]."""
    for name, value in (("ent", ent), ("pred", pred), ("fun1", fun1),
                        ("fun2", fun2), ("inv_fun1", inv_fun1),
                        ("inv_fun2", inv_fun2), ("obj", obj)):
        _check_unit(name, value)
    p_f = ent * pred * fun1 * fun2 * obj
    p_i = ent * pred * inv_fun1 * inv_fun2 * obj
    return 1.0 - (1.0 - p_f) * (1.0 - p_i)


def triple_divergence(ent: float, pred: float, fun1: float, fun2: float,
                      inv_fun1: float, inv_fun2: float, obj: float) -> float:
    """Divergence of one triple pair: compatibility against (1 - obj)."""
    _check_unit("obj", obj)
    return triple_similarity(ent, pred, fun1, fun2, inv_fun1, inv_fun2, 1.0 - obj)


def entity_similarity_from_triples(compatibilities: Iterable[float]) -> float:
    """Noisy-OR of triple compatibilities: 1 - prod(1 - c), in log space."""
    total = 0.0
    for value in compatibilities:
        _check_unit("compatibility", value)
        if value >= 1.0:
            return 1.0
        total += math.log1p(-value)
    return -math.expm1(total)


def combine_entity_similarity(label_conf: float | None, triple_conf: float | None,
                              left_labels: Sequence[str] = (),
                              right_labels: Sequence[str] = (),
                              embed=None) -> float:
    """Blend label and triple confidence into one entity score.

    Both present: plain average. Label only: half the label confidence.
    Triple only: average with the labels' embedding similarity (0.0 when
    no embedder or no labels are available).
    """
    if label_conf is not None:
        _check_unit("label_conf", label_conf)
    if triple_conf is not None:
        _check_unit("triple_conf", triple_conf)
    if label_conf is not None and triple_conf is not None:
        return (label_conf + triple_conf) / 2.0
    if label_conf is not None:
        return 0.5 * label_conf
    if triple_conf is not None:
        fill = 0.0
        if embed is not None and left_labels and right_labels:
            fill = clamp01(embedding_similarity(left_labels, right_labels, embed))
        return (fill + triple_conf) / 2.0
    return 0.0


class Phase(enum.Enum):
    EXACT_ATTRIBUTE = "exact-attribute"
    INBOUND = "inbound"
    OUTBOUND = "outbound"


class Classification(enum.Enum):
    COMPATIBLE = "Compatible"
    DIVERGENT = "Divergent"
    UNDECIDED = "Undecided"


@dataclass(frozen=True, slots=True)
class TripleMapping:
    """One matched triple pair; ids index into each graph's triple table."""

    left_id: int
    right_id: int
    compatibility: float
    divergence: float
    phase: Phase
    iteration: int
    classification: Classification | None = None


@dataclass(frozen=True, slots=True)
class EntityMapping:
    left: Iri
    right: Iri
    combined: float
    label_confidence: float | None = None
    triple_confidence: float | None = None


@dataclass(slots=True)
class IterationRecord:
    iteration: int
    matched_sources: int
    growth: float
    argmax_shift: float
    phase_new_mappings: dict[str, int]
    duration_seconds: float


@dataclass(slots=True)
class MatchResult:
    entity_mappings: dict[tuple[Iri, Iri], EntityMapping]
    triple_mappings: dict[tuple[int, int], TripleMapping]
    history: list[IterationRecord]
    stop_reason: str
    label_mappings: LabelMappings


def _classify(compat: float, divergence: float, compatible_threshold: float,
              divergent_threshold: float) -> Classification:
    if compat >= compatible_threshold:
        return Classification.COMPATIBLE
    if divergence >= divergent_threshold:
        return Classification.DIVERGENT
    return Classification.UNDECIDED


ScoreFn = Callable[[Iri, Iri], float]
PredMap = Mapping[tuple[Iri, Iri], LabelMapping]


def _merge(m_t: dict, rows: Iterable[tuple[int, int, float, float]], phase: Phase,
           iteration: int) -> int:
    added = 0
    for left_id, right_id, compat, divergence in rows:
        key = (left_id, right_id)
        existing = m_t.get(key)
        if existing is None:
            added += 1
        elif compat <= existing.compatibility:
            continue
        m_t[key] = TripleMapping(left_id, right_id, compat, divergence,
                                 phase, iteration)
    return added


def _run_tasks(tasks: Sequence, score_task: Callable, threads: int) -> Iterable:
    if threads <= 1 or len(tasks) <= 1:
        for task in tasks:
            yield score_task(task)
        return
    with ThreadPoolExecutor(max_workers=threads) as pool:
        yield from pool.map(score_task, tasks)


class _PhaseRunner:
    """Shared state for one pipeline run over two graphs."""

    def __init__(self, graph1: KnowledgeGraph, graph2: KnowledgeGraph,
                 predicates: PredMap, config: RunConfig,
                 categoricals1: Mapping[Iri, CategoricalDomain],
                 categoricals2: Mapping[Iri, CategoricalDomain]):
        self.graph1 = graph1
        self.graph2 = graph2
        self.predicates = predicates
        self.config = config
        self.categoricals1 = categoricals1
        self.categoricals2 = categoricals2
        shared = common_literals(graph1, graph2)
        cap = config.common_literal_cap
        self.literal_groups = []
        for key in sorted(shared.values):
            ids1 = graph1.triples_with_literal(key)
            ids2 = graph2.triples_with_literal(key)
            if len(ids1) <= cap and len(ids2) <= cap:
                self.literal_groups.append((ids1, ids2))

    def _pair_rows(self, triple_ids1: Sequence[int], triple_ids2: Sequence[int],
                   score_fn: ScoreFn, obj_fn) -> list[tuple[int, int, float, float]]:
        graph1, graph2 = self.graph1, self.graph2
        predicates = self.predicates
        rows = []
        for left_id in triple_ids1:
            t1 = graph1.triples[left_id]
            stats1 = graph1.stats[t1.predicate]
            for right_id in triple_ids2:
                t2 = graph2.triples[right_id]
                pred = predicates.get((t1.predicate, t2.predicate))
                if pred is None:
                    continue
                stats2 = graph2.stats[t2.predicate]
                ent = score_fn(t1.subject, t2.subject)
                obj = obj_fn(t1, t2)
                compat = triple_similarity(ent, pred.confidence,
                                           stats1.functionality, stats2.functionality,
                                           stats1.inverse_functionality,
                                           stats2.inverse_functionality, obj)
                divergence = triple_similarity(ent, pred.confidence,
                                               stats1.functionality,
                                               stats2.functionality,
                                               stats1.inverse_functionality,
                                               stats2.inverse_functionality,
                                               1.0 - obj)
                rows.append((left_id, right_id, compat, divergence))
        return rows

    def exact_attribute(self, score_fn: ScoreFn, m_t: dict, iteration: int) -> int:
        def score_group(group):
            ids1, ids2 = group
            return self._pair_rows(ids1, ids2, score_fn, lambda t1, t2: 1.0)

        added = 0
        for rows in _run_tasks(self.literal_groups, score_group, self.config.threads):
            added += _merge(m_t, rows, Phase.EXACT_ATTRIBUTE, iteration)
        return added

    def _top_pairs(self, entity_scores: Mapping[tuple[Iri, Iri], float],
                   ) -> list[tuple[Iri, Iri, float]]:
        per_source: dict[Iri, list[tuple[float, Iri]]] = {}
        for (left, right), score in entity_scores.items():
            per_source.setdefault(left, []).append((score, right))
        pairs = []
        k = self.config.k_top
        for left in sorted(per_source):
            ranked = sorted(per_source[left], key=lambda item: (-item[0], item[1]))
            if len(ranked) > k:
                cutoff = ranked[k - 1][0]
                ranked = [item for item in ranked if item[0] >= cutoff]
            pairs.extend((left, right, score) for score, right in ranked)
        return pairs

    def inbound(self, entity_scores: Mapping, score_fn: ScoreFn, m_t: dict,
                iteration: int) -> int:
        pairs = [(left, right, score)
                 for left, right, score in self._top_pairs(entity_scores)
                 if self.graph1.triples_with_object_entity(left)
                 and self.graph2.triples_with_object_entity(right)]

        def score_pair(pair):
            left, right, pair_score = pair
            ids1 = self.graph1.triples_with_object_entity(left)
            ids2 = self.graph2.triples_with_object_entity(right)
            return self._pair_rows(ids1, ids2, score_fn,
                                   lambda t1, t2, s=pair_score: s)

        added = 0
        for rows in _run_tasks(pairs, score_pair, self.config.threads):
            added += _merge(m_t, rows, Phase.INBOUND, iteration)
        return added

    def outbound(self, entity_scores: Mapping, score_fn: ScoreFn,
                 ctx: SimilarityContext, m_t: dict, iteration: int) -> int:
        pairs = [(left, right, score)
                 for left, right, score in self._top_pairs(entity_scores)
                 if self.graph1.triples_with_subject(left)
                 and self.graph2.triples_with_subject(right)]

        def obj_fn(t1, t2):
            ref1 = make_object_ref(t1.object, t1.predicate, self.categoricals1)
            ref2 = make_object_ref(t2.object, t2.predicate, self.categoricals2)
            return clamp01(object_similarity(ref1, ref2, ctx))

        def score_pair(pair):
            left, right, _ = pair
            ids1 = self.graph1.triples_with_subject(left)
            ids2 = self.graph2.triples_with_subject(right)
            return self._pair_rows(ids1, ids2, score_fn, obj_fn)

        added = 0
        for rows in _run_tasks(pairs, score_pair, self.config.threads):
            added += _merge(m_t, rows, Phase.OUTBOUND, iteration)
        return added


def _aggregate_entity_evidence(m_t: Mapping[tuple[int, int], TripleMapping],
                               graph1: KnowledgeGraph, graph2: KnowledgeGraph,
                               ) -> dict[tuple[Iri, Iri], float]:
    groups: dict[tuple[Iri, Iri], list[float]] = {}
    for (left_id, right_id), mapping in m_t.items():
        t1 = graph1.triples[left_id]
        t2 = graph2.triples[right_id]
        groups.setdefault((t1.subject, t2.subject), []).append(mapping.compatibility)
        if isinstance(t1.object, str) and isinstance(t2.object, str):
            groups.setdefault((t1.object, t2.object), []).append(mapping.compatibility)
    return {key: entity_similarity_from_triples(values)
            for key, values in sorted(groups.items())}


def _combined_view(labels: Mapping[tuple[Iri, Iri], LabelMapping],
                   evidence: Mapping[tuple[Iri, Iri], float],
                   graph1: KnowledgeGraph, graph2: KnowledgeGraph,
                   embed, fill_cache: dict) -> dict[tuple[Iri, Iri], EntityMapping]:
    out = {}
    for key in sorted(set(labels) | set(evidence)):
        left, right = key
        label_conf = labels[key].confidence if key in labels else None
        triple_conf = evidence.get(key)
        if label_conf is None and triple_conf is not None:
            if key not in fill_cache:
                fill = 0.0
                if embed is not None:
                    fill = clamp01(embedding_similarity(
                        graph1.labels_for(left), graph2.labels_for(right), embed))
                fill_cache[key] = fill
            combined = (fill_cache[key] + triple_conf) / 2.0
        else:
            combined = combine_entity_similarity(label_conf, triple_conf)
        out[key] = EntityMapping(left, right, combined, label_conf, triple_conf)
    return out


def _argmax_targets(mappings: Mapping[tuple[Iri, Iri], EntityMapping],
                    ) -> dict[Iri, Iri]:
    best: dict[Iri, tuple[float, Iri]] = {}
    for (left, right), mapping in mappings.items():
        current = best.get(left)
        candidate = (mapping.combined, right)
        if current is None or candidate[0] > current[0] or (
                candidate[0] == current[0] and candidate[1] < current[1]):
            best[left] = candidate
    return {left: right for left, (_, right) in best.items()}


def run_pipeline(graph1: KnowledgeGraph, graph2: KnowledgeGraph,
                 mappings: LabelMappings, config: RunConfig,
                 embedder=None) -> MatchResult:
    """Iterate the three matching phases to a fixed point.

    Runs at most ``config.max_iters`` iterations, stopping early when the
    matched source count grows by at most ``growth_threshold`` and at most
    ``shift_threshold`` of sources changed their best target.
    """
    categoricals1 = detect_categoricals(graph1, config.categorical_max_unique_ratio,
                                        config.categorical_min_support)
    categoricals2 = detect_categoricals(graph2, config.categorical_max_unique_ratio,
                                        config.categorical_min_support)
    runner = _PhaseRunner(graph1, graph2, mappings.predicates, config,
                          categoricals1, categoricals2)

    embed = None
    if embedder is not None:
        from .labels import _caching_embed
        embed = _caching_embed(embedder)

    fill_cache: dict[tuple[Iri, Iri], float] = {}
    m_t: dict[tuple[int, int], TripleMapping] = {}
    evidence: dict[tuple[Iri, Iri], float] = {}
    m_e = _combined_view(mappings.entities, evidence, graph1, graph2, embed,
                         fill_cache)
    history: list[IterationRecord] = []
    previous_matched = 0
    stop_reason = "max_iterations"

    for iteration in range(1, config.max_iters + 1):
        started = time.perf_counter()

        def score_fn(left: Iri, right: Iri, view=m_e) -> float:
            mapping = view.get((left, right))
            return mapping.combined if mapping is not None else 0.5

        entity_scores = {key: mapping.combined for key, mapping in m_e.items()}
        ctx = SimilarityContext(entity_score=score_fn, labels1=graph1.labels,
                                labels2=graph2.labels)
        phase_counts = {
            Phase.EXACT_ATTRIBUTE.value: runner.exact_attribute(score_fn, m_t, iteration),
            Phase.INBOUND.value: runner.inbound(entity_scores, score_fn, m_t, iteration),
            Phase.OUTBOUND.value: runner.outbound(entity_scores, score_fn, ctx,
                                                  m_t, iteration),
        }

        evidence = _aggregate_entity_evidence(m_t, graph1, graph2)
        new_m_e = _combined_view(mappings.entities, evidence, graph1, graph2,
                                 embed, fill_cache)

        matched = len({left for (left, _) in evidence})
        if previous_matched > 0:
            growth = (matched - previous_matched) / previous_matched
        else:
            growth = math.inf if matched > 0 else 0.0

        old_targets = _argmax_targets(m_e)
        new_targets = _argmax_targets(new_m_e)
        sources = set(old_targets) | set(new_targets)
        changed = sum(1 for source in sources
                      if old_targets.get(source) != new_targets.get(source))
        shift = changed / len(sources) if sources else 0.0

        history.append(IterationRecord(
            iteration=iteration, matched_sources=matched, growth=growth,
            argmax_shift=shift, phase_new_mappings=phase_counts,
            duration_seconds=time.perf_counter() - started))

        m_e = new_m_e
        previous_matched = matched
        if growth <= config.growth_threshold and shift <= config.shift_threshold:
            stop_reason = "converged"
            break

    return MatchResult(entity_mappings=m_e, triple_mappings=m_t, history=history,
                       stop_reason=stop_reason, label_mappings=mappings)


def best_pairs(entity_mappings: Mapping[tuple[Iri, Iri], EntityMapping],
               threshold: float) -> list[EntityMapping]:
    """Best target per source entity, restricted to scores at or above threshold."""
    chosen: dict[Iri, EntityMapping] = {}
    for (left, right), mapping in sorted(entity_mappings.items()):
        if mapping.combined < threshold:
            continue
        current = chosen.get(left)
        if current is None or mapping.combined > current.combined:
            chosen[left] = mapping
    return [chosen[left] for left in sorted(chosen)]


def compute_divergences(graph1: KnowledgeGraph, graph2: KnowledgeGraph,
                        entity_mappings: Mapping[tuple[Iri, Iri], EntityMapping],
                        predicates: PredMap, config: RunConfig,
                        ) -> list[TripleMapping]:
    """Classify outbound triple pairs of each source entity's best match.

    Every cross-product pair whose predicates have a label mapping gets a
    compatibility and a divergence score, then a classification:
    Compatible when compatibility clears the compatible threshold,
    Divergent when divergence clears the divergent threshold and
    compatibility does not, Undecided otherwise.
    """
    categoricals1 = detect_categoricals(graph1, config.categorical_max_unique_ratio,
                                        config.categorical_min_support)
    categoricals2 = detect_categoricals(graph2, config.categorical_max_unique_ratio,
                                        config.categorical_min_support)

    def score_fn(left: Iri, right: Iri) -> float:
        mapping = entity_mappings.get((left, right))
        return mapping.combined if mapping is not None else 0.5

    ctx = SimilarityContext(entity_score=score_fn, labels1=graph1.labels,
                            labels2=graph2.labels)
    out: list[TripleMapping] = []
    for pair in best_pairs(entity_mappings, config.threshold):
        ids1 = graph1.triples_with_subject(pair.left)
        ids2 = graph2.triples_with_subject(pair.right)
        for left_id in ids1:
            t1 = graph1.triples[left_id]
            stats1 = graph1.stats[t1.predicate]
            for right_id in ids2:
                t2 = graph2.triples[right_id]
                pred = predicates.get((t1.predicate, t2.predicate))
                if pred is None:
                    continue
                stats2 = graph2.stats[t2.predicate]
                ref1 = make_object_ref(t1.object, t1.predicate, categoricals1)
                ref2 = make_object_ref(t2.object, t2.predicate, categoricals2)
                obj = clamp01(object_similarity(ref1, ref2, ctx))
                args = (pair.combined, pred.confidence, stats1.functionality,
                        stats2.functionality, stats1.inverse_functionality,
                        stats2.inverse_functionality)
                compat = triple_similarity(*args, obj)
                divergence = triple_similarity(*args, 1.0 - obj)
                out.append(TripleMapping(
                    left_id, right_id, compat, divergence, Phase.OUTBOUND, 0,
                    _classify(compat, divergence, config.compatible_threshold,
                              config.divergent_threshold)))
    return out
