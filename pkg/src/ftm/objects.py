"""Object-position similarity across value kinds.

Triple objects come in five kinds: entity references, plain text, numbers,
date-times, and categorical strings (text objects of a predicate whose
value set is small and well-supported). Every ordered kind pair has a
dispatch rule; mixed kinds compare through lexical or parsed bridges.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import Callable, Mapping

from .kg import Iri, KnowledgeGraph, Term
from .labels import fuzzy_similarity, normalize_label
from .literals import LiteralKind, LiteralValue, extract_numbers, parse_datetime

DEFAULT_MAX_UNIQUE_RATIO = 0.05
DEFAULT_MIN_SUPPORT = 50
DEFAULT_ENTITY_SCORE = 0.5
_YEAR_RANGE = (1000, 2999)
_CATEGORICAL_FUZZY_FLOOR = 0.9


class ObjectKind(enum.Enum):
    ENTITY = "Entity"
    TEXT = "Text"
    NUMBER = "Number"
    DATETIME = "DateTime"
    CATEGORICAL = "Categorical"


@dataclass(frozen=True, slots=True)
class CategoricalDomain:
    """Value domain of a categorical predicate, in normalized form."""

    predicate: Iri
    values: frozenset[str]
    counts: Mapping[str, int] = field(default_factory=dict)


def detect_categoricals(graph: KnowledgeGraph,
                        max_unique_ratio: float = DEFAULT_MAX_UNIQUE_RATIO,
                        min_support: int = DEFAULT_MIN_SUPPORT,
                        ) -> dict[Iri, CategoricalDomain]:
    """Predicates whose objects form a small, repeated set of text values.

    A predicate qualifies when it has at least ``min_support`` triples, a
    unique ratio at most ``max_unique_ratio``, only text-literal objects,
    and at least two distinct normalized values.
    """
    domains = {}
    for predicate, stats in graph.stats.items():
        if stats.triple_count < min_support:
            continue
        if stats.unique_ratio > max_unique_ratio:
            continue
        counts: dict[str, int] = {}
        textual = True
        for index, triple in enumerate(graph.triples):
            if triple.predicate != predicate:
                continue
            obj = triple.object
            if not isinstance(obj, LiteralValue) or obj.kind is not LiteralKind.TEXT:
                textual = False
                break
            normalized = normalize_label(obj.raw)
            counts[normalized] = counts.get(normalized, 0) + 1
        if textual and len(counts) >= 2:
            domains[predicate] = CategoricalDomain(
                predicate=predicate, values=frozenset(counts), counts=counts)
    return domains


@dataclass(frozen=True, slots=True)
class ObjectRef:
    """A triple object with its resolved kind and categorical domain, if any."""

    term: Term
    kind: ObjectKind
    domain: CategoricalDomain | None = None

    @property
    def literal(self) -> LiteralValue:
        assert isinstance(self.term, LiteralValue)
        return self.term


def make_object_ref(term: Term, predicate: Iri,
                    categoricals: Mapping[Iri, CategoricalDomain]) -> ObjectRef:
    if isinstance(term, str):
        return ObjectRef(term, ObjectKind.ENTITY)
    if term.kind is LiteralKind.NUMBER:
        return ObjectRef(term, ObjectKind.NUMBER)
    if term.kind is LiteralKind.DATETIME:
        return ObjectRef(term, ObjectKind.DATETIME)
    domain = categoricals.get(predicate)
    if domain is not None:
        return ObjectRef(term, ObjectKind.CATEGORICAL, domain)
    return ObjectRef(term, ObjectKind.TEXT)


@dataclass(slots=True)
class SimilarityContext:
    """What mixed-kind comparisons need: entity scores and entity labels.

    ``entity_score`` takes (graph-1 entity, graph-2 entity); unknown pairs
    default to 0.5 upstream.
    """

    entity_score: Callable[[Iri, Iri], float]
    labels1: Mapping[Iri, tuple[str, ...]]
    labels2: Mapping[Iri, tuple[str, ...]]

    def labels_for(self, ref_is_left: bool, entity: Iri) -> tuple[str, ...]:
        side = self.labels1 if ref_is_left else self.labels2
        return side.get(entity, ())


def numeric_similarity(a: float, b: float) -> float:
    """1 at equality, falling linearly with relative difference, floored at 0."""
    if a == b:
        return 1.0
    scale = max(abs(a), abs(b))
    return max(0.0, 1.0 - abs(a - b) / scale)


def _utc_date(timestamp: int):
    return datetime.fromtimestamp(timestamp, tz=timezone.utc).date()


def date_similarity(a: LiteralValue, b: LiteralValue) -> float:
    """Day precision when either side lacks a time of day, else epoch-relative."""
    ts_a, ts_b = a.parsed_timestamp, b.parsed_timestamp
    assert ts_a is not None and ts_b is not None
    if (not a.has_time or not b.has_time) and _utc_date(ts_a) == _utc_date(ts_b):
        return 1.0
    return numeric_similarity(float(ts_a), float(ts_b))


def _entity_entity(left: ObjectRef, right: ObjectRef, ctx: SimilarityContext) -> float:
    return ctx.entity_score(left.term, right.term)


def _entity_string(left: ObjectRef, right: ObjectRef, ctx: SimilarityContext) -> float:
    entity_is_left = left.kind is ObjectKind.ENTITY
    entity_ref, other = (left, right) if entity_is_left else (right, left)
    labels = ctx.labels_for(entity_is_left, entity_ref.term)
    text = other.literal.raw
    if not labels:
        return 0.0
    return max(fuzzy_similarity(label, text) for label in labels)


def _entity_categorical(left: ObjectRef, right: ObjectRef,
                        ctx: SimilarityContext) -> float:
    entity_is_left = left.kind is ObjectKind.ENTITY
    entity_ref, cat = (left, right) if entity_is_left else (right, left)
    labels = ctx.labels_for(entity_is_left, entity_ref.term)
    value_raw = cat.literal.raw
    value_norm = normalize_label(value_raw)
    best = 0.0
    for label in labels:
        if value_norm and normalize_label(label) == value_norm:
            return 1.0
        score = fuzzy_similarity(label, value_raw)
        if score >= _CATEGORICAL_FUZZY_FLOOR:
            best = max(best, score)
    return best


def _categorical_string_score(cat: ObjectRef, text: str) -> float:
    domain = cat.domain
    assert domain is not None
    own = normalize_label(cat.literal.raw)
    probe = normalize_label(text)
    own_score = fuzzy_similarity(probe, own)
    for value in domain.values:
        if fuzzy_similarity(probe, value) > own_score:
            return 0.0
    return own_score


def _categorical_string(left: ObjectRef, right: ObjectRef,
                        ctx: SimilarityContext) -> float:
    cat_is_left = left.kind is ObjectKind.CATEGORICAL
    cat, other = (left, right) if cat_is_left else (right, left)
    return _categorical_string_score(cat, other.literal.raw)


def _categorical_categorical(left: ObjectRef, right: ObjectRef,
                             ctx: SimilarityContext) -> float:
    return max(_categorical_string_score(left, right.literal.raw),
               _categorical_string_score(right, left.literal.raw))


def _number_number(left: ObjectRef, right: ObjectRef, ctx: SimilarityContext) -> float:
    return numeric_similarity(left.literal.parsed_number, right.literal.parsed_number)


def _number_string(left: ObjectRef, right: ObjectRef, ctx: SimilarityContext) -> float:
    number_is_left = left.kind is ObjectKind.NUMBER
    number_ref, other = (left, right) if number_is_left else (right, left)
    value = number_ref.literal.parsed_number
    text = other.literal.raw
    best = max((numeric_similarity(value, x) for x in extract_numbers(text)),
               default=0.0)
    return max(best, fuzzy_similarity(number_ref.literal.raw, text))


def _year_to_epoch(value: float) -> float | None:
    if value != int(value):
        return None
    year = int(value)
    if not (_YEAR_RANGE[0] <= year <= _YEAR_RANGE[1]):
        return None
    return datetime(year, 1, 1, tzinfo=timezone.utc).timestamp()


def _number_datetime(left: ObjectRef, right: ObjectRef, ctx: SimilarityContext) -> float:
    number_is_left = left.kind is ObjectKind.NUMBER
    number_ref, date_ref = (left, right) if number_is_left else (right, left)
    value = number_ref.literal.parsed_number
    as_epoch = _year_to_epoch(value)
    if as_epoch is None:
        as_epoch = value
    return numeric_similarity(as_epoch, float(date_ref.literal.parsed_timestamp))


def _datetime_datetime(left: ObjectRef, right: ObjectRef,
                       ctx: SimilarityContext) -> float:
    return date_similarity(left.literal, right.literal)


def _datetime_string(left: ObjectRef, right: ObjectRef, ctx: SimilarityContext) -> float:
    date_is_left = left.kind is ObjectKind.DATETIME
    date_ref, other = (left, right) if date_is_left else (right, left)
    parsed = parse_datetime(other.literal.raw)
    if parsed is None:
        return 0.0
    probe = LiteralValue(other.literal.raw, LiteralKind.DATETIME,
                         parsed_timestamp=parsed[0], has_time=parsed[1])
    return date_similarity(date_ref.literal, probe)


def _string_string(left: ObjectRef, right: ObjectRef, ctx: SimilarityContext) -> float:
    return fuzzy_similarity(left.literal.raw, right.literal.raw)


_E = ObjectKind.ENTITY
_T = ObjectKind.TEXT
_N = ObjectKind.NUMBER
_D = ObjectKind.DATETIME
_C = ObjectKind.CATEGORICAL

_UNORDERED_RULES = {
    frozenset((_E,)): _entity_entity,
    frozenset((_E, _T)): _entity_string,
    frozenset((_E, _C)): _entity_categorical,
    frozenset((_E, _N)): _entity_string,
    frozenset((_E, _D)): _entity_string,
    frozenset((_C,)): _categorical_categorical,
    frozenset((_C, _T)): _categorical_string,
    frozenset((_C, _N)): _categorical_string,
    frozenset((_C, _D)): _categorical_string,
    frozenset((_N,)): _number_number,
    frozenset((_N, _T)): _number_string,
    frozenset((_N, _D)): _number_datetime,
    frozenset((_D,)): _datetime_datetime,
    frozenset((_D, _T)): _datetime_string,
    frozenset((_T,)): _string_string,
}

DISPATCH: dict[tuple[ObjectKind, ObjectKind], Callable] = {
    (k1, k2): _UNORDERED_RULES[frozenset((k1, k2))]
    for k1 in ObjectKind for k2 in ObjectKind
}


def object_similarity(left: ObjectRef, right: ObjectRef,
                      ctx: SimilarityContext) -> float:
    """Similarity of two triple objects, left from graph 1, right from graph 2."""
    return DISPATCH[(left.kind, right.kind)](left, right, ctx)
