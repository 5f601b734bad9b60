"""In-memory knowledge-graph model: triples, indexes, predicate statistics."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Union
from urllib.parse import unquote

from .errors import PredicateAbsentError
from .literals import LiteralValue

Iri = str
Term = Union[Iri, LiteralValue]

RDFS_LABEL = "http://www.w3.org/2000/01/rdf-schema#label"
SKOS_PREF_LABEL = "http://www.w3.org/2004/02/skos/core#prefLabel"
SKOS_ALT_LABEL = "http://www.w3.org/2004/02/skos/core#altLabel"
DEFAULT_LABEL_PREDICATES = (RDFS_LABEL, SKOS_PREF_LABEL, SKOS_ALT_LABEL)


@dataclass(frozen=True, slots=True)
class Triple:
    subject: Iri
    predicate: Iri
    object: Term

    def object_key(self) -> tuple:
        if isinstance(self.object, LiteralValue):
            return ("l",) + self.object.key()
        return ("e", self.object)

    def key(self) -> tuple:
        return (self.subject, self.predicate) + self.object_key()


@dataclass(frozen=True, slots=True)
class PredicateStats:
    predicate: Iri
    triple_count: int
    distinct_subjects: int
    distinct_objects: int
    functionality: float
    inverse_functionality: float
    unique_ratio: float


def iri_local_name(iri: Iri) -> str:
    """Human-readable tail of an IRI: part after the last '#' or '/',
    percent-decoded, underscores as spaces."""
    tail = iri
    for sep in ("#", "/"):
        pos = tail.rfind(sep)
        if pos >= 0:
            tail = tail[pos + 1:]
    return unquote(tail).replace("_", " ").strip()


class KnowledgeGraph:
    """Frozen triple store with subject/object indexes and cached predicate stats.

    Build through :class:`GraphBuilder`; instances are not mutated after
    construction. Triple ids are positions in :attr:`triples`.
    """

    __slots__ = ("name", "triples", "entities", "predicates", "labels", "stats",
                 "_by_subject", "_by_object_entity", "_by_literal")

    def __init__(self, name: str, triples: tuple[Triple, ...],
                 labels: dict[Iri, tuple[str, ...]], stats: dict[Iri, PredicateStats],
                 by_subject: dict[Iri, tuple[int, ...]],
                 by_object_entity: dict[Iri, tuple[int, ...]],
                 by_literal: dict[tuple, tuple[int, ...]]):
        self.name = name
        self.triples = triples
        self.labels = labels
        self.stats = stats
        self._by_subject = by_subject
        self._by_object_entity = by_object_entity
        self._by_literal = by_literal
        self.entities = frozenset(by_subject) | frozenset(by_object_entity)
        self.predicates = frozenset(stats)

    def __len__(self) -> int:
        return len(self.triples)

    def triples_with_subject(self, entity: Iri) -> tuple[int, ...]:
        return self._by_subject.get(entity, ())

    def triples_with_object_entity(self, entity: Iri) -> tuple[int, ...]:
        return self._by_object_entity.get(entity, ())

    def triples_with_literal(self, literal_key: tuple) -> tuple[int, ...]:
        return self._by_literal.get(literal_key, ())

    def literal_keys(self):
        return self._by_literal.keys()

    def labels_for(self, iri: Iri) -> tuple[str, ...]:
        return self.labels.get(iri, ())

    def _stats_for(self, predicate: Iri) -> PredicateStats:
        stats = self.stats.get(predicate)
        if stats is None:
            raise PredicateAbsentError(predicate)
        return stats

    def functionality(self, predicate: Iri) -> float:
        return self._stats_for(predicate).functionality

    def inverse_functionality(self, predicate: Iri) -> float:
        return self._stats_for(predicate).inverse_functionality

    def unique_ratio(self, predicate: Iri) -> float:
        return self._stats_for(predicate).unique_ratio


def compute_functionality(graph: KnowledgeGraph, predicate: Iri) -> float:
    return graph.functionality(predicate)


def compute_inverse_functionality(graph: KnowledgeGraph, predicate: Iri) -> float:
    return graph.inverse_functionality(predicate)


def compute_unique_ratio(graph: KnowledgeGraph, predicate: Iri) -> float:
    return graph.unique_ratio(predicate)


def _is_bnode(iri: Iri) -> bool:
    return iri.startswith("_:")


class GraphBuilder:
    """Accumulates triples with set semantics, then freezes a KnowledgeGraph.

    Duplicate triples (same subject, predicate, and object identity) are
    dropped on add. Labels come from ``label_predicates`` objects plus an
    IRI local-name fallback for every entity and predicate.
    """

    def __init__(self, name: str = "",
                 label_predicates: Iterable[Iri] = DEFAULT_LABEL_PREDICATES):
        self.name = name
        self.label_predicates = frozenset(label_predicates)
        self._triples: list[Triple] = []
        self._seen: set[tuple] = set()
        self._extra_labels: dict[Iri, set[str]] = {}

    def __len__(self) -> int:
        return len(self._triples)

    def add(self, subject: Iri, predicate: Iri, obj: Term) -> bool:
        triple = Triple(subject, predicate, obj)
        key = triple.key()
        if key in self._seen:
            return False
        self._seen.add(key)
        self._triples.append(triple)
        return True

    def add_label(self, iri: Iri, text: str) -> None:
        if text:
            self._extra_labels.setdefault(iri, set()).add(text)

    def freeze(self) -> KnowledgeGraph:
        triples = tuple(self._triples)
        by_subject: dict[Iri, list[int]] = {}
        by_object_entity: dict[Iri, list[int]] = {}
        by_literal: dict[tuple, list[int]] = {}
        per_predicate: dict[Iri, list[int]] = {}
        label_sets: dict[Iri, set[str]] = {k: set(v) for k, v in self._extra_labels.items()}

        for index, triple in enumerate(triples):
            by_subject.setdefault(triple.subject, []).append(index)
            per_predicate.setdefault(triple.predicate, []).append(index)
            if isinstance(triple.object, LiteralValue):
                by_literal.setdefault(triple.object.key(), []).append(index)
                if triple.predicate in self.label_predicates and triple.object.raw:
                    label_sets.setdefault(triple.subject, set()).add(triple.object.raw)
            else:
                by_object_entity.setdefault(triple.object, []).append(index)

        stats: dict[Iri, PredicateStats] = {}
        for predicate, ids in per_predicate.items():
            subjects = {triples[i].subject for i in ids}
            objects = {triples[i].object_key() for i in ids}
            count = len(ids)
            stats[predicate] = PredicateStats(
                predicate=predicate,
                triple_count=count,
                distinct_subjects=len(subjects),
                distinct_objects=len(objects),
                functionality=len(subjects) / count,
                inverse_functionality=len(objects) / count,
                unique_ratio=len(objects) / count,
            )

        named = set(by_subject) | set(by_object_entity) | set(per_predicate)
        for iri in named:
            if _is_bnode(iri):
                continue
            fallback = iri_local_name(iri)
            if fallback:
                label_sets.setdefault(iri, set()).add(fallback)

        labels = {iri: tuple(sorted(values)) for iri, values in label_sets.items() if values}
        return KnowledgeGraph(
            name=self.name,
            triples=triples,
            labels=labels,
            stats=stats,
            by_subject={k: tuple(v) for k, v in by_subject.items()},
            by_object_entity={k: tuple(v) for k, v in by_object_entity.items()},
            by_literal={k: tuple(v) for k, v in by_literal.items()},
        )
