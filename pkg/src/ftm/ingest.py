"""Graph loading from files and endpoints, and shared-literal discovery."""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Union

from .errors import FtmError
from .kg import DEFAULT_LABEL_PREDICATES, GraphBuilder, KnowledgeGraph
from .literals import classify_literal
from .rdf import RawLiteral, RawTriple, parse_ntriples, parse_turtle
from .sparql import EndpointSource, fetch_triples

_EXTENSION_FORMATS = {
    ".nt": "ntriples",
    ".ntriples": "ntriples",
    ".ttl": "turtle",
    ".turtle": "turtle",
}


@dataclass(slots=True)
class FileSource:
    """An RDF file on disk; format inferred from the extension unless given."""

    path: str
    format: str | None = None

    def resolved_format(self) -> str:
        if self.format:
            if self.format not in ("ntriples", "turtle"):
                raise FtmError(f"unsupported format {self.format!r}")
            return self.format
        fmt = _EXTENSION_FORMATS.get(Path(self.path).suffix.lower())
        if fmt is None:
            raise FtmError(
                f"cannot infer format of {self.path!r}; pass format='ntriples' or 'turtle'")
        return fmt


GraphSource = Union[FileSource, EndpointSource]


def _raw_triples(source: GraphSource):
    if isinstance(source, EndpointSource):
        yield from fetch_triples(source)
        return
    fmt = source.resolved_format()
    with open(source.path, "r", encoding="utf-8") as handle:
        if fmt == "ntriples":
            yield from parse_ntriples(handle, source.path)
        else:
            yield from parse_turtle(handle, source.path)


def build_graph(triples: Iterable[RawTriple], name: str = "",
                label_predicates: Iterable[str] = DEFAULT_LABEL_PREDICATES,
                ) -> KnowledgeGraph:
    """Classify literals and assemble a frozen graph from raw triples."""
    builder = GraphBuilder(name=name, label_predicates=label_predicates)
    for subject, predicate, obj in triples:
        if isinstance(obj, RawLiteral):
            term = classify_literal(obj.lexical, obj.datatype, obj.language)
        else:
            term = obj
        builder.add(subject, predicate, term)
    return builder.freeze()


def load_graph(source: GraphSource, name: str | None = None,
               label_predicates: Iterable[str] = DEFAULT_LABEL_PREDICATES,
               ) -> KnowledgeGraph:
    """Load a graph from a file or a paging SPARQL endpoint.

    The input is streamed: triples are classified and added one at a time,
    so memory tracks the deduplicated graph, not the raw serialization.
    """
    if name is None:
        name = source.url if isinstance(source, EndpointSource) else source.path
    return build_graph(_raw_triples(source), name=name,
                       label_predicates=label_predicates)


@dataclass(frozen=True, slots=True)
class CommonLiteralSet:
    """Literal identities present in both graphs, with per-graph triple ids."""

    values: frozenset
    triples1: tuple[int, ...]
    triples2: tuple[int, ...]


def common_literals(graph1: KnowledgeGraph, graph2: KnowledgeGraph) -> CommonLiteralSet:
    """Intersection of literal object identities (lexical form, datatype, language)."""
    shared = frozenset(graph1.literal_keys()) & frozenset(graph2.literal_keys())
    ids1 = sorted(i for key in shared for i in graph1.triples_with_literal(key))
    ids2 = sorted(i for key in shared for i in graph2.triples_with_literal(key))
    return CommonLiteralSet(values=shared, triples1=tuple(ids1), triples2=tuple(ids2))
