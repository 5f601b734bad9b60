from __future__ import annotations

import pytest

from ftm.embedding import LocalTrigramProvider
from ftm.ingest import build_graph
from ftm.rdf import RawLiteral

import synth

EX1 = "http://one.example/"
EX2 = "http://two.example/"
RDFS_LABEL = "http://www.w3.org/2000/01/rdf-schema#label"


def lit(lexical: str, datatype: str | None = None,
        language: str | None = None) -> RawLiteral:
    return RawLiteral(lexical, datatype, language)


def graph_of(rows, name: str = "g"):
    """Build a frozen graph from (subject, predicate, object) tuples."""
    return build_graph(rows, name=name)


@pytest.fixture(scope="session")
def world():
    return synth.build_world(seed=0)


@pytest.fixture(scope="session")
def local_embedder():
    return LocalTrigramProvider()
