"""Paging SPARQL client: page walking, retries, and failure reporting."""
from __future__ import annotations

import pytest

from ftm.errors import EndpointError
from ftm.rdf import RawLiteral
from ftm.sparql import EndpointSource, fetch_page, fetch_triples

from sparql_stub import StubEndpoint

TRIPLES = [(f"http://e/s{i:02d}", "http://e/p", f"http://e/o{i:02d}")
           for i in range(25)]


def source_for(stub, **kwargs):
    defaults = dict(page_size=10, backoff=0.01)
    defaults.update(kwargs)
    return EndpointSource(url=stub.url, **defaults)


def test_pages_concatenate_in_order():
    with StubEndpoint(TRIPLES) as stub:
        rows = list(fetch_triples(source_for(stub)))
    assert rows == TRIPLES
    assert len(stub.queries) == 3  # 10 + 10 + 5, short page stops the walk


def test_exact_multiple_needs_one_extra_page():
    with StubEndpoint(TRIPLES[:20]) as stub:
        rows = list(fetch_triples(source_for(stub)))
    assert rows == TRIPLES[:20]
    assert len(stub.queries) == 3  # the empty third page signals the end


def test_query_shape_orders_by_subject():
    with StubEndpoint(TRIPLES[:1]) as stub:
        list(fetch_triples(source_for(stub)))
    query = stub.queries[0]
    assert "SELECT ?s ?p ?o" in query
    assert "ORDER BY ?s" in query
    assert "LIMIT 10 OFFSET 0" in query
    assert "FROM" not in query


def test_named_graph_adds_from_clause():
    with StubEndpoint(TRIPLES[:1]) as stub:
        list(fetch_triples(source_for(stub, named_graph="http://e/g")))
    assert "FROM <http://e/g>" in stub.queries[0]


def test_literal_bindings_decode():
    rows_in = [
        ("http://e/a", "http://e/p", ("plain", None, None)),
        ("http://e/b", "http://e/p", ("288", "http://www.w3.org/2001/XMLSchema#integer", None)),
        ("http://e/c", "http://e/p", ("chien", None, "FR")),
        ("http://e/d", "http://e/p", "_:node7"),
    ]
    with StubEndpoint(rows_in) as stub:
        rows = list(fetch_triples(source_for(stub)))
    objects = [o for _, _, o in rows]
    assert objects[0] == RawLiteral("plain", None, None)
    assert objects[1].datatype.endswith("integer")
    assert objects[2] == RawLiteral("chien", None, "fr")
    assert objects[3] == "_:node7"


def test_retry_then_success():
    with StubEndpoint(TRIPLES[:5], fail_first=2) as stub:
        rows = list(fetch_triples(source_for(stub, max_attempts=3)))
    assert rows == TRIPLES[:5]
    assert stub.request_count == 3  # two injected failures, then the page


def test_exhausted_retries_raise_endpoint_error():
    with StubEndpoint(TRIPLES[:5], fail_first=99) as stub:
        with pytest.raises(EndpointError) as err:
            list(fetch_triples(source_for(stub, max_attempts=2)))
    assert err.value.attempts == 2
    assert err.value.status == 500


def test_unreachable_endpoint_raises():
    source = EndpointSource(url="http://127.0.0.1:9/sparql", page_size=5,
                            max_attempts=2, backoff=0.01, timeout=0.5)
    with pytest.raises(EndpointError):
        fetch_page(source, 0)


def test_malformed_payload_raises():
    with StubEndpoint([], payload={"unexpected": True}) as stub:
        with pytest.raises(EndpointError):
            list(fetch_triples(source_for(stub, max_attempts=1)))


def test_prefetch_matches_sequential():
    with StubEndpoint(TRIPLES) as stub:
        sequential = list(fetch_triples(source_for(stub)))
    with StubEndpoint(TRIPLES) as stub:
        pipelined = list(fetch_triples(source_for(stub, max_in_flight=3)))
    assert pipelined == sequential
