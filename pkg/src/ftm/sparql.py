"""Paging SPARQL endpoint client.

Fetches a full graph through repeated ``SELECT ?s ?p ?o`` pages ordered by
subject. Pages can be prefetched concurrently; results always merge in
page order, so output is deterministic for a fixed endpoint snapshot.
"""
from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterator

import requests

from .errors import EndpointError, ProtocolError
from .rdf import RawLiteral, RawTerm

DEFAULT_PAGE_SIZE = 10_000


@dataclass(slots=True)
class EndpointSource:
    """A SPARQL endpoint to page triples from."""

    url: str
    page_size: int = DEFAULT_PAGE_SIZE
    named_graph: str | None = None
    timeout: float = 60.0
    max_attempts: int = 3
    backoff: float = 0.5
    max_in_flight: int = 1


def _page_query(source: EndpointSource, offset: int) -> str:
    from_clause = f"FROM <{source.named_graph}> " if source.named_graph else ""
    return (f"SELECT ?s ?p ?o {from_clause}WHERE {{ ?s ?p ?o }} "
            f"ORDER BY ?s LIMIT {source.page_size} OFFSET {offset}")


def _binding_to_term(binding: dict, position: str) -> RawTerm:
    kind = binding.get("type")
    value = binding.get("value")
    if value is None:
        raise ProtocolError(f"binding for ?{position} has no value")
    if kind == "uri":
        return value
    if kind == "bnode":
        return "_:" + value
    if kind in ("literal", "typed-literal"):
        language = binding.get("xml:lang")
        return RawLiteral(value, binding.get("datatype"),
                          language.lower() if language else None)
    raise ProtocolError(f"unknown binding type {kind!r} for ?{position}")


def fetch_page(source: EndpointSource, offset: int,
               session: requests.Session | None = None) -> list[tuple]:
    """Fetch one page of triples; retries with exponential backoff."""
    query = _page_query(source, offset)
    http = session if session is not None else requests
    last_status = None
    for attempt in range(1, source.max_attempts + 1):
        try:
            response = http.get(
                source.url,
                params={"query": query},
                headers={"Accept": "application/sparql-results+json"},
                timeout=source.timeout,
            )
            last_status = response.status_code
            if response.status_code == 200:
                payload = response.json()
                rows = payload.get("results", {}).get("bindings")
                if rows is None:
                    raise ProtocolError("endpoint answer lacks results.bindings")
                out = []
                for row in rows:
                    out.append((
                        _binding_to_term(row["s"], "s"),
                        _binding_to_term(row["p"], "p"),
                        _binding_to_term(row["o"], "o"),
                    ))
                return out
        except (requests.ConnectionError, requests.Timeout, ValueError,
                ProtocolError) as exc:
            last_status = None
            if attempt == source.max_attempts:
                raise EndpointError(f"endpoint request failed: {exc}",
                                    status=None, attempts=attempt) from exc
        if attempt < source.max_attempts:
            time.sleep(source.backoff * (2 ** (attempt - 1)))
    raise EndpointError("endpoint request failed", status=last_status,
                        attempts=source.max_attempts)


def fetch_triples(source: EndpointSource) -> Iterator[tuple]:
    """Stream all triples from the endpoint in page order."""
    session = requests.Session()
    try:
        if source.max_in_flight <= 1:
            offset = 0
            while True:
                rows = fetch_page(source, offset, session)
                yield from rows
                if len(rows) < source.page_size:
                    return
                offset += source.page_size
        else:
            with ThreadPoolExecutor(max_workers=source.max_in_flight) as pool:
                pending = []
                next_offset = 0
                done = False
                while True:
                    while not done and len(pending) < source.max_in_flight:
                        pending.append(pool.submit(fetch_page, source, next_offset, None))
                        next_offset += source.page_size
                    if not pending:
                        return
                    rows = pending.pop(0).result()
                    yield from rows
                    if len(rows) < source.page_size:
                        for future in pending:
                            future.cancel()
                        return
    finally:
        session.close()
