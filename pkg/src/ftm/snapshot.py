"""Binary graph snapshots for fast reload of parsed graphs.

Layout: an 8-byte magic header, then four little-endian sections in fixed
order (term dictionary, triple table, label table, predicate statistics).
Each section is ``u32 length + payload + u32 CRC-32``. A wrong header is a
version error; a short read or CRC mismatch is a checksum error.
"""
from __future__ import annotations

import struct
import zlib
from typing import BinaryIO

from .errors import SnapshotChecksumError, SnapshotVersionError
from .kg import KnowledgeGraph, PredicateStats, Triple
from .literals import LiteralKind, LiteralValue

MAGIC = b"FTMSNAP1"

_KIND_CODES = {LiteralKind.TEXT: 0, LiteralKind.NUMBER: 1, LiteralKind.DATETIME: 2}
_CODE_KINDS = {code: kind for kind, code in _KIND_CODES.items()}

_F_NUMBER = 1
_F_TIMESTAMP = 2
_F_DATATYPE = 4
_F_LANGUAGE = 8
_F_HAS_TIME = 16


class _TermTable:
    def __init__(self):
        self.ids: dict[str, int] = {}
        self.terms: list[str] = []

    def add(self, term: str) -> int:
        found = self.ids.get(term)
        if found is not None:
            return found
        index = len(self.terms)
        self.ids[term] = index
        self.terms.append(term)
        return index


def _encode_terms(table: _TermTable) -> bytes:
    parts = [struct.pack("<I", len(table.terms))]
    for term in table.terms:
        data = term.encode("utf-8")
        parts.append(struct.pack("<I", len(data)))
        parts.append(data)
    return b"".join(parts)


def _encode_triples(graph: KnowledgeGraph, table: _TermTable) -> bytes:
    parts = [struct.pack("<I", len(graph.triples))]
    for triple in graph.triples:
        head = struct.pack("<II", table.add(triple.subject), table.add(triple.predicate))
        obj = triple.object
        if isinstance(obj, LiteralValue):
            flags = 0
            tail = b""
            if obj.parsed_number is not None:
                flags |= _F_NUMBER
                tail += struct.pack("<d", obj.parsed_number)
            if obj.parsed_timestamp is not None:
                flags |= _F_TIMESTAMP
                tail += struct.pack("<q", obj.parsed_timestamp)
            if obj.datatype_iri is not None:
                flags |= _F_DATATYPE
                tail += struct.pack("<I", table.add(obj.datatype_iri))
            if obj.language_tag is not None:
                flags |= _F_LANGUAGE
                tail += struct.pack("<I", table.add(obj.language_tag))
            if obj.has_time:
                flags |= _F_HAS_TIME
            parts.append(head + struct.pack("<BIBB", 1, table.add(obj.raw),
                                            _KIND_CODES[obj.kind], flags) + tail)
        else:
            parts.append(head + struct.pack("<BI", 0, table.add(obj)))
    return b"".join(parts)


def _encode_labels(graph: KnowledgeGraph, table: _TermTable) -> bytes:
    parts = [struct.pack("<I", len(graph.labels))]
    for iri in sorted(graph.labels):
        labels = graph.labels[iri]
        parts.append(struct.pack("<II", table.add(iri), len(labels)))
        for label in labels:
            parts.append(struct.pack("<I", table.add(label)))
    return b"".join(parts)


def _encode_stats(graph: KnowledgeGraph, table: _TermTable) -> bytes:
    parts = [struct.pack("<I", len(graph.stats))]
    for predicate in sorted(graph.stats):
        stats = graph.stats[predicate]
        parts.append(struct.pack(
            "<IIIIddd", table.add(predicate), stats.triple_count,
            stats.distinct_subjects, stats.distinct_objects, stats.functionality,
            stats.inverse_functionality, stats.unique_ratio))
    return b"".join(parts)


def _write_section(handle: BinaryIO, payload: bytes) -> None:
    handle.write(struct.pack("<I", len(payload)))
    handle.write(payload)
    handle.write(struct.pack("<I", zlib.crc32(payload)))


def save_snapshot(graph: KnowledgeGraph, path: str) -> None:
    table = _TermTable()
    table.add(graph.name)
    triples = _encode_triples(graph, table)
    labels = _encode_labels(graph, table)
    stats = _encode_stats(graph, table)
    terms = _encode_terms(table)
    with open(path, "wb") as handle:
        handle.write(MAGIC)
        for payload in (terms, triples, labels, stats):
            _write_section(handle, payload)


class _Reader:
    def __init__(self, data: bytes, what: str):
        self.data = data
        self.pos = 0
        self.what = what

    def take(self, count: int) -> bytes:
        end = self.pos + count
        if end > len(self.data):
            raise SnapshotChecksumError(f"truncated {self.what} section")
        chunk = self.data[self.pos:end]
        self.pos = end
        return chunk

    def u32(self) -> int:
        return struct.unpack("<I", self.take(4))[0]

    def unpack(self, fmt: str) -> tuple:
        return struct.unpack(fmt, self.take(struct.calcsize(fmt)))


def _read_section(handle: BinaryIO, what: str) -> bytes:
    header = handle.read(4)
    if len(header) != 4:
        raise SnapshotChecksumError(f"truncated before {what} section")
    (length,) = struct.unpack("<I", header)
    payload = handle.read(length)
    if len(payload) != length:
        raise SnapshotChecksumError(f"truncated {what} section")
    crc_bytes = handle.read(4)
    if len(crc_bytes) != 4:
        raise SnapshotChecksumError(f"missing checksum for {what} section")
    (expected,) = struct.unpack("<I", crc_bytes)
    if zlib.crc32(payload) != expected:
        raise SnapshotChecksumError(f"checksum mismatch in {what} section")
    return payload


def load_snapshot(path: str) -> KnowledgeGraph:
    with open(path, "rb") as handle:
        header = handle.read(len(MAGIC))
        if len(header) < len(MAGIC):
            raise SnapshotChecksumError("file too short for snapshot header")
        if header != MAGIC:
            raise SnapshotVersionError(
                f"unsupported snapshot header {header!r}; expected {MAGIC!r}")
        payloads = {name: _read_section(handle, name)
                    for name in ("terms", "triples", "labels", "stats")}

    reader = _Reader(payloads["terms"], "terms")
    terms = []
    for _ in range(reader.u32()):
        terms.append(reader.take(reader.u32()).decode("utf-8"))

    def term(index: int) -> str:
        if index >= len(terms):
            raise SnapshotChecksumError("term id out of range")
        return terms[index]

    reader = _Reader(payloads["triples"], "triples")
    triples = []
    by_subject: dict[str, list[int]] = {}
    by_object_entity: dict[str, list[int]] = {}
    by_literal: dict[tuple, list[int]] = {}
    count = reader.u32()
    for index in range(count):
        subject_id, predicate_id, tag = reader.unpack("<IIB")
        subject, predicate = term(subject_id), term(predicate_id)
        if tag == 0:
            obj = term(reader.u32())
            by_object_entity.setdefault(obj, []).append(index)
        elif tag == 1:
            raw_id, kind_code, flags = reader.unpack("<IBB")
            number = reader.unpack("<d")[0] if flags & _F_NUMBER else None
            timestamp = reader.unpack("<q")[0] if flags & _F_TIMESTAMP else None
            datatype = term(reader.u32()) if flags & _F_DATATYPE else None
            language = term(reader.u32()) if flags & _F_LANGUAGE else None
            kind = _CODE_KINDS.get(kind_code)
            if kind is None:
                raise SnapshotChecksumError(f"unknown literal kind code {kind_code}")
            obj = LiteralValue(term(raw_id), kind, parsed_number=number,
                               parsed_timestamp=timestamp, datatype_iri=datatype,
                               language_tag=language, has_time=bool(flags & _F_HAS_TIME))
            by_literal.setdefault(obj.key(), []).append(index)
        else:
            raise SnapshotChecksumError(f"unknown triple tag {tag}")
        triples.append(Triple(subject, predicate, obj))
        by_subject.setdefault(subject, []).append(index)

    reader = _Reader(payloads["labels"], "labels")
    labels = {}
    for _ in range(reader.u32()):
        iri = term(reader.u32())
        labels[iri] = tuple(term(reader.u32()) for _ in range(reader.u32()))

    reader = _Reader(payloads["stats"], "stats")
    stats = {}
    for _ in range(reader.u32()):
        (predicate_id, triple_count, distinct_subjects, distinct_objects,
         functionality, inverse_functionality, unique_ratio) = reader.unpack("<IIIIddd")
        predicate = term(predicate_id)
        stats[predicate] = PredicateStats(
            predicate=predicate, triple_count=triple_count,
            distinct_subjects=distinct_subjects, distinct_objects=distinct_objects,
            functionality=functionality, inverse_functionality=inverse_functionality,
            unique_ratio=unique_ratio)

    return KnowledgeGraph(
        name=terms[0] if terms else "",
        triples=tuple(triples),
        labels=labels,
        stats=stats,
        by_subject={k: tuple(v) for k, v in by_subject.items()},
        by_object_entity={k: tuple(v) for k, v in by_object_entity.items()},
        by_literal={k: tuple(v) for k, v in by_literal.items()},
    )
