"""Streaming N-Triples and Turtle parsers, plus N-Triples serialization helpers.

Both parsers consume an iterable of lines and yield raw triples as
``(subject, predicate, object)`` where subject/predicate are IRI or blank
node strings and the object may also be a :class:`RawLiteral`. Literal
classification happens later, at graph-building time. Errors carry the
source name and a 1-based line number.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Iterator, Union
from urllib.parse import urljoin

from .errors import ParseError

RDF_NS = "http://www.w3.org/1999/02/22-rdf-syntax-ns#"
RDF_TYPE = RDF_NS + "type"
RDF_FIRST = RDF_NS + "first"
RDF_REST = RDF_NS + "rest"
RDF_NIL = RDF_NS + "nil"
XSD_NS = "http://www.w3.org/2001/XMLSchema#"
XSD_STRING = XSD_NS + "string"


@dataclass(frozen=True, slots=True)
class RawLiteral:
    lexical: str
    datatype: str | None = None
    language: str | None = None


RawTerm = Union[str, RawLiteral]
RawTriple = tuple[str, str, RawTerm]

_IRI_BODY = r'(?:[^\x00-\x20<>"{}|^`\\]|\\u[0-9A-Fa-f]{4}|\\U[0-9A-Fa-f]{8})*'
_IRI = rf"<({_IRI_BODY})>"
_BNODE = r"_:[A-Za-z0-9_\u00C0-\uFFFF](?:[A-Za-z0-9_.\-\u00B7\u00C0-\uFFFF]*[A-Za-z0-9_\-\u00B7\u00C0-\uFFFF])?"
_STRING = r'"((?:[^"\\\n\r]|\\.)*)"'
_LANG = r"@([a-zA-Z]+(?:-[a-zA-Z0-9]+)*)"

_NT_LINE_RE = re.compile(
    rf"^[ \t]*(?:(?P<si>{_IRI})|(?P<sb>{_BNODE}))"
    rf"[ \t]+(?P<p>{_IRI})"
    rf"[ \t]+(?:(?P<oi>{_IRI})|(?P<ob>{_BNODE})|(?P<lex>{_STRING})"
    rf"(?:\^\^(?P<dt>{_IRI})|(?P<lang>{_LANG}))?)"
    rf"[ \t]*\.[ \t]*(?:#.*)?$"
)
_IRI_RE = re.compile(_IRI)
_BNODE_RE = re.compile(_BNODE)
_STRING_RE = re.compile(_STRING)
_LANG_RE = re.compile(_LANG)
_SCHEME_RE = re.compile(r"[A-Za-z][A-Za-z0-9+.\-]*:")

_ECHAR = {"t": "\t", "b": "\b", "n": "\n", "r": "\r", "f": "\f",
          '"': '"', "'": "'", "\\": "\\"}

_BAD_IRI_CHARS = set('<>"{}|^`\\ \t\n\r') | {chr(c) for c in range(0x21)}


def unescape(text: str, source: str = "<input>", line: int = 0) -> str:
    """Resolve string/IRI escapes; invalid escape sequences are errors."""
    if "\\" not in text:
        return text
    out = []
    i = 0
    n = len(text)
    while i < n:
        ch = text[i]
        if ch != "\\":
            out.append(ch)
            i += 1
            continue
        if i + 1 >= n:
            raise ParseError("dangling backslash", source, line)
        code = text[i + 1]
        if code in _ECHAR:
            out.append(_ECHAR[code])
            i += 2
            continue
        if code in ("u", "U"):
            width = 4 if code == "u" else 8
            digits = text[i + 2:i + 2 + width]
            if len(digits) != width or not all(c in "0123456789abcdefABCDEF" for c in digits):
                raise ParseError(f"bad \\{code} escape", source, line)
            point = int(digits, 16)
            if 0xD800 <= point <= 0xDFFF or point > 0x10FFFF:
                raise ParseError(f"escape out of range: \\{code}{digits}", source, line)
            out.append(chr(point))
            i += 2 + width
            continue
        raise ParseError(f"invalid escape \\{code}", source, line)
    return "".join(out)


def _check_iri(iri: str, source: str, line: int, require_absolute: bool = True) -> str:
    if not iri:
        raise ParseError("empty IRI", source, line)
    for ch in iri:
        if ch in _BAD_IRI_CHARS:
            raise ParseError(f"forbidden character {ch!r} in IRI <{iri}>", source, line)
    if require_absolute and not _SCHEME_RE.match(iri):
        raise ParseError(f"relative IRI not allowed here: <{iri}>", source, line)
    return iri


def _diagnose_nt(line: str, source: str, line_no: int) -> ParseError:
    pos = 0
    n = len(line)

    def skip_ws(required: bool, what: str) -> None:
        nonlocal pos
        start = pos
        while pos < n and line[pos] in " \t":
            pos += 1
        if required and pos == start:
            raise ParseError(f"expected whitespace before {what} (col {pos + 1})",
                             source, line_no)

    def term(kinds: str, what: str) -> None:
        nonlocal pos
        if "i" in kinds:
            m = _IRI_RE.match(line, pos)
            if m:
                pos = m.end()
                return
        if "b" in kinds:
            m = _BNODE_RE.match(line, pos)
            if m:
                pos = m.end()
                return
        if "l" in kinds:
            m = _STRING_RE.match(line, pos)
            if m:
                pos = m.end()
                if line.startswith("^^", pos):
                    pos += 2
                    m2 = _IRI_RE.match(line, pos)
                    if not m2:
                        raise ParseError(f"expected datatype IRI (col {pos + 1})",
                                         source, line_no)
                    pos = m2.end()
                elif pos < n and line[pos] == "@":
                    m2 = _LANG_RE.match(line, pos)
                    if not m2:
                        raise ParseError(f"bad language tag (col {pos + 1})",
                                         source, line_no)
                    pos = m2.end()
                return
        raise ParseError(f"expected {what} (col {pos + 1})", source, line_no)

    try:
        skip_ws(False, "subject")
        term("ib", "subject IRI or blank node")
        skip_ws(True, "predicate")
        term("i", "predicate IRI")
        skip_ws(True, "object")
        term("ibl", "object term")
        skip_ws(False, "terminator")
        if pos >= n or line[pos] != ".":
            raise ParseError(f"expected '.' terminator (col {pos + 1})", source, line_no)
        pos += 1
        rest = line[pos:].strip()
        if rest and not rest.startswith("#"):
            raise ParseError(f"trailing content after '.': {rest!r}", source, line_no)
    except ParseError as exc:
        return exc
    return ParseError("malformed triple", source, line_no)


def parse_ntriples(lines: Iterable[str], source: str = "<ntriples>") -> Iterator[RawTriple]:
    """Parse N-Triples lines lazily; one triple per non-blank, non-comment line."""
    for line_no, raw_line in enumerate(lines, start=1):
        line = raw_line.rstrip("\n").rstrip("\r")
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        match = _NT_LINE_RE.match(line)
        if match is None:
            raise _diagnose_nt(line, source, line_no)
        group = match.group
        if group("si") is not None:
            subject = _check_iri(unescape(group("si")[1:-1], source, line_no),
                                 source, line_no)
        else:
            subject = group("sb")
        predicate = _check_iri(unescape(group("p")[1:-1], source, line_no),
                               source, line_no)
        if group("oi") is not None:
            obj: RawTerm = _check_iri(unescape(group("oi")[1:-1], source, line_no),
                                      source, line_no)
        elif group("ob") is not None:
            obj = group("ob")
        else:
            lexical = unescape(group("lex")[1:-1], source, line_no)
            datatype = None
            language = None
            if group("dt") is not None:
                datatype = _check_iri(unescape(group("dt")[1:-1], source, line_no),
                                      source, line_no)
            elif group("lang") is not None:
                language = group("lang")[1:].lower()
            obj = RawLiteral(lexical, datatype, language)
        yield subject, predicate, obj


_PN_BASE = ("A-Za-z\u00C0-\u00D6\u00D8-\u00F6\u00F8-\u02FF\u0370-\u037D"
            "\u037F-\u1FFF\u200C-\u200D\u2070-\u218F\u2C00-\u2FEF"
            "\u3001-\uD7FF\uF900-\uFDCF\uFDF0-\uFFFD")
_PN_U = _PN_BASE + "_"
_PN = _PN_U + r"0-9\-\u00B7\u0300-\u036F\u203F-\u2040"
_PLX = r"%[0-9A-Fa-f]{2}|\\[_~.\-!$&'()*+,;=/?#@%]"
_PNAME_RE = re.compile(
    rf"(?:[{_PN_BASE}](?:[{_PN}.]*[{_PN}])?)?:"
    rf"(?:(?:[{_PN_U}0-9:]|{_PLX})(?:(?:[{_PN}.:]|{_PLX})*(?:[{_PN}:]|{_PLX}))?)?"
)
_TTL_BNODE_RE = re.compile(rf"_:[{_PN_U}0-9](?:[{_PN}.]*[{_PN}])?")
_TTL_LANG_RE = re.compile(r"@([a-zA-Z]+(?:-[a-zA-Z0-9]+)*)")
_TTL_IRI_RE = re.compile(_IRI)
_NUMBER_TOKEN_RE = re.compile(
    r"[+-]?(?:\d+\.\d*[eE][+-]?\d+|\.\d+[eE][+-]?\d+|\d+[eE][+-]?\d+"
    r"|\d+\.\d+|\.\d+|\d+)"
)
_KEYWORD_BOUNDARY = re.compile(rf"(?![{_PN}:.])")
_SHORT_STRING_RE = {
    '"': re.compile(r'"((?:[^"\\\n\r]|\\.)*)"'),
    "'": re.compile(r"'((?:[^'\\\n\r]|\\.)*)'"),
}
_LOCAL_ESCAPE_RE = re.compile(r"\\([_~.\-!$&'()*+,;=/?#@%])")


class _Token:
    __slots__ = ("kind", "value", "line")

    def __init__(self, kind: str, value, line: int):
        self.kind = kind
        self.value = value
        self.line = line


class _TurtleLexer:
    def __init__(self, lines: Iterable[str], source: str):
        self._lines = iter(lines)
        self.source = source
        self.line_no = 0
        self.buf = ""
        self.pos = 0

    def error(self, message: str) -> ParseError:
        return ParseError(message, self.source, self.line_no)

    def _pull(self) -> bool:
        try:
            self.buf = next(self._lines).rstrip("\n").rstrip("\r")
        except StopIteration:
            return False
        self.pos = 0
        self.line_no += 1
        return True

    def _skip_trivia(self) -> bool:
        while True:
            if self.pos >= len(self.buf):
                if not self._pull():
                    return False
                continue
            ch = self.buf[self.pos]
            if ch in " \t\r\n":
                self.pos += 1
            elif ch == "#":
                self.pos = len(self.buf)
            else:
                return True

    def _long_string(self, quote: str) -> str:
        delim = quote * 3
        self.pos += 3
        parts = []
        while True:
            buf, pos = self.buf, self.pos
            end = len(buf)
            i = pos
            while i < end:
                if buf[i] == "\\":
                    i += 2
                    continue
                if buf.startswith(delim, i):
                    parts.append(buf[pos:i])
                    self.pos = i + 3
                    return "".join(parts)
                i += 1
            parts.append(buf[pos:] + "\n")
            if not self._pull():
                raise self.error("unterminated long string")

    def _string_body(self) -> str:
        quote = self.buf[self.pos]
        if self.buf.startswith(quote * 3, self.pos):
            return self._long_string(quote)
        match = _SHORT_STRING_RE[quote].match(self.buf, self.pos)
        if match is None:
            raise self.error("unterminated string")
        self.pos = match.end()
        return match.group(1)

    def _iri_token(self) -> _Token:
        match = _TTL_IRI_RE.match(self.buf, self.pos)
        if match is None:
            raise self.error("malformed IRI")
        self.pos = match.end()
        body = unescape(match.group(1), self.source, self.line_no)
        return _Token("iri", body, self.line_no)

    def next(self) -> _Token:
        if not self._skip_trivia():
            return _Token("eof", None, self.line_no)
        line = self.line_no
        buf, pos = self.buf, self.pos
        ch = buf[pos]

        if ch == "<":
            return self._iri_token()

        if ch in "\"'":
            lexical = unescape(self._string_body(), self.source, line)
            dt_token = None
            language = None
            if self.buf.startswith("^^", self.pos):
                self.pos += 2
                if self.pos < len(self.buf) and self.buf[self.pos] == "<":
                    dt_token = self._iri_token()
                else:
                    match = _PNAME_RE.match(self.buf, self.pos)
                    if match is None:
                        raise self.error("expected datatype after '^^'")
                    self.pos = match.end()
                    dt_token = _Token("pname", match.group(0), line)
            elif self.pos < len(self.buf) and self.buf[self.pos] == "@":
                match = _TTL_LANG_RE.match(self.buf, self.pos)
                if match is None:
                    raise self.error("bad language tag")
                self.pos = match.end()
                language = match.group(1).lower()
            return _Token("literal", (lexical, dt_token, language), line)

        if ch == "_" and buf.startswith("_:", pos):
            match = _TTL_BNODE_RE.match(buf, pos)
            if match is None:
                raise self.error("malformed blank node label")
            self.pos = match.end()
            return _Token("bnode", match.group(0), line)

        if ch in "()[];,":
            self.pos += 1
            return _Token(ch, ch, line)

        if ch == "." and not (pos + 1 < len(buf) and buf[pos + 1].isdigit()):
            self.pos += 1
            return _Token(".", ".", line)

        if ch == "@":
            match = re.match(r"@([A-Za-z]+)", buf[pos:])
            if match and match.group(1) in ("prefix", "base"):
                self.pos += match.end()
                return _Token("@" + match.group(1), None, line)
            raise self.error("unexpected '@' outside a literal language tag")

        if ch in "+-.0123456789":
            match = _NUMBER_TOKEN_RE.match(buf, pos)
            if match is None:
                raise self.error(f"malformed numeric literal at {buf[pos:pos + 10]!r}")
            self.pos = match.end()
            lexical = match.group(0)
            if "e" in lexical or "E" in lexical:
                datatype = XSD_NS + "double"
            elif "." in lexical:
                datatype = XSD_NS + "decimal"
            else:
                datatype = XSD_NS + "integer"
            return _Token("number", (lexical, datatype), line)

        if buf.startswith("true", pos) and _KEYWORD_BOUNDARY.match(buf, pos + 4):
            self.pos += 4
            return _Token("boolean", "true", line)
        if buf.startswith("false", pos) and _KEYWORD_BOUNDARY.match(buf, pos + 5):
            self.pos += 5
            return _Token("boolean", "false", line)
        if ch == "a" and _KEYWORD_BOUNDARY.match(buf, pos + 1):
            self.pos += 1
            return _Token("a", "a", line)
        for keyword, kind in (("prefix", "@prefix-nodot"), ("base", "@base-nodot")):
            width = len(keyword)
            if (buf[pos:pos + width].lower() == keyword
                    and _KEYWORD_BOUNDARY.match(buf, pos + width)):
                self.pos += width
                return _Token(kind, keyword, line)

        match = _PNAME_RE.match(buf, pos)
        if match:
            self.pos = match.end()
            return _Token("pname", match.group(0), line)

        raise self.error(f"unexpected character {ch!r}")


class TurtleParser:
    """Recursive-descent Turtle parser emitting raw triples in document order.

    Relative IRIs resolve against ``@base``/``BASE`` when present and are
    otherwise kept verbatim. Collections and blank node property lists are
    expanded to their standard triple encodings.
    """

    def __init__(self, lines: Iterable[str], source: str = "<turtle>",
                 base: str | None = None):
        self._lexer = _TurtleLexer(lines, source)
        self.source = source
        self.base = base
        self.prefixes: dict[str, str] = {}
        self._pushed: _Token | None = None
        self._bnode_counter = 0
        self._out: list[RawTriple] = []

    def _next(self) -> _Token:
        if self._pushed is not None:
            token, self._pushed = self._pushed, None
            return token
        return self._lexer.next()

    def _push(self, token: _Token) -> None:
        self._pushed = token

    def _expect(self, kind: str, what: str) -> _Token:
        token = self._next()
        if token.kind != kind:
            raise ParseError(f"expected {what}, found {token.kind!r}",
                             self.source, token.line)
        return token

    def _fresh_bnode(self) -> str:
        self._bnode_counter += 1
        return f"_:!{self._bnode_counter}"

    def _resolve(self, iri: str, line: int) -> str:
        if _SCHEME_RE.match(iri):
            return _check_iri(iri, self.source, line, require_absolute=False)
        if self.base:
            return _check_iri(urljoin(self.base, iri), self.source, line,
                              require_absolute=False)
        return _check_iri(iri, self.source, line, require_absolute=False)

    def _expand_pname(self, raw: str, line: int) -> str:
        prefix, _, local = raw.partition(":")
        namespace = self.prefixes.get(prefix)
        if namespace is None:
            raise ParseError(f"undefined prefix {prefix + ':'!r}", self.source, line)
        return namespace + _LOCAL_ESCAPE_RE.sub(r"\1", local)

    def _iri_from(self, token: _Token) -> str:
        if token.kind == "iri":
            return self._resolve(token.value, token.line)
        if token.kind == "pname":
            return self._expand_pname(token.value, token.line)
        raise ParseError(f"expected IRI, found {token.kind!r}", self.source, token.line)

    def parse(self) -> Iterator[RawTriple]:
        while True:
            token = self._next()
            if token.kind == "eof":
                return
            if token.kind in ("@prefix", "@prefix-nodot"):
                name_token = self._expect("pname", "prefix name ending in ':'")
                prefix, colon, local = name_token.value.partition(":")
                if not colon or local:
                    raise ParseError("expected prefix name ending in ':'",
                                     self.source, name_token.line)
                iri_token = self._expect("iri", "namespace IRI")
                self.prefixes[prefix] = self._resolve(iri_token.value, iri_token.line)
                if token.kind == "@prefix":
                    self._expect(".", "'.' after @prefix directive")
                continue
            if token.kind in ("@base", "@base-nodot"):
                iri_token = self._expect("iri", "base IRI")
                self.base = self._resolve(iri_token.value, iri_token.line)
                if token.kind == "@base":
                    self._expect(".", "'.' after @base directive")
                continue
            self._statement(token)
            yield from self._out
            self._out.clear()

    def _statement(self, token: _Token) -> None:
        if token.kind == "[":
            subject = self._bnode_property_list(token)
            nxt = self._next()
            if nxt.kind == ".":
                return
            self._push(nxt)
            self._predicate_object_list(subject)
        else:
            subject = self._subject(token)
            self._predicate_object_list(subject)
        self._expect(".", "'.' at end of statement")

    def _subject(self, token: _Token) -> str:
        if token.kind == "bnode":
            return token.value
        if token.kind == "(":
            return self._collection()
        return self._iri_from(token)

    def _predicate_object_list(self, subject: str) -> None:
        while True:
            verb_token = self._next()
            if verb_token.kind == "a":
                predicate = RDF_TYPE
            else:
                predicate = self._iri_from(verb_token)
            self._object_list(subject, predicate)
            token = self._next()
            if token.kind != ";":
                self._push(token)
                return
            # consume repeated ';' and allow a trailing one
            while True:
                token = self._next()
                if token.kind != ";":
                    break
            if token.kind in (".", "]"):
                self._push(token)
                return
            self._push(token)

    def _object_list(self, subject: str, predicate: str) -> None:
        while True:
            self._out.append((subject, predicate, self._object()))
            token = self._next()
            if token.kind != ",":
                self._push(token)
                return

    def _object(self) -> RawTerm:
        token = self._next()
        if token.kind == "bnode":
            return token.value
        if token.kind == "[":
            return self._bnode_property_list(token)
        if token.kind == "(":
            return self._collection()
        if token.kind == "literal":
            lexical, dt_token, language = token.value
            datatype = self._iri_from(dt_token) if dt_token is not None else None
            return RawLiteral(lexical, datatype, language)
        if token.kind == "number":
            lexical, datatype = token.value
            return RawLiteral(lexical, datatype)
        if token.kind == "boolean":
            return RawLiteral(token.value, XSD_NS + "boolean")
        return self._iri_from(token)

    def _bnode_property_list(self, open_token: _Token) -> str:
        node = self._fresh_bnode()
        token = self._next()
        if token.kind == "]":
            return node
        self._push(token)
        self._predicate_object_list(node)
        self._expect("]", "']' closing blank node property list")
        return node

    def _collection(self) -> str:
        items: list[RawTerm] = []
        while True:
            token = self._next()
            if token.kind == ")":
                break
            self._push(token)
            items.append(self._object())
        if not items:
            return RDF_NIL
        nodes = [self._fresh_bnode() for _ in items]
        for index, item in enumerate(items):
            self._out.append((nodes[index], RDF_FIRST, item))
            rest: RawTerm = nodes[index + 1] if index + 1 < len(nodes) else RDF_NIL
            self._out.append((nodes[index], RDF_REST, rest))
        return nodes[0]


def parse_turtle(lines: Iterable[str], source: str = "<turtle>",
                 base: str | None = None) -> Iterator[RawTriple]:
    return TurtleParser(lines, source, base).parse()


_LITERAL_ESCAPES = {"\\": "\\\\", '"': '\\"', "\n": "\\n", "\r": "\\r", "\t": "\\t"}


def escape_literal(text: str) -> str:
    return "".join(_LITERAL_ESCAPES.get(ch, ch) for ch in text)


def format_term(term) -> str:
    """Serialize a term in N-Triples syntax (literals, IRIs, blank nodes)."""
    if isinstance(term, str):
        return term if term.startswith("_:") else f"<{term}>"
    lexical = term.lexical if isinstance(term, RawLiteral) else term.raw
    datatype = term.datatype if isinstance(term, RawLiteral) else term.datatype_iri
    language = term.language if isinstance(term, RawLiteral) else term.language_tag
    body = f'"{escape_literal(lexical)}"'
    if language:
        return f"{body}@{language}"
    if datatype and datatype != XSD_STRING:
        return f"{body}^^<{datatype}>"
    return body
