"""Literal classification: numbers, dates, and plain text.

Every literal entering a graph is classified once, here, so that all
downstream similarity code can branch on a stable kind instead of
re-parsing lexical forms.
"""
from __future__ import annotations

import enum
import math
import re
from dataclasses import dataclass
from datetime import datetime, timezone

XSD = "http://www.w3.org/2001/XMLSchema#"
RDF_LANG_STRING = "http://www.w3.org/1999/02/22-rdf-syntax-ns#langString"

NUMERIC_DATATYPES = frozenset(
    XSD + local
    for local in (
        "integer", "decimal", "double", "float", "long", "int", "short", "byte",
        "nonNegativeInteger", "positiveInteger", "negativeInteger",
        "nonPositiveInteger", "unsignedLong", "unsignedInt", "unsignedShort",
        "unsignedByte",
    )
)

DATE_DATATYPES = frozenset(XSD + local for local in ("date", "dateTime", "dateTimeStamp"))


class LiteralKind(enum.Enum):
    TEXT = "Text"
    NUMBER = "Number"
    DATETIME = "DateTime"


@dataclass(frozen=True, slots=True)
class LiteralValue:
    """A classified RDF literal.

    ``raw`` keeps the exact lexical form; identity for deduplication and
    set intersection is (raw, datatype_iri, language_tag). ``has_time``
    is only meaningful for DateTime literals and records whether the
    lexical form carried a time of day.
    """

    raw: str
    kind: LiteralKind
    parsed_number: float | None = None
    parsed_timestamp: int | None = None
    datatype_iri: str | None = None
    language_tag: str | None = None
    has_time: bool = False

    def key(self) -> tuple[str, str, str]:
        return (self.raw, self.datatype_iri or "", self.language_tag or "")


_GROUPED_RE = re.compile(r"[+-]?\d{1,3}(?:,\d{3})+(?:\.\d+)?")
_NUMBER_RE = re.compile(r"[+-]?(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][+-]?\d+)?")

# Sign is part of a number only when not glued to an alphanumeric prefix,
# so "NCC-45167" yields 45167, not -45167.
_EXTRACT_RE = re.compile(
    r"(?<![0-9A-Za-z.])[+-]?(?:\d{1,3}(?:,\d{3})+|\d+)(?:\.\d+)?(?!\d)"
)

_MONTHS = {
    name: index
    for index, name in enumerate(
        ("january", "february", "march", "april", "may", "june", "july",
         "august", "september", "october", "november", "december"),
        start=1,
    )
}
_MONTHS.update({name[:3]: index for name, index in list(_MONTHS.items())})

_ISO_DATE_RE = re.compile(r"(\d{4})-(\d{2})-(\d{2})")
_ISO_DATETIME_RE = re.compile(
    r"(\d{4})-(\d{2})-(\d{2})[Tt ]"
    r"(\d{2}):(\d{2})(?::(\d{2})(?:\.(\d+))?)?"
    r"(Z|z|[+-]\d{2}:\d{2})?"
)
_MONTH_FIRST_RE = re.compile(r"([A-Za-z]+)\s+(\d{1,2})\s*,?\s+(\d{1,4})")
_DAY_FIRST_RE = re.compile(r"(\d{1,2})\s+([A-Za-z]+)\s*,?\s+(\d{1,4})")


def parse_number(raw: str) -> float | None:
    """Parse a decimal, integer, or float lexical form; None when it is not one.

    Thousands separators are stripped only when the whole string is digits
    and commas in groups of three (optionally with a decimal part).
    """
    s = raw.strip()
    if not s:
        return None
    if _GROUPED_RE.fullmatch(s):
        s = s.replace(",", "")
    if not _NUMBER_RE.fullmatch(s):
        return None
    value = float(s)
    if not math.isfinite(value):
        return None
    return value


def _epoch(year: int, month: int, day: int, hour: int = 0, minute: int = 0,
           second: int = 0) -> int | None:
    try:
        moment = datetime(year, month, day, hour, minute, second, tzinfo=timezone.utc)
    except ValueError:
        return None
    return int(moment.timestamp())


def parse_datetime(raw: str) -> tuple[int, bool] | None:
    """Parse a date lexical form to (epoch seconds, carried a time of day).

    Accepted: ISO 8601 dates and date-times (timezone-less values are read
    as UTC), "Month D, YYYY", and "D Month YYYY" with full or three-letter
    English month names, case-insensitive.
    """
    s = raw.strip()
    if not s:
        return None

    match = _ISO_DATETIME_RE.fullmatch(s)
    if match:
        year, month, day, hour, minute = (int(match.group(i)) for i in range(1, 6))
        second = int(match.group(6) or 0)
        epoch = _epoch(year, month, day, hour, minute, second)
        if epoch is None:
            return None
        offset = match.group(8)
        if offset and offset not in ("Z", "z"):
            sign = 1 if offset[0] == "+" else -1
            epoch -= sign * (int(offset[1:3]) * 3600 + int(offset[4:6]) * 60)
        return epoch, True

    match = _ISO_DATE_RE.fullmatch(s)
    if match:
        epoch = _epoch(*(int(g) for g in match.groups()))
        return None if epoch is None else (epoch, False)

    match = _MONTH_FIRST_RE.fullmatch(s)
    if match:
        month = _MONTHS.get(match.group(1).lower())
        if month is None:
            return None
        epoch = _epoch(int(match.group(3)), month, int(match.group(2)))
        return None if epoch is None else (epoch, False)

    match = _DAY_FIRST_RE.fullmatch(s)
    if match:
        month = _MONTHS.get(match.group(2).lower())
        if month is None:
            return None
        epoch = _epoch(int(match.group(3)), month, int(match.group(1)))
        return None if epoch is None else (epoch, False)

    return None


def classify_literal(raw: str, datatype_iri: str | None = None,
                     language_tag: str | None = None) -> LiteralValue:
    """Classify a literal as Number, DateTime, or Text.

    A literal is a Number when its datatype is numeric or its form parses
    as one; a DateTime when its datatype is a date type or its form parses
    under the accepted date formats; Text otherwise. Unparseable typed
    values fall back to Text rather than failing.
    """
    if datatype_iri in NUMERIC_DATATYPES:
        number = parse_number(raw)
        if number is not None:
            return LiteralValue(raw, LiteralKind.NUMBER, parsed_number=number,
                                datatype_iri=datatype_iri)
        return LiteralValue(raw, LiteralKind.TEXT, datatype_iri=datatype_iri)

    if datatype_iri in DATE_DATATYPES:
        parsed = parse_datetime(raw)
        if parsed is not None:
            return LiteralValue(raw, LiteralKind.DATETIME, parsed_timestamp=parsed[0],
                                datatype_iri=datatype_iri, has_time=parsed[1])
        return LiteralValue(raw, LiteralKind.TEXT, datatype_iri=datatype_iri)

    number = parse_number(raw)
    if number is not None:
        return LiteralValue(raw, LiteralKind.NUMBER, parsed_number=number,
                            datatype_iri=datatype_iri, language_tag=language_tag)

    parsed = parse_datetime(raw)
    if parsed is not None:
        return LiteralValue(raw, LiteralKind.DATETIME, parsed_timestamp=parsed[0],
                            datatype_iri=datatype_iri, language_tag=language_tag,
                            has_time=parsed[1])

    return LiteralValue(raw, LiteralKind.TEXT, datatype_iri=datatype_iri,
                        language_tag=language_tag)


def extract_numbers(text: str) -> list[float]:
    """All maximal integer/decimal substrings of ``text``, in order.

    Comma grouping in threes is honored ("1,234" is one number); a comma
    that breaks grouping separates numbers. A sign glued to a preceding
    alphanumeric is a separator, not a sign.
    """
    values = []
    for match in _EXTRACT_RE.finditer(text):
        value = float(match.group(0).replace(",", ""))
        if math.isfinite(value):
            values.append(value)
    return values
