"""Tiered label matching between entity (or predicate) sets of two graphs.

Tiers, most to least exact: identical IRI (1.0), identical label (0.9),
identical normalized label (0.8), identical stopword-stripped label (0.7),
fuzzy string similarity (scaled by 0.7), embedding cosine (scaled by 0.7).
A pair's confidence is the best tier that fires; ties prefer the more
exact tier. Pairs below the floor are dropped.
"""
from __future__ import annotations

import enum
import logging
import re
from dataclasses import dataclass
from importlib import resources
from typing import Callable, Iterable, Mapping

from .kg import Iri, KnowledgeGraph

log = logging.getLogger(__name__)

DEFAULT_FLOOR = 0.35
DEFAULT_CROSS_LIMIT = 1000


def _load_stopwords() -> frozenset[str]:
    text = resources.files("ftm.data").joinpath("stopwords.txt").read_text("utf-8")
    return frozenset(line.strip() for line in text.splitlines() if line.strip())


STOPWORDS = _load_stopwords()

_PAREN_RE = re.compile(r"\([^()]*\)")
_BOUNDARY_RES = (
    re.compile(r"(?<=[a-z])(?=[A-Z])"),
    re.compile(r"(?<=[A-Z])(?=[A-Z][a-z])"),
    re.compile(r"(?<=[A-Za-z])(?=[0-9])"),
    re.compile(r"(?<=[0-9])(?=[A-Za-z])"),
)


def normalize_label(text: str) -> str:
    """Lowercased, punctuation-free, camel/digit-split, space-collapsed form.

    Parenthesized qualifiers are removed first; case boundaries are split
    before lowercasing so "CamelCase42" becomes "camel case 42". The result
    is idempotent under re-normalization.
    """
    s = text
    while True:
        stripped = _PAREN_RE.sub(" ", s)
        if stripped == s:
            break
        s = stripped
    for boundary in _BOUNDARY_RES:
        s = boundary.sub(" ", s)
    s = s.replace("_", " ")
    s = "".join(ch if ch.isalnum() or ch.isspace() else " " for ch in s)
    return " ".join(s.lower().split())


def strip_stopwords(text: str) -> str:
    return " ".join(token for token in text.split() if token not in STOPWORDS)


def lcs_length(a: str, b: str) -> int:
    """Longest common subsequence length, bit-parallel over the shorter string."""
    if not a or not b:
        return 0
    if len(a) > len(b):
        a, b = b, a
    masks: dict[str, int] = {}
    for index, ch in enumerate(a):
        masks[ch] = masks.get(ch, 0) | (1 << index)
    full = (1 << len(a)) - 1
    v = full
    get = masks.get
    for ch in b:
        u = v & get(ch, 0)
        v = ((v + u) | (v - u)) & full
    return len(a) - v.bit_count()


def indel_similarity(a: str, b: str) -> float:
    """Normalized insert/delete similarity: 2*LCS / (len(a)+len(b))."""
    total = len(a) + len(b)
    if total == 0:
        return 1.0
    return 2.0 * lcs_length(a, b) / total


def _token_set_score(tokens_a: list[str], tokens_b: list[str]) -> float:
    set_a, set_b = set(tokens_a), set(tokens_b)
    shared = " ".join(sorted(set_a & set_b))
    only_a = " ".join(sorted(set_a - set_b))
    only_b = " ".join(sorted(set_b - set_a))
    full_a = (shared + " " + only_a).strip()
    full_b = (shared + " " + only_b).strip()
    return max(indel_similarity(shared, full_a),
               indel_similarity(shared, full_b),
               indel_similarity(full_a, full_b))


def fuzzy_similarity(a: str, b: str) -> float:
    """Best of plain, token-sorted, and discounted token-set indel similarity."""
    a, b = a.lower(), b.lower()
    if a == b:
        return 1.0
    score = indel_similarity(a, b)
    tokens_a, tokens_b = a.split(), b.split()
    score = max(score, indel_similarity(" ".join(sorted(tokens_a)),
                                        " ".join(sorted(tokens_b))))
    return max(score, 0.95 * _token_set_score(tokens_a, tokens_b))


class MatchTier(enum.Enum):
    URI_EXACT = 0
    LABEL_EXACT = 1
    NORMALIZED = 2
    STOPWORD_STRIPPED = 3
    FUZZY = 4
    EMBEDDING = 5


TIER_CEILING = {
    MatchTier.URI_EXACT: 1.0,
    MatchTier.LABEL_EXACT: 0.9,
    MatchTier.NORMALIZED: 0.8,
    MatchTier.STOPWORD_STRIPPED: 0.7,
    MatchTier.FUZZY: 0.7,
    MatchTier.EMBEDDING: 0.7,
}


@dataclass(frozen=True, slots=True)
class LabelMapping:
    left: Iri
    right: Iri
    confidence: float
    tier: MatchTier


def clamp01(value: float) -> float:
    if value < 0.0:
        return 0.0
    if value > 1.0:
        return 1.0
    return value


EmbedFn = Callable[[list[str]], list]


def embedding_similarity(left_labels: Iterable[str], right_labels: Iterable[str],
                         embed: EmbedFn) -> float:
    """Best clamped cosine between any label pair; 0.0 when either side is empty."""
    from .embedding import cosine

    left = sorted(set(left_labels))
    right = sorted(set(right_labels))
    if not left or not right:
        return 0.0
    vectors = embed(left + right)
    best = 0.0
    for i in range(len(left)):
        for j in range(len(right)):
            best = max(best, clamp01(cosine(vectors[i], vectors[len(left) + j])))
    return best


def label_confidence(left_iri: Iri, left_labels: Iterable[str],
                     right_iri: Iri, right_labels: Iterable[str],
                     embed: EmbedFn | None = None,
                     fuzzy_enabled: bool = True,
                     floor: float = DEFAULT_FLOOR) -> LabelMapping | None:
    """Score one candidate pair through the tier cascade; None below the floor."""
    left_set, right_set = set(left_labels), set(right_labels)
    best_conf = -1.0
    best_tier = None

    def consider(confidence: float, tier: MatchTier) -> None:
        nonlocal best_conf, best_tier
        if confidence > best_conf:
            best_conf, best_tier = confidence, tier

    if left_iri == right_iri:
        consider(1.0, MatchTier.URI_EXACT)
    if left_set & right_set:
        consider(0.9, MatchTier.LABEL_EXACT)
    norm_left = {normalize_label(x) for x in left_set} - {""}
    norm_right = {normalize_label(x) for x in right_set} - {""}
    if norm_left & norm_right:
        consider(0.8, MatchTier.NORMALIZED)
    strip_left = {strip_stopwords(x) for x in norm_left} - {""}
    strip_right = {strip_stopwords(x) for x in norm_right} - {""}
    if strip_left & strip_right:
        consider(0.7, MatchTier.STOPWORD_STRIPPED)

    if fuzzy_enabled and left_set and right_set:
        best_fuzzy = max(fuzzy_similarity(l, r) for l in left_set for r in right_set)
        consider(0.7 * best_fuzzy, MatchTier.FUZZY)
        if embed is not None:
            try:
                consider(0.7 * embedding_similarity(left_set, right_set, embed),
                         MatchTier.EMBEDDING)
            except Exception as exc:  # provider trouble must not sink the cascade
                log.warning("embedding tier skipped: %s", exc)

    if best_tier is None or best_conf < floor:
        return None
    return LabelMapping(left_iri, right_iri, best_conf, best_tier)


@dataclass(frozen=True, slots=True)
class LabelMappings:
    entities: dict[tuple[Iri, Iri], LabelMapping]
    predicates: dict[tuple[Iri, Iri], LabelMapping]


def _blocking_tokens(labels: Iterable[str]) -> set[str]:
    tokens = set()
    for label in labels:
        tokens.update(normalize_label(label).split())
    return tokens - STOPWORDS


def _match_class(left_iris: Iterable[Iri], right_iris: Iterable[Iri],
                 labels_left: Mapping[Iri, tuple[str, ...]],
                 labels_right: Mapping[Iri, tuple[str, ...]],
                 embed: EmbedFn | None, cross_limit: int,
                 floor: float) -> dict[tuple[Iri, Iri], LabelMapping]:
    left_sorted = sorted(left_iris)
    right_sorted = sorted(right_iris)
    full_cross = min(len(left_sorted), len(right_sorted)) < cross_limit

    def labels_of(side: Mapping[Iri, tuple[str, ...]], iri: Iri) -> tuple[str, ...]:
        return side.get(iri, ())

    if full_cross:
        candidates = [(l, r) for l in left_sorted for r in right_sorted]
        fuzzy_pairs = None
    else:
        pairs: set[tuple[Iri, Iri]] = set()
        fuzzy_pairs = set()
        shared_iris = set(left_sorted) & set(right_sorted)
        pairs.update((iri, iri) for iri in shared_iris)

        def exact_candidates(key_fn) -> None:
            index_left: dict[str, list[Iri]] = {}
            for iri in left_sorted:
                for key in key_fn(labels_of(labels_left, iri)):
                    index_left.setdefault(key, []).append(iri)
            for iri in right_sorted:
                for key in key_fn(labels_of(labels_right, iri)):
                    for other in index_left.get(key, ()):
                        pairs.add((other, iri))

        exact_candidates(lambda ls: set(ls))
        exact_candidates(lambda ls: {normalize_label(x) for x in ls} - {""})
        exact_candidates(
            lambda ls: {strip_stopwords(normalize_label(x)) for x in ls} - {""})

        token_index: dict[str, list[Iri]] = {}
        for iri in left_sorted:
            for token in _blocking_tokens(labels_of(labels_left, iri)):
                token_index.setdefault(token, []).append(iri)
        for iri in right_sorted:
            for token in _blocking_tokens(labels_of(labels_right, iri)):
                for other in token_index.get(token, ()):
                    fuzzy_pairs.add((other, iri))
        pairs.update(fuzzy_pairs)
        candidates = sorted(pairs)

    result = {}
    for left, right in candidates:
        fuzzy_enabled = full_cross or (left, right) in fuzzy_pairs
        mapping = label_confidence(left, labels_of(labels_left, left),
                                   right, labels_of(labels_right, right),
                                   embed=embed if fuzzy_enabled else None,
                                   fuzzy_enabled=fuzzy_enabled, floor=floor)
        if mapping is not None:
            result[(left, right)] = mapping
    return result


def build_label_mappings(graph1: KnowledgeGraph, graph2: KnowledgeGraph,
                         embedder=None, cross_limit: int = DEFAULT_CROSS_LIMIT,
                         floor: float = DEFAULT_FLOOR) -> LabelMappings:
    """Label mappings for entities and predicates of two graphs.

    Fuzzy and embedding tiers run on the full cross product only when the
    smaller side of a class stays under ``cross_limit``; above that,
    candidates must share a non-stopword normalized label token.
    """
    embed = _caching_embed(embedder) if embedder is not None else None
    entities = _match_class(graph1.entities, graph2.entities, graph1.labels,
                            graph2.labels, embed, cross_limit, floor)
    predicates = _match_class(graph1.predicates, graph2.predicates, graph1.labels,
                              graph2.labels, embed, cross_limit, floor)
    return LabelMappings(entities=entities, predicates=predicates)


def _caching_embed(embedder) -> EmbedFn:
    cache: dict[str, object] = {}

    def embed(texts: list[str]) -> list:
        missing = sorted({t for t in texts if t not in cache})
        if missing:
            for text, vector in zip(missing, embedder.embed_batch(missing)):
                cache[text] = vector
        return [cache[t] for t in texts]

    return embed
