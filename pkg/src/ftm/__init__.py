"""Full triple matcher: align entities, predicates, and triples across two
RDF knowledge graphs, and classify matched triple pairs as compatible or
divergent."""

from .config import RunConfig, load_config
from .embedding import LocalTrigramProvider, RemoteConfig, RemoteProvider, cosine
from .errors import FtmError
from .evaluation import (GoldLabel, GoldStandard, auto_label_triple_pair,
                         build_triple_dataset, hit_at_k, load_gold,
                         prf_one_to_one, threshold_sweep)
from .ingest import (CommonLiteralSet, FileSource, build_graph, common_literals,
                     load_graph)
from .kg import (GraphBuilder, KnowledgeGraph, PredicateStats, Triple,
                 compute_functionality, compute_inverse_functionality,
                 compute_unique_ratio)
from .labels import (LabelMapping, LabelMappings, MatchTier, build_label_mappings,
                     fuzzy_similarity, label_confidence, normalize_label)
from .literals import LiteralKind, LiteralValue, classify_literal
from .matcher import (Classification, EntityMapping, MatchResult, Phase,
                      TripleMapping, combine_entity_similarity,
                      compute_divergences, entity_similarity_from_triples,
                      run_pipeline, triple_divergence, triple_similarity)
from .objects import (CategoricalDomain, ObjectKind, ObjectRef, SimilarityContext,
                      date_similarity, detect_categoricals, make_object_ref,
                      numeric_similarity, object_similarity)
from .snapshot import load_snapshot, save_snapshot
from .sparql import EndpointSource

__version__ = "0.1.0"

__all__ = [
    "CategoricalDomain", "Classification", "CommonLiteralSet", "EndpointSource",
    "EntityMapping", "FileSource", "FtmError", "GoldLabel", "GoldStandard",
    "GraphBuilder", "KnowledgeGraph", "LabelMapping", "LabelMappings",
    "LiteralKind", "LiteralValue", "LocalTrigramProvider", "MatchResult",
    "MatchTier", "ObjectKind", "ObjectRef", "Phase", "PredicateStats",
    "RemoteConfig", "RemoteProvider", "RunConfig", "SimilarityContext", "Triple",
    "TripleMapping", "build_graph", "build_label_mappings", "build_triple_dataset",
    "auto_label_triple_pair", "classify_literal",
    "combine_entity_similarity", "common_literals",
    "compute_divergences", "compute_functionality",
    "compute_inverse_functionality", "compute_unique_ratio", "cosine",
    "date_similarity", "detect_categoricals", "entity_similarity_from_triples",
    "fuzzy_similarity", "hit_at_k", "label_confidence", "load_config",
    "load_gold", "load_graph", "load_snapshot", "make_object_ref",
    "normalize_label", "numeric_similarity", "object_similarity",
    "prf_one_to_one", "run_pipeline", "save_snapshot", "threshold_sweep",
    "triple_divergence", "triple_similarity",
]
