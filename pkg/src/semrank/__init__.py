"""Deterministic semantic-cluster reranking for next-item candidate sets."""

__version__ = "0.1.0"

from .decoder import adaptive_temperature, decode, decode_record, phi, score
from .clustering import cluster_candidates, cosine_similarity
from .model import (
    CandidateItem,
    ClusterSet,
    ConfigError,
    DecodeRequest,
    RankedList,
    ScoredItem,
    SemanticCluster,
    UsdConfig,
    ValidationError,
    validate_config,
    validate_request,
)
from .uncertainty import estimate, renormalize, semantic_entropy

__all__ = [
    "CandidateItem",
    "ClusterSet",
    "ConfigError",
    "DecodeRequest",
    "RankedList",
    "ScoredItem",
    "SemanticCluster",
    "UsdConfig",
    "ValidationError",
    "adaptive_temperature",
    "cluster_candidates",
    "cosine_similarity",
    "decode",
    "decode_record",
    "estimate",
    "phi",
    "renormalize",
    "score",
    "semantic_entropy",
    "validate_config",
    "validate_request",
]
