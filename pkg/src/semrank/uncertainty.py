"""Cluster-mass aggregation and semantic entropy.

Candidate probabilities are renormalized over the sampled set before
anything else, so cluster masses form a proper distribution and the
entropy is a real Shannon entropy (natural log).
"""

from __future__ import annotations

import math
from dataclasses import replace
from typing import Sequence

from .clustering import cluster_candidates
from .model import CandidateItem, ClusterSet, SemanticCluster, UsdConfig, ValidationError


def renormalize(items: Sequence[CandidateItem]) -> list[CandidateItem]:
    """Scale probabilities to sum to 1, preserving their ratios."""
    total = sum(c.prob for c in items)
    if total <= 0.0:
        raise ValidationError("total candidate probability mass must be > 0")
    return [replace(c, prob=c.prob / total) for c in items]


def cluster_mass(members: Sequence[CandidateItem]) -> float:
    """Total (renormalized) probability carried by one cluster."""
    return sum(c.prob for c in members)


def semantic_entropy(masses: Sequence[float], normalization: str = "none") -> float:
    """Shannon entropy of the cluster-mass distribution.

    With normalization='log_m' the value is divided by ln(m) so it lands
    in [0, 1]; a single cluster yields 0 under both modes.
    """
    m = len(masses)
    if m <= 1:
        return 0.0
    h = -sum(p * math.log(p) for p in masses if p > 0.0)
    h = max(0.0, h)
    if normalization == "log_m":
        return h / math.log(m)
    return h


def estimate(items: Sequence[CandidateItem], cfg: UsdConfig) -> ClusterSet:
    """Renormalize, cluster, and compute the entropy for one candidate pool.

    enable_clustering=False degrades to all-singleton clusters;
    enable_uncertainty=False forces the entropy to 0. Both are the
    configuration-only ablation paths.
    """
    normalized = renormalize(items)
    if cfg.enable_clustering:
        groups = cluster_candidates(normalized, cfg.sim_threshold)
    else:
        groups = [[c] for c in sorted(normalized, key=lambda c: c.id)]
    clusters = tuple(
        SemanticCluster(members=tuple(g), mass=cluster_mass(g)) for g in groups
    )
    if cfg.enable_uncertainty:
        entropy = semantic_entropy(
            [c.mass for c in clusters], cfg.entropy_normalization
        )
    else:
        entropy = 0.0
    return ClusterSet(clusters=clusters, entropy=entropy)
