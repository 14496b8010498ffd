"""Cosine-similarity clustering of candidate logit vectors.

Two candidates are equivalent when their cosine similarity strictly
exceeds the threshold; clusters are the connected components of the
resulting graph (single linkage taken to transitive closure), computed
with a union-find over all pairs. Candidate sets are small (tens of
items), so the O(n^2) pass is fine.
"""

from __future__ import annotations

import math
from typing import Sequence

import numpy as np

from .model import CandidateItem, ValidationError


def cosine_similarity(a: Sequence[float], b: Sequence[float]) -> float:
    """Cosine of the angle between two logit vectors, clamped to [-1, 1]."""
    if len(a) != len(b):
        raise ValidationError(f"dimension mismatch: {len(a)} vs {len(b)}")
    va = np.asarray(a, dtype=float)
    vb = np.asarray(b, dtype=float)
    na = float(np.linalg.norm(va))
    nb = float(np.linalg.norm(vb))
    if na == 0.0 or nb == 0.0:
        raise ValidationError("zero-norm logit vector")
    sim = float(np.dot(va, vb) / (na * nb))
    return max(-1.0, min(1.0, sim))


def similarity_matrix(items: Sequence[CandidateItem]) -> np.ndarray:
    """Symmetric n x n cosine matrix with unit diagonal."""
    mat = np.stack([np.asarray(c.logits, dtype=float) for c in items])
    norms = np.linalg.norm(mat, axis=1)
    if np.any(norms == 0.0):
        raise ValidationError("zero-norm logit vector")
    unit = mat / norms[:, None]
    sims = np.clip(unit @ unit.T, -1.0, 1.0)
    np.fill_diagonal(sims, 1.0)
    return sims


def equivalence(a: CandidateItem, b: CandidateItem, sim_threshold: float) -> bool:
    """Strict-threshold indicator: similarity must exceed, not meet, the cut."""
    return cosine_similarity(a.logits, b.logits) > sim_threshold


class _UnionFind:
    def __init__(self, size: int) -> None:
        self.parent = list(range(size))

    def find(self, u: int) -> int:
        while self.parent[u] != u:
            self.parent[u] = self.parent[self.parent[u]]
            u = self.parent[u]
        return u

    def union(self, u: int, v: int) -> None:
        ru, rv = self.find(u), self.find(v)
        if ru != rv:
            self.parent[rv] = ru


def cluster_candidates(
    items: Sequence[CandidateItem], sim_threshold: float
) -> list[list[CandidateItem]]:
    """Partition candidates into threshold-linked clusters.

    Output is canonical regardless of input order: members within a cluster
    are sorted by item id, clusters by their smallest member id.
    """
    if not items:
        return []
    if not math.isfinite(sim_threshold):
        raise ValidationError("sim_threshold must be finite")
    sims = similarity_matrix(items)
    n = len(items)
    uf = _UnionFind(n)
    for i in range(n):
        for j in range(i + 1, n):
            if sims[i, j] > sim_threshold:
                uf.union(i, j)
    groups: dict[int, list[CandidateItem]] = {}
    for i, item in enumerate(items):
        groups.setdefault(uf.find(i), []).append(item)
    clusters = [sorted(g, key=lambda c: c.id) for g in groups.values()]
    clusters.sort(key=lambda g: g[0].id)
    return clusters
