"""Uncertainty-weighted semantic decoding.

Two-pass loop per request: sample K candidates at the base temperature,
estimate cluster structure and entropy, widen the temperature in
proportion to that entropy, resample, then score and rank the resampled
pool. Everything is a pure function of (request, config); randomness is
derived per request so batch order and worker count never change a
result.
"""

from __future__ import annotations

import hashlib
from typing import Sequence

import numpy as np

from .model import (
    CandidateItem,
    ClusterSet,
    DecodeRequest,
    RankedList,
    ScoredItem,
    UsdConfig,
    ValidationError,
    validate_request,
)
from .uncertainty import estimate


def derive_seed(seed: int, request_id: str, pass_index: int = 1) -> int:
    """Mix the run seed with a stable hash of the request id (and pass)."""
    payload = f"{seed}:{request_id}:{pass_index}".encode()
    digest = hashlib.blake2b(payload, digest_size=8).digest()
    return int.from_bytes(digest, "big")


def request_rng(cfg: UsdConfig, request_id: str, pass_index: int = 1) -> np.random.Generator:
    return np.random.default_rng(derive_seed(cfg.seed, request_id, pass_index))


def sample_candidates(
    candidates: Sequence[CandidateItem],
    temperature: float,
    k: int,
    rng: np.random.Generator,
) -> list[CandidateItem]:
    """Draw min(k, n) distinct candidates from the tempered distribution.

    Weights are prob**(1/T), i.e. the softmax of log-probabilities divided
    by the temperature; sampling is without replacement.
    """
    if temperature <= 0.0:
        raise ValidationError(f"temperature must be > 0: {temperature}")
    n = len(candidates)
    k = min(k, n)
    if k == n:
        return list(candidates)
    logw = np.array([np.log(c.prob) / temperature for c in candidates])
    logw -= logw.max()
    weights = np.exp(logw)
    probs = weights / weights.sum()
    idx = rng.choice(n, size=k, replace=False, p=probs)
    return [candidates[i] for i in idx]


def adaptive_temperature(base: float, gamma: float, h_sem: float) -> float:
    """Widen the sampling temperature in proportion to semantic entropy."""
    return base * (1.0 + gamma * h_sem)


def phi(item: CandidateItem, clusters: ClusterSet, beta: float) -> float:
    """Per-member cluster mass damped by the entropy term, floored at 0.

    The damping factor (1 - beta * H) can go negative for large
    unnormalized entropies; it is clamped so phi never flips the sign of
    a probability-like quantity.
    """
    idx = clusters.cluster_index_of(item.id)
    cluster = clusters.clusters[idx]
    factor = max(0.0, 1.0 - beta * clusters.entropy)
    return (cluster.mass / cluster.size) * factor


def score(item: CandidateItem, clusters: ClusterSet, cfg: UsdConfig) -> ScoredItem:
    """Blend the renormalized base probability with the cluster score."""
    idx = clusters.cluster_index_of(item.id)
    cluster = clusters.clusters[idx]
    base_prob = next(m.prob for m in cluster.members if m.id == item.id)
    phi_val = phi(item, clusters, cfg.beta)
    return ScoredItem(
        id=item.id,
        base_prob=base_prob,
        phi=phi_val,
        score=(1.0 - cfg.alpha) * base_prob + cfg.alpha * phi_val,
        cluster_index=idx,
    )


def _decode_full(req: DecodeRequest, cfg: UsdConfig) -> tuple[RankedList, ClusterSet]:
    validate_request(req)
    k = cfg.k_candidates

    pass1 = sample_candidates(
        req.candidates, cfg.base_temperature, k, request_rng(cfg, req.request_id, 1)
    )
    h_pass1 = estimate(pass1, cfg).entropy

    temperature = adaptive_temperature(cfg.base_temperature, cfg.gamma, h_pass1)
    pass2 = sample_candidates(
        req.candidates, temperature, k, request_rng(cfg, req.request_id, 2)
    )
    clusters = estimate(pass2, cfg)

    scored = [score(item, clusters, cfg) for item in pass2]
    scored.sort(key=lambda s: (-s.score, s.id))
    ranked = RankedList(
        request_id=req.request_id,
        items=tuple(scored),
        effective_temperature=temperature,
    )
    return ranked, clusters


def decode(req: DecodeRequest, cfg: UsdConfig) -> RankedList:
    """Run the full two-pass sample / estimate / adapt / score pipeline."""
    return _decode_full(req, cfg)[0]


def decode_record(req: DecodeRequest, cfg: UsdConfig) -> dict[str, object]:
    """Decode and flatten into the per-request JSONL output record."""
    ranked, clusters = _decode_full(req, cfg)
    return {
        "request_id": req.request_id,
        "effective_temperature": ranked.effective_temperature,
        "entropy": clusters.entropy,
        "clusters": [[m.id for m in c.members] for c in clusters.clusters],
        "ranking": [
            {
                "id": s.id,
                "score": s.score,
                "base_prob": s.base_prob,
                "phi": s.phi,
                "cluster_index": s.cluster_index,
            }
            for s in ranked.items
        ],
    }
