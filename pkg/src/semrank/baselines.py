"""Comparison decoders: greedy, beam, nucleus, best-of-N, self-consistency.

All strategies emit RankedLists under the same tie rule (item id
ascending) so they are directly comparable with the semantic decoder.
Stochastic strategies derive their randomness the same way the decoder
does, keeping every run reproducible per request.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np

from . import decoder
from .model import (
    DecodeRequest,
    RankedList,
    ScoredItem,
    UsdConfig,
    ValidationError,
    validate_request,
)
from .uncertainty import renormalize

if TYPE_CHECKING:
    from .synth import TokenFactoredModel

STRATEGY_KINDS = ("greedy", "beam", "nucleus", "best_of_n", "self_consistency", "usd")


@dataclass(frozen=True)
class StrategySpec:
    """Which decoder to run and its strategy-specific knobs."""

    kind: str
    width_or_n: int = 10
    top_p: float = 0.9

    def __post_init__(self) -> None:
        if self.kind not in STRATEGY_KINDS:
            raise ValidationError(f"unknown strategy {self.kind!r}")
        if self.width_or_n < 1:
            raise ValidationError(f"width_or_n must be >= 1: {self.width_or_n}")
        if not 0.0 < self.top_p <= 1.0:
            raise ValidationError(f"top_p out of (0,1]: {self.top_p}")


def _plain_ranking(
    request_id: str, scored: list[tuple[str, float, float]], k: int
) -> RankedList:
    # scored: (id, sort value, renormalized prob); sort desc, id asc tie-break
    scored.sort(key=lambda t: (-t[1], t[0]))
    items = tuple(
        ScoredItem(id=i, base_prob=p, phi=0.0, score=v, cluster_index=0)
        for i, v, p in scored[:k]
    )
    return RankedList(request_id=request_id, items=items, effective_temperature=1.0)


def greedy_rank(req: DecodeRequest, k: int) -> RankedList:
    """Top-k candidates by probability, the argsort everyone compares against."""
    validate_request(req)
    normalized = renormalize(req.candidates)
    return _plain_ranking(
        req.request_id, [(c.id, c.prob, c.prob) for c in normalized], k
    )


def nucleus_rank(
    req: DecodeRequest, top_p: float, k: int, rng: np.random.Generator
) -> RankedList:
    """Sample k items from the smallest prefix holding top_p of the mass."""
    validate_request(req)
    if not 0.0 < top_p <= 1.0:
        raise ValidationError(f"top_p out of (0,1]: {top_p}")
    normalized = sorted(renormalize(req.candidates), key=lambda c: (-c.prob, c.id))
    prefix = []
    cum = 0.0
    for cand in normalized:
        prefix.append(cand)
        cum += cand.prob
        if cum >= top_p - 1e-12:
            break
    total = sum(c.prob for c in prefix)
    probs = np.array([c.prob / total for c in prefix])
    take = min(k, len(prefix))
    idx = rng.choice(len(prefix), size=take, replace=False, p=probs)
    chosen = [prefix[i] for i in idx]
    return _plain_ranking(req.request_id, [(c.id, c.prob, c.prob) for c in chosen], k)


def _tempered_probs(probs: list[float], temperature: float) -> np.ndarray:
    logw = np.log(np.asarray(probs)) / temperature
    logw -= logw.max()
    w = np.exp(logw)
    return w / w.sum()


def best_of_n_rank(
    req: DecodeRequest,
    n: int,
    k: int,
    rng: np.random.Generator,
    temperature: float = 0.95,
) -> RankedList:
    """Draw n tempered samples with replacement; rank the distinct hits by prob."""
    validate_request(req)
    normalized = renormalize(req.candidates)
    probs = _tempered_probs([c.prob for c in normalized], temperature)
    draws = rng.choice(len(normalized), size=n, replace=True, p=probs)
    seen_ids = {normalized[i].id for i in draws}
    scored = [(c.id, c.prob, c.prob) for c in normalized if c.id in seen_ids]
    return _plain_ranking(req.request_id, scored, k)


def self_consistency_rank(
    req: DecodeRequest,
    n: int,
    k: int,
    rng: np.random.Generator,
    temperature: float = 0.95,
) -> RankedList:
    """Draw n tempered samples; rank by empirical frequency, then prob, then id."""
    validate_request(req)
    normalized = renormalize(req.candidates)
    probs = _tempered_probs([c.prob for c in normalized], temperature)
    draws = rng.choice(len(normalized), size=n, replace=True, p=probs)
    counts: dict[int, int] = {}
    for i in draws:
        counts[int(i)] = counts.get(int(i), 0) + 1
    entries = [
        (normalized[i].id, normalized[i].prob, c) for i, c in counts.items()
    ]
    entries.sort(key=lambda t: (-t[2], -t[1], t[0]))
    items = tuple(
        ScoredItem(id=i, base_prob=p, phi=0.0, score=float(c), cluster_index=0)
        for i, p, c in entries[:k]
    )
    return RankedList(request_id=req.request_id, items=items, effective_temperature=1.0)


def beam_rank(
    token_model: "TokenFactoredModel",
    width: int,
    k: int,
    request_id: str = "beam",
) -> tuple[RankedList, int]:
    """Width-limited beam over the token-factored catalog model.

    Returns the ranking of completed catalog items by accumulated
    log-probability plus a count of beams whose token sequence maps to no
    catalog item.
    """
    if width < 1:
        raise ValidationError(f"beam width must be >= 1: {width}")
    beams: list[tuple[tuple[int, ...], float]] = [((), 0.0)]
    for _ in range(token_model.seq_len):
        expanded: list[tuple[tuple[int, ...], float]] = []
        for prefix, logp in beams:
            dist = token_model.conditional(prefix)
            for tok, p in enumerate(dist):
                if p > 0.0:
                    expanded.append((prefix + (tok,), logp + math.log(p)))
        expanded.sort(key=lambda t: (-t[1], t[0]))
        beams = expanded[:width]

    dropped = 0
    scored: list[tuple[str, float, float]] = []
    for seq, logp in beams:
        item_id = token_model.item_for_sequence(seq)
        if item_id is None:
            dropped += 1
            continue
        scored.append((item_id, logp, math.exp(logp)))
    scored.sort(key=lambda t: (-t[1], t[0]))
    items = tuple(
        ScoredItem(id=i, base_prob=p, phi=0.0, score=lp, cluster_index=0)
        for i, lp, p in scored[:k]
    )
    ranked = RankedList(request_id=request_id, items=items, effective_temperature=1.0)
    return ranked, dropped


def rank_request(req: DecodeRequest, cfg: UsdConfig, spec: StrategySpec) -> RankedList:
    """Dispatch one request to the named strategy under a shared config."""
    k = cfg.k_candidates
    if spec.kind == "usd":
        return decoder.decode(req, cfg)
    if spec.kind == "greedy":
        return greedy_rank(req, k)
    rng = decoder.request_rng(cfg, req.request_id)
    if spec.kind == "nucleus":
        return nucleus_rank(req, spec.top_p, k, rng)
    if spec.kind == "best_of_n":
        return best_of_n_rank(req, spec.width_or_n, k, rng, cfg.base_temperature)
    if spec.kind == "self_consistency":
        return self_consistency_rank(req, spec.width_or_n, k, rng, cfg.base_temperature)
    raise ValidationError(
        f"strategy {spec.kind!r} needs a token-factored model; see beam_rank"
    )
