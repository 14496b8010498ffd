"""In-process adapter for serving code: plain dicts and lists in, plain
dicts and lists out.

The adapter converts native records at the boundary and delegates every
computation to the core engine, so there is exactly one source of
numerical truth. Core diagnostics surface unchanged as exceptions.
"""

from __future__ import annotations

from typing import Mapping, Sequence

from semrank import decoder as _decoder
from semrank import uncertainty as _uncertainty
from semrank.model import (
    DecodeRequest,
    UsdConfig,
    ValidationError,
    request_from_dict,
    validate_config,
    validate_request,
)

__version__ = "0.1.0"

__all__ = ["cluster", "decode", "entropy", "ValidationError"]


def _to_request(request: Mapping[str, object]) -> DecodeRequest:
    return validate_request(request_from_dict(dict(request)))


def _to_config(config: Mapping[str, object] | None) -> UsdConfig:
    return validate_config(dict(config) if config else {})


def _candidates_only(candidates: Sequence[Mapping[str, object]]) -> DecodeRequest:
    return _to_request(
        {"request_id": "bound", "history": [], "candidates": list(candidates)}
    )


def decode(
    request: Mapping[str, object], config: Mapping[str, object] | None = None
) -> dict[str, object]:
    """Rank one request; returns the engine's per-request output record."""
    return _decoder.decode_record(_to_request(request), _to_config(config))


def cluster(
    candidates: Sequence[Mapping[str, object]],
    config: Mapping[str, object] | None = None,
) -> list[list[str]]:
    """Group candidate records into semantic clusters of item ids."""
    req = _candidates_only(candidates)
    cs = _uncertainty.estimate(req.candidates, _to_config(config))
    return [[m.id for m in c.members] for c in cs.clusters]


def entropy(
    candidates: Sequence[Mapping[str, object]],
    config: Mapping[str, object] | None = None,
) -> float:
    """Semantic entropy of one candidate pool's cluster-mass distribution."""
    req = _candidates_only(candidates)
    return _uncertainty.estimate(req.candidates, _to_config(config)).entropy
