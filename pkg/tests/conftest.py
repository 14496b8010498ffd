from __future__ import annotations

import numpy as np
import pytest

from semrank.model import CandidateItem, DecodeRequest


def make_candidate(item_id: str, logits, prob: float) -> CandidateItem:
    return CandidateItem(id=item_id, logits=tuple(float(v) for v in logits), prob=prob)


def random_request(
    rng: np.random.Generator,
    n: int,
    dim: int = 6,
    request_id: str = "req",
) -> DecodeRequest:
    """A valid request with random logits and positive probs."""
    cands = []
    probs = rng.dirichlet(np.ones(n))
    for i in range(n):
        logits = rng.standard_normal(dim)
        cands.append(make_candidate(f"i{i:03d}", logits, float(probs[i]) or 1e-9))
    return DecodeRequest(request_id=request_id, history=("h0",), candidates=tuple(cands))


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(1234)
