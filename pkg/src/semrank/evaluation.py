"""Leave-one-out evaluation: splits, top-K metrics, and aggregation."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

from .baselines import StrategySpec, rank_request
from .model import DecodeRequest, RankedList, UsdConfig, ValidationError


@dataclass(frozen=True)
class HeldOutSequence:
    """One user's truncated history with its held-out target item."""

    user_id: str
    history: tuple[str, ...]
    truth: str


@dataclass(frozen=True)
class LeaveOneOutSplit:
    train: tuple[tuple[str, tuple[str, ...]], ...]
    validation: tuple[HeldOutSequence, ...]
    test: tuple[HeldOutSequence, ...]
    n_excluded: int


def leave_one_out_split(sequences: Mapping[str, Sequence[str]]) -> LeaveOneOutSplit:
    """Last interaction becomes test truth, second-to-last validation truth.

    Sequences shorter than 3 cannot supply both held-out items and are
    excluded (counted, not fatal).
    """
    train = []
    validation = []
    test = []
    excluded = 0
    for user_id, items in sequences.items():
        items = tuple(items)
        if len(items) < 3:
            excluded += 1
            continue
        train.append((user_id, items[:-2]))
        validation.append(HeldOutSequence(user_id, items[:-2], items[-2]))
        test.append(HeldOutSequence(user_id, items[:-1], items[-1]))
    return LeaveOneOutSplit(
        train=tuple(train),
        validation=tuple(validation),
        test=tuple(test),
        n_excluded=excluded,
    )


def _rank_of(ranking: RankedList, truth: str) -> int | None:
    for pos, item in enumerate(ranking.items, start=1):
        if item.id == truth:
            return pos
    return None


def hit_rate_at_k(ranking: RankedList, truth: str, k: int) -> float:
    rank = _rank_of(ranking, truth)
    return 1.0 if rank is not None and rank <= k else 0.0


def ndcg_at_k(ranking: RankedList, truth: str, k: int) -> float:
    # single relevant item, so the ideal DCG is 1 and NDCG = 1/log2(rank+1)
    rank = _rank_of(ranking, truth)
    if rank is None or rank > k:
        return 0.0
    return 1.0 / math.log2(rank + 1)


def mrr_at_k(ranking: RankedList, truth: str, k: int) -> float:
    rank = _rank_of(ranking, truth)
    if rank is None or rank > k:
        return 0.0
    return 1.0 / rank


@dataclass(frozen=True)
class EvalReport:
    """Averaged HR/NDCG/MRR per cutoff for one strategy."""

    strategy: str
    per_k: dict[int, dict[str, float]]
    n_requests: int

    def to_dict(self) -> dict[str, object]:
        return {
            "strategy": self.strategy,
            "n_requests": self.n_requests,
            "per_k": {str(k): dict(v) for k, v in self.per_k.items()},
        }


def evaluate_rankings(
    rankings: Sequence[RankedList],
    truths: Sequence[str],
    ks: Sequence[int] = (3, 5),
    strategy: str = "",
) -> EvalReport:
    """Average the three metrics over (ranking, truth) pairs at each cutoff."""
    if len(rankings) != len(truths):
        raise ValidationError("rankings and truths must align")
    n = len(rankings)
    if n == 0:
        raise ValidationError("cannot evaluate zero requests")
    per_k: dict[int, dict[str, float]] = {}
    for k in ks:
        hr = ndcg = mrr = 0.0
        for ranking, truth in zip(rankings, truths):
            hr += hit_rate_at_k(ranking, truth, k)
            ndcg += ndcg_at_k(ranking, truth, k)
            mrr += mrr_at_k(ranking, truth, k)
        per_k[int(k)] = {"hr": hr / n, "ndcg": ndcg / n, "mrr": mrr / n}
    return EvalReport(strategy=strategy, per_k=per_k, n_requests=n)


def evaluate(
    requests: Sequence[DecodeRequest],
    spec: StrategySpec,
    cfg: UsdConfig,
    ks: Sequence[int] = (3, 5),
    rank_fn: Callable[[DecodeRequest, UsdConfig, StrategySpec], RankedList] | None = None,
) -> EvalReport:
    """Decode every request with one strategy and aggregate the metrics."""
    for req in requests:
        if req.ground_truth is None:
            raise ValidationError(f"request {req.request_id!r} has no ground_truth")
    rank = rank_fn or rank_request
    rankings = [rank(req, cfg, spec) for req in requests]
    truths = [req.ground_truth for req in requests]
    return evaluate_rankings(rankings, truths, ks=ks, strategy=spec.kind)  # type: ignore[arg-type]


def report_table(reports: Sequence[EvalReport]) -> str:
    """Aligned plain-text table, one strategy per row, metrics per cutoff."""
    if not reports:
        return ""
    ks = sorted(reports[0].per_k)
    headers = ["strategy"] + [f"{m}@{k}" for k in ks for m in ("hr", "ndcg", "mrr")]
    rows = [headers]
    for rep in reports:
        row = [rep.strategy]
        for k in ks:
            cell = rep.per_k[k]
            row += [f"{cell['hr']:.4f}", f"{cell['ndcg']:.4f}", f"{cell['mrr']:.4f}"]
        rows.append(row)
    widths = [max(len(r[i]) for r in rows) for i in range(len(headers))]
    lines = [
        "  ".join(cell.ljust(widths[i]) for i, cell in enumerate(row)) for row in rows
    ]
    return "\n".join(lines) + "\n"
