"""Seeded synthetic corpora with known semantic group structure.

The generator builds an item catalog whose logit vectors have controlled
within-group and between-group cosine similarity, Markov-driven user
histories, and candidate dumps engineered into named probability regimes:

- "strong": the true group's per-member mass exceeds every distractor
  probability, but the single most probable item is a non-true group
  member, so probability-argsort decoding misses while cluster-mass
  scoring recovers the group.
- "weak": the true group's total mass beats the top distractor but its
  per-member share does not; emitted to document where the per-member
  division does not flip the ranking.
- "mixed": alternating requests that need cluster evidence and requests
  that need raw probability, so blended scoring beats either extreme.

Also provides the toy token-factored catalog model that beam search runs
against.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .model import CandidateItem, DecodeRequest, ValidationError


class SynthConstraintError(ValidationError):
    """Raised when the similarity constraints cannot be satisfied."""


@dataclass(frozen=True)
class SynthSpec:
    """Parameters of one synthetic corpus, seed included."""

    n_users: int = 100
    n_items: int = 96
    n_groups: int = 12
    logit_dim: int = 32
    intra_group_sim_target: float = 0.9
    inter_group_sim_cap: float = 0.3
    markov_concentration: float = 8.0
    seq_len: int = 8
    seed: int = 0

    def __post_init__(self) -> None:
        if min(self.n_users, self.n_items, self.n_groups, self.logit_dim) < 1:
            raise ValidationError("spec counts must be positive")
        if self.n_groups > self.n_items:
            raise ValidationError("n_groups must not exceed n_items")
        if not self.intra_group_sim_target > self.inter_group_sim_cap:
            raise ValidationError(
                "intra_group_sim_target must exceed inter_group_sim_cap"
            )
        if self.markov_concentration <= 0:
            raise ValidationError("markov_concentration must be > 0")
        if self.seq_len < 3:
            raise ValidationError("seq_len must be >= 3 for leave-one-out")

    def to_dict(self) -> dict[str, object]:
        return {
            "n_users": self.n_users,
            "n_items": self.n_items,
            "n_groups": self.n_groups,
            "logit_dim": self.logit_dim,
            "intra_group_sim_target": self.intra_group_sim_target,
            "inter_group_sim_cap": self.inter_group_sim_cap,
            "markov_concentration": self.markov_concentration,
            "seq_len": self.seq_len,
            "seed": self.seed,
        }


@dataclass(frozen=True)
class CatalogItem:
    id: str
    group: int
    logits: tuple[float, ...]


@dataclass(frozen=True)
class Catalog:
    items: tuple[CatalogItem, ...]

    def by_group(self) -> dict[int, list[CatalogItem]]:
        groups: dict[int, list[CatalogItem]] = {}
        for item in self.items:
            groups.setdefault(item.group, []).append(item)
        return groups

    def by_id(self) -> dict[str, CatalogItem]:
        return {item.id: item for item in self.items}


_MAX_REDRAWS = 200


def generate_catalog(spec: SynthSpec) -> Catalog:
    """Draw group centroids and per-item perturbations, then verify all pairs.

    Centroids are orthonormalized (requires logit_dim >= n_groups); items
    violating either similarity bound are redrawn a bounded number of
    times before the constraints are declared unsatisfiable.
    """
    if spec.logit_dim < spec.n_groups:
        raise SynthConstraintError(
            f"logit_dim {spec.logit_dim} < n_groups {spec.n_groups}: "
            "near-orthogonal centroids are unattainable"
        )
    rng = np.random.default_rng(spec.seed)
    gauss = rng.standard_normal((spec.logit_dim, spec.n_groups))
    centroids, _ = np.linalg.qr(gauss)
    centroids = centroids.T  # one orthonormal centroid per group

    # noise scale targeting pairwise within-group cosine halfway above the floor
    mid = (spec.intra_group_sim_target + 1.0) / 2.0
    eps = math.sqrt(max(1.0 / mid - 1.0, 1e-6) / spec.logit_dim)

    groups = [i % spec.n_groups for i in range(spec.n_items)]
    width = max(4, len(str(spec.n_items - 1)))

    def draw(group: int) -> np.ndarray:
        vec = centroids[group] + eps * rng.standard_normal(spec.logit_dim)
        return vec / np.linalg.norm(vec)

    vectors = np.stack([draw(g) for g in groups])
    for _ in range(_MAX_REDRAWS):
        sims = vectors @ vectors.T
        bad: set[int] = set()
        for i in range(spec.n_items):
            for j in range(i + 1, spec.n_items):
                if groups[i] == groups[j]:
                    if sims[i, j] < spec.intra_group_sim_target:
                        bad.add(j)
                elif sims[i, j] > spec.inter_group_sim_cap:
                    bad.add(j)
        if not bad:
            break
        for j in sorted(bad):
            vectors[j] = draw(groups[j])
    else:
        raise SynthConstraintError(
            "similarity constraints unsatisfiable after bounded redraws "
            f"(dim={spec.logit_dim}, groups={spec.n_groups})"
        )

    items = tuple(
        CatalogItem(
            id=f"item-{i:0{width}d}",
            group=groups[i],
            logits=tuple(float(v) for v in vectors[i]),
        )
        for i in range(spec.n_items)
    )
    return Catalog(items=items)


def _transition_row(group: int, n_groups: int, concentration: float) -> np.ndarray:
    # one preferred successor per group; concentration sharpens the row
    weights = np.ones(n_groups)
    weights[(group + 1) % n_groups] = max(concentration, 1.0 + 1e-9)
    return weights / weights.sum()


def argmax_next_group(group: int, n_groups: int) -> int:
    return (group + 1) % n_groups


def generate_interactions(catalog: Catalog, spec: SynthSpec) -> dict[str, list[str]]:
    """Emit per-user item sequences from a group-level Markov chain.

    The final item of every sequence is drawn from the chain's argmax
    successor group, so the held-out truth is recoverable by group-mass
    reasoning.
    """
    rng = np.random.default_rng(spec.seed + 1)
    by_group = catalog.by_group()
    n_groups = spec.n_groups
    sequences: dict[str, list[str]] = {}
    width = max(4, len(str(spec.n_users - 1)))
    for u in range(spec.n_users):
        group = int(rng.integers(n_groups))
        items: list[str] = []
        for _ in range(spec.seq_len - 1):
            members = by_group[group]
            items.append(members[int(rng.integers(len(members)))].id)
            row = _transition_row(group, n_groups, spec.markov_concentration)
            group = int(rng.choice(n_groups, p=row))
        # held-out truth comes from the deterministic argmax successor
        prev_group = catalog.by_id()[items[-1]].group
        truth_group = argmax_next_group(prev_group, n_groups)
        members = by_group[truth_group]
        items.append(members[int(rng.integers(len(members)))].id)
        sequences[f"user-{u:0{width}d}"] = items
    return sequences


def _candidate(item: CatalogItem, prob: float) -> CandidateItem:
    return CandidateItem(id=item.id, logits=item.logits, prob=prob)


def _pick_distinct_groups(
    exclude: set[int], n_groups: int, count: int, rng: np.random.Generator
) -> list[int]:
    pool = [g for g in range(n_groups) if g not in exclude]
    if len(pool) < count:
        raise SynthConstraintError("not enough groups for distractor construction")
    idx = rng.choice(len(pool), size=count, replace=False)
    return [pool[i] for i in idx]


def _strong_request(
    req_id: str,
    history: list[str],
    truth: CatalogItem,
    catalog: Catalog,
    rng: np.random.Generator,
) -> DecodeRequest:
    by_group = catalog.by_group()
    co = [m for m in by_group[truth.group] if m.id != truth.id]
    # prefer greater-id co-members so the truth wins the in-cluster id tie
    greater = sorted([m for m in co if m.id > truth.id], key=lambda m: m.id)
    smaller = sorted([m for m in co if m.id < truth.id], key=lambda m: m.id)
    members = (greater + smaller)[:2]
    if len(members) < 2:
        raise SynthConstraintError("strong regime needs groups of >= 3 items")
    d_groups = _pick_distinct_groups(
        {truth.group}, max(g for g in by_group) + 1, 3, rng
    )
    distractors = [by_group[g][int(rng.integers(len(by_group[g])))] for g in d_groups]
    # mass/|c| = 0.24 beats the 0.16 top distractor; greedy's argmax (0.30)
    # is a non-true member, so probability order alone misses the truth
    candidates = [
        _candidate(members[0], 0.30),
        _candidate(truth, 0.24),
        _candidate(members[1], 0.18),
        _candidate(distractors[0], 0.16),
        _candidate(distractors[1], 0.12),
        _candidate(distractors[2], 0.08),
    ]
    return DecodeRequest(
        request_id=req_id,
        history=tuple(history),
        candidates=tuple(candidates),
        ground_truth=truth.id,
    )


def _weak_request(
    req_id: str,
    history: list[str],
    truth: CatalogItem,
    catalog: Catalog,
    rng: np.random.Generator,
) -> DecodeRequest:
    by_group = catalog.by_group()
    co = sorted(
        [m for m in by_group[truth.group] if m.id != truth.id], key=lambda m: m.id
    )[:2]
    if len(co) < 2:
        raise SynthConstraintError("weak regime needs groups of >= 3 items")
    d_groups = _pick_distinct_groups(
        {truth.group}, max(g for g in by_group) + 1, 3, rng
    )
    distractors = [by_group[g][int(rng.integers(len(by_group[g])))] for g in d_groups]
    # group mass 0.54 beats the 0.25 distractor, per-member share 0.18 does not
    candidates = [
        _candidate(truth, 0.18),
        _candidate(co[0], 0.18),
        _candidate(co[1], 0.18),
        _candidate(distractors[0], 0.25),
        _candidate(distractors[1], 0.10),
        _candidate(distractors[2], 0.05),
    ]
    return DecodeRequest(
        request_id=req_id,
        history=tuple(history),
        candidates=tuple(candidates),
        ground_truth=truth.id,
    )


def _mixed_request(
    req_id: str,
    history: list[str],
    truth: CatalogItem,
    catalog: Catalog,
    rng: np.random.Generator,
    needs_cluster: bool,
) -> DecodeRequest:
    by_group = catalog.by_group()
    n_groups = max(g for g in by_group) + 1
    if needs_cluster:
        # truth is a singleton with solid mass; a rival pair holds the top
        # individual probability but a diluted per-member share
        pair_group = _pick_distinct_groups({truth.group}, n_groups, 1, rng)[0]
        pair = sorted(by_group[pair_group], key=lambda m: m.id)[:2]
        filler_groups = _pick_distinct_groups({truth.group, pair_group}, n_groups, 2, rng)
        fillers = [by_group[g][0] for g in filler_groups]
        candidates = [
            _candidate(truth, 0.30),
            _candidate(pair[0], 0.34),
            _candidate(pair[1], 0.02),
            _candidate(fillers[0], 0.04),
            _candidate(fillers[1], 0.03),
        ]
    else:
        # truth holds the top probability but sits in a pair whose per-member
        # share loses to a singleton decoy under pure cluster scoring
        co = sorted(
            [m for m in by_group[truth.group] if m.id != truth.id], key=lambda m: m.id
        )
        if not co:
            raise SynthConstraintError("mixed regime needs groups of >= 2 items")
        decoy_group = _pick_distinct_groups({truth.group}, n_groups, 1, rng)[0]
        decoy = by_group[decoy_group][0]
        filler_group = _pick_distinct_groups({truth.group, decoy_group}, n_groups, 1, rng)[0]
        filler = by_group[filler_group][0]
        candidates = [
            _candidate(truth, 0.40),
            _candidate(co[0], 0.02),
            _candidate(decoy, 0.30),
            _candidate(filler, 0.05),
        ]
    return DecodeRequest(
        request_id=req_id,
        history=tuple(history),
        candidates=tuple(candidates),
        ground_truth=truth.id,
    )


REGIMES = ("strong", "weak", "mixed", "natural")


def emit_candidate_dumps(
    catalog: Catalog,
    interactions: dict[str, list[str]],
    spec: SynthSpec,
    regime: str = "strong",
) -> list[DecodeRequest]:
    """Build one test DecodeRequest per user under the named regime.

    "natural" draws candidate probabilities from the group structure
    without engineering any ordering; the other regimes construct the
    documented probability patterns around each user's held-out truth.
    """
    if regime not in REGIMES:
        raise ValidationError(f"unknown regime {regime!r}")
    rng = np.random.default_rng(spec.seed + 2)
    by_id = catalog.by_id()
    requests: list[DecodeRequest] = []
    for idx, (user_id, items) in enumerate(sorted(interactions.items())):
        history = items[:-1]
        truth = by_id[items[-1]]
        req_id = f"{regime}-{user_id}"
        if regime == "strong":
            requests.append(_strong_request(req_id, history, truth, catalog, rng))
        elif regime == "weak":
            requests.append(_weak_request(req_id, history, truth, catalog, rng))
        elif regime == "mixed":
            requests.append(
                _mixed_request(req_id, history, truth, catalog, rng, idx % 2 == 0)
            )
        else:
            requests.append(_natural_request(req_id, history, truth, catalog, rng))
    return requests


def _natural_request(
    req_id: str,
    history: list[str],
    truth: CatalogItem,
    catalog: Catalog,
    rng: np.random.Generator,
) -> DecodeRequest:
    by_group = catalog.by_group()
    n_groups = max(g for g in by_group) + 1
    members = sorted(by_group[truth.group], key=lambda m: m.id)[:4]
    if truth.id not in {m.id for m in members}:
        members = [truth] + members[:3]
    d_groups = _pick_distinct_groups(
        {truth.group}, n_groups, min(3, n_groups - 1), rng
    )
    pool = members + [
        by_group[g][int(rng.integers(len(by_group[g])))] for g in d_groups
    ]
    raw = rng.dirichlet(np.ones(len(pool)) * 2.0)
    candidates = [_candidate(item, float(p)) for item, p in zip(pool, raw)]
    return DecodeRequest(
        request_id=req_id,
        history=tuple(history),
        candidates=tuple(candidates),
        ground_truth=truth.id,
    )


@dataclass(frozen=True)
class TokenFactoredModel:
    """Toy autoregressive catalog model: items are fixed-length token strings.

    Per-prefix conditional tables make genuine beam search possible at
    desk scale; item probability is the product of its step conditionals.
    """

    alphabet_size: int
    seq_len: int
    sequences: dict[str, tuple[int, ...]] = field(default_factory=dict)
    tables: dict[tuple[int, ...], tuple[float, ...]] = field(default_factory=dict)

    def __post_init__(self) -> None:
        rev: dict[tuple[int, ...], str] = {}
        for item_id, seq in self.sequences.items():
            if len(seq) != self.seq_len:
                raise ValidationError(f"sequence length mismatch for {item_id!r}")
            if seq in rev:
                raise ValidationError(f"duplicate token sequence for {item_id!r}")
            rev[seq] = item_id
        for prefix, dist in self.tables.items():
            if len(dist) != self.alphabet_size:
                raise ValidationError(f"conditional table arity mismatch at {prefix}")
            if abs(sum(dist) - 1.0) > 1e-9:
                raise ValidationError(f"conditional table at {prefix} does not sum to 1")
        object.__setattr__(self, "_reverse", rev)

    def conditional(self, prefix: tuple[int, ...]) -> tuple[float, ...]:
        return self.tables[prefix]

    def item_for_sequence(self, seq: tuple[int, ...]) -> str | None:
        return self._reverse.get(tuple(seq))  # type: ignore[attr-defined]

    def sequence_logprob(self, seq: tuple[int, ...]) -> float:
        logp = 0.0
        for t, tok in enumerate(seq):
            p = self.tables[tuple(seq[:t])][tok]
            if p <= 0.0:
                return float("-inf")
            logp += math.log(p)
        return logp

    def all_sequences(self):
        return itertools.product(range(self.alphabet_size), repeat=self.seq_len)


def build_token_model(
    item_ids: list[str], alphabet_size: int, seq_len: int, seed: int
) -> TokenFactoredModel:
    """Assign each item a distinct token string and draw Dirichlet tables."""
    total = alphabet_size**seq_len
    if len(item_ids) > total:
        raise ValidationError(
            f"{len(item_ids)} items exceed {total} available token sequences"
        )
    rng = np.random.default_rng(seed)
    all_seqs = list(itertools.product(range(alphabet_size), repeat=seq_len))
    order = rng.permutation(total)
    sequences = {
        item_id: all_seqs[order[i]] for i, item_id in enumerate(sorted(item_ids))
    }
    tables: dict[tuple[int, ...], tuple[float, ...]] = {}
    for depth in range(seq_len):
        for prefix in itertools.product(range(alphabet_size), repeat=depth):
            dist = rng.dirichlet(np.ones(alphabet_size))
            tables[prefix] = tuple(float(p) for p in dist)
    return TokenFactoredModel(
        alphabet_size=alphabet_size,
        seq_len=seq_len,
        sequences=sequences,
        tables=tables,
    )


def generate_corpus(
    spec: SynthSpec, regime: str = "strong"
) -> tuple[Catalog, dict[str, list[str]], list[DecodeRequest]]:
    """Catalog, interactions, and candidate dump for one spec + regime."""
    catalog = generate_catalog(spec)
    interactions = generate_interactions(catalog, spec)
    requests = emit_candidate_dumps(catalog, interactions, spec, regime)
    return catalog, interactions, requests
