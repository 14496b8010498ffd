"""Shared domain types, configuration, and validation.

No algorithms live here: just the data model that the clustering,
uncertainty, decoding, and evaluation modules agree on.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, fields, replace


class ValidationError(ValueError):
    """Raised when input data violates a documented invariant."""


class ConfigError(ValidationError):
    """Raised when a configuration value is out of range or unknown."""


class InternalError(RuntimeError):
    """Raised when an internal consistency check fails."""


@dataclass(frozen=True)
class CandidateItem:
    """One next-item hypothesis: identifier, logit vector, model probability."""

    id: str
    logits: tuple[float, ...]
    prob: float

    @property
    def dim(self) -> int:
        return len(self.logits)


@dataclass(frozen=True)
class DecodeRequest:
    """A user history plus its candidate set; the unit of decoding work."""

    request_id: str
    history: tuple[str, ...]
    candidates: tuple[CandidateItem, ...]
    ground_truth: str | None = None


@dataclass(frozen=True)
class SemanticCluster:
    """A group of candidates judged interchangeable, with aggregated mass."""

    members: tuple[CandidateItem, ...]
    mass: float

    @property
    def size(self) -> int:
        return len(self.members)


@dataclass(frozen=True)
class ClusterSet:
    """A partition of one candidate set into semantic clusters plus its entropy."""

    clusters: tuple[SemanticCluster, ...]
    entropy: float

    def cluster_index_of(self, item_id: str) -> int:
        for i, cluster in enumerate(self.clusters):
            if any(m.id == item_id for m in cluster.members):
                return i
        raise InternalError(f"item {item_id!r} not found in any cluster")


@dataclass(frozen=True)
class ScoredItem:
    """A candidate with its blended score components."""

    id: str
    base_prob: float
    phi: float
    score: float
    cluster_index: int


@dataclass(frozen=True)
class RankedList:
    """Scored items sorted by score descending, ties broken by id ascending."""

    request_id: str
    items: tuple[ScoredItem, ...]
    effective_temperature: float

    def item_ids(self) -> list[str]:
        return [it.id for it in self.items]


_CONFIG_DEFAULTS: dict[str, object] = {
    "sim_threshold": 0.8,
    "alpha": 0.5,
    "beta": 0.3,
    "gamma": 0.5,
    "base_temperature": 0.95,
    "k_candidates": 10,
    "entropy_log_base": "natural",
    "entropy_normalization": "none",
    "enable_clustering": True,
    "enable_uncertainty": True,
    "seed": 0,
}


@dataclass(frozen=True)
class UsdConfig:
    """All decoder hyperparameters, range-checked at load time."""

    sim_threshold: float = 0.8
    alpha: float = 0.5
    beta: float = 0.3
    gamma: float = 0.5
    base_temperature: float = 0.95
    k_candidates: int = 10
    entropy_log_base: str = "natural"
    entropy_normalization: str = "none"
    enable_clustering: bool = True
    enable_uncertainty: bool = True
    seed: int = 0

    def to_dict(self) -> dict[str, object]:
        return {f.name: getattr(self, f.name) for f in fields(self)}

    def with_overrides(self, **kwargs: object) -> "UsdConfig":
        return validate_config({**self.to_dict(), **kwargs})


def _as_float(name: str, value: object) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float, str)):
        raise ConfigError(f"{name}: expected a number, got {value!r}")
    try:
        out = float(value)
    except ValueError:
        raise ConfigError(f"{name}: expected a number, got {value!r}") from None
    if not math.isfinite(out):
        raise ConfigError(f"{name}: must be finite, got {value!r}")
    return out


def _as_int(name: str, value: object) -> int:
    if isinstance(value, bool):
        raise ConfigError(f"{name}: expected an integer, got {value!r}")
    if isinstance(value, str):
        try:
            value = int(value)
        except ValueError:
            raise ConfigError(f"{name}: expected an integer, got {value!r}") from None
    if isinstance(value, float):
        if not value.is_integer():
            raise ConfigError(f"{name}: expected an integer, got {value!r}")
        value = int(value)
    if not isinstance(value, int):
        raise ConfigError(f"{name}: expected an integer, got {value!r}")
    return value


def _as_bool(name: str, value: object) -> bool:
    if isinstance(value, bool):
        return value
    if isinstance(value, str):
        lowered = value.strip().lower()
        if lowered in ("true", "1", "yes", "on"):
            return True
        if lowered in ("false", "0", "no", "off"):
            return False
    raise ConfigError(f"{name}: expected a boolean, got {value!r}")


def validate_config(raw: dict[str, object] | None = None) -> UsdConfig:
    """Build a config from a key-value map, applying defaults and range checks.

    Unknown keys are rejected by name; out-of-range values raise a
    ConfigError naming the offending field.
    """
    raw = dict(raw or {})
    unknown = sorted(set(raw) - set(_CONFIG_DEFAULTS))
    if unknown:
        raise ConfigError(f"unknown config key(s): {', '.join(unknown)}")
    merged = {**_CONFIG_DEFAULTS, **raw}

    sim_threshold = _as_float("sim_threshold", merged["sim_threshold"])
    if not 0.0 <= sim_threshold <= 1.0:
        raise ConfigError(f"sim_threshold out of [0,1]: {sim_threshold}")
    alpha = _as_float("alpha", merged["alpha"])
    if not 0.0 <= alpha <= 1.0:
        raise ConfigError(f"alpha out of [0,1]: {alpha}")
    beta = _as_float("beta", merged["beta"])
    if not 0.0 <= beta <= 1.0:
        raise ConfigError(f"beta out of [0,1]: {beta}")
    gamma = _as_float("gamma", merged["gamma"])
    if gamma < 0.0:
        raise ConfigError(f"gamma must be >= 0: {gamma}")
    base_temperature = _as_float("base_temperature", merged["base_temperature"])
    if base_temperature <= 0.0:
        raise ConfigError(f"base_temperature must be > 0: {base_temperature}")
    k_candidates = _as_int("k_candidates", merged["k_candidates"])
    if k_candidates < 1:
        raise ConfigError(f"k_candidates must be >= 1: {k_candidates}")
    entropy_log_base = str(merged["entropy_log_base"])
    if entropy_log_base != "natural":
        raise ConfigError(
            f"entropy_log_base: only 'natural' is supported, got {entropy_log_base!r}"
        )
    entropy_normalization = str(merged["entropy_normalization"])
    if entropy_normalization not in ("none", "log_m"):
        raise ConfigError(
            "entropy_normalization must be 'none' or 'log_m', "
            f"got {entropy_normalization!r}"
        )
    enable_clustering = _as_bool("enable_clustering", merged["enable_clustering"])
    enable_uncertainty = _as_bool("enable_uncertainty", merged["enable_uncertainty"])
    seed = _as_int("seed", merged["seed"])
    if not 0 <= seed < 2**64:
        raise ConfigError(f"seed out of 64-bit unsigned range: {seed}")

    return UsdConfig(
        sim_threshold=sim_threshold,
        alpha=alpha,
        beta=beta,
        gamma=gamma,
        base_temperature=base_temperature,
        k_candidates=k_candidates,
        entropy_log_base=entropy_log_base,
        entropy_normalization=entropy_normalization,
        enable_clustering=enable_clustering,
        enable_uncertainty=enable_uncertainty,
        seed=seed,
    )


def validate_request(req: DecodeRequest) -> DecodeRequest:
    """Check every DecodeRequest invariant; return the request unchanged.

    Each failure mode carries a distinct diagnostic so batch tooling can
    report exactly what is wrong with a line.
    """
    if not req.candidates:
        raise ValidationError(f"request {req.request_id!r}: empty candidates")
    dims = {c.dim for c in req.candidates}
    if len(dims) != 1:
        raise ValidationError(
            f"request {req.request_id!r}: inconsistent logit dimension {sorted(dims)}"
        )
    if 0 in dims:
        raise ValidationError(f"request {req.request_id!r}: empty logit vector")
    seen: set[str] = set()
    for cand in req.candidates:
        if not cand.id:
            raise ValidationError(f"request {req.request_id!r}: empty item id")
        if cand.id in seen:
            raise ValidationError(
                f"request {req.request_id!r}: duplicate item id {cand.id!r}"
            )
        seen.add(cand.id)
        if any(not math.isfinite(v) for v in cand.logits):
            raise ValidationError(
                f"request {req.request_id!r}: non-finite logit entry in {cand.id!r}"
            )
        if all(v == 0.0 for v in cand.logits):
            raise ValidationError(
                f"request {req.request_id!r}: zero-norm logit vector in {cand.id!r}"
            )
        if not math.isfinite(cand.prob) or not 0.0 < cand.prob <= 1.0:
            raise ValidationError(
                f"request {req.request_id!r}: prob of {cand.id!r} must be in (0,1], "
                f"got {cand.prob}"
            )
    return req


def candidate_from_dict(obj: dict[str, object]) -> CandidateItem:
    return CandidateItem(
        id=str(obj["id"]),
        logits=tuple(float(v) for v in obj["logits"]),  # type: ignore[union-attr]
        prob=float(obj["prob"]),  # type: ignore[arg-type]
    )


def request_from_dict(obj: dict[str, object]) -> DecodeRequest:
    """Parse one wire-format record into a DecodeRequest (unvalidated)."""
    try:
        return DecodeRequest(
            request_id=str(obj["request_id"]),
            history=tuple(str(h) for h in obj.get("history", [])),  # type: ignore[union-attr]
            candidates=tuple(
                candidate_from_dict(c) for c in obj["candidates"]  # type: ignore[union-attr]
            ),
            ground_truth=(
                str(obj["ground_truth"]) if obj.get("ground_truth") is not None else None
            ),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ValidationError(f"malformed request record: {exc}") from exc


def request_to_dict(req: DecodeRequest) -> dict[str, object]:
    out: dict[str, object] = {
        "request_id": req.request_id,
        "history": list(req.history),
        "candidates": [
            {"id": c.id, "logits": list(c.logits), "prob": c.prob}
            for c in req.candidates
        ],
    }
    if req.ground_truth is not None:
        out["ground_truth"] = req.ground_truth
    return out
