"""Command-line surface: decode, eval, compare, sweep, synth.

Exit codes: 0 success, 1 usage error, 2 data validation error,
3 internal invariant violation.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from . import __version__, baselines, decoder, evaluation, jsonlio, synth
from .clustering import similarity_matrix
from .model import (
    DecodeRequest,
    InternalError,
    UsdConfig,
    ValidationError,
    validate_config,
)

SEED_ENV_VAR = "SEMRANK_SEED"

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_INTERNAL = 3

CLI_STRATEGIES = ("usd", "greedy", "nucleus", "best_of_n", "self_consistency")


def load_config(args: argparse.Namespace) -> UsdConfig:
    raw: dict[str, object] = {}
    env_seed = os.environ.get(SEED_ENV_VAR)
    if env_seed is not None:
        raw["seed"] = env_seed
    if getattr(args, "config", None):
        raw.update(jsonlio.parse_config_file(args.config))
    if getattr(args, "seed", None) is not None:
        raw["seed"] = args.seed
    return validate_config(raw)


def strategy_spec(name: str, args: argparse.Namespace) -> baselines.StrategySpec:
    if name not in CLI_STRATEGIES:
        raise ValidationError(
            f"unknown strategy {name!r}; choose from {', '.join(CLI_STRATEGIES)}"
        )
    width_or_n = getattr(args, "n", None) or getattr(args, "beam_width", None) or 10
    top_p = getattr(args, "top_p", None) or 0.9
    return baselines.StrategySpec(kind=name, width_or_n=width_or_n, top_p=top_p)


def write_manifest(
    out_dir: Path,
    command: str,
    cfg: UsdConfig,
    inputs: list[str | Path],
    started: float,
    extra: dict[str, object] | None = None,
) -> None:
    manifest: dict[str, object] = {
        "command": command,
        "config": cfg.to_dict(),
        "input_digests": {str(p): jsonlio.file_digest(p) for p in inputs},
        "seed": cfg.seed,
        "tool_version": __version__,
        "started_at": started,
        "finished_at": time.time(),
    }
    if extra:
        manifest.update(extra)
    jsonlio.write_json(out_dir / "manifest.json", manifest)


def _parallel_map(fn, items, jobs: int):
    if jobs <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items))


def _baseline_record(req: DecodeRequest, ranked) -> dict[str, object]:
    return {
        "request_id": req.request_id,
        "effective_temperature": ranked.effective_temperature,
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


def cmd_decode(args: argparse.Namespace) -> int:
    started = time.time()
    cfg = load_config(args)
    spec = strategy_spec(args.strategy, args)
    requests = jsonlio.load_requests(args.input)
    out_dir = Path(args.output)

    def run(req: DecodeRequest) -> dict[str, object]:
        if spec.kind == "usd":
            record = decoder.decode_record(req, cfg)
            if args.dump_similarity:
                record["similarity"] = [
                    [float(v) for v in row]
                    for row in similarity_matrix(req.candidates)
                ]
            return record
        return _baseline_record(req, baselines.rank_request(req, cfg, spec))

    records = _parallel_map(run, requests, args.jobs)
    n = jsonlio.write_jsonl(out_dir / "rankings.jsonl", records)
    write_manifest(out_dir, "decode", cfg, [args.input], started,
                   {"strategy": spec.kind, "n_requests": n})
    print(f"decoded {n} requests -> {out_dir / 'rankings.jsonl'}")
    return EXIT_OK


def _parse_ks(text: str) -> list[int]:
    try:
        ks = [int(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise ValidationError(f"invalid --k list: {text!r}") from None
    if not ks or any(k < 1 for k in ks):
        raise ValidationError(f"invalid --k list: {text!r}")
    return ks


def _evaluate_strategy(
    requests: list[DecodeRequest],
    spec: baselines.StrategySpec,
    cfg: UsdConfig,
    ks: list[int],
    jobs: int,
) -> evaluation.EvalReport:
    for req in requests:
        if req.ground_truth is None:
            raise ValidationError(f"request {req.request_id!r} has no ground_truth")
    rankings = _parallel_map(
        lambda req: baselines.rank_request(req, cfg, spec), requests, jobs
    )
    truths = [req.ground_truth for req in requests]
    return evaluation.evaluate_rankings(rankings, truths, ks=ks, strategy=spec.kind)


def cmd_eval(args: argparse.Namespace) -> int:
    started = time.time()
    cfg = load_config(args)
    spec = strategy_spec(args.strategy, args)
    ks = _parse_ks(args.k)
    requests = jsonlio.load_requests(args.input)
    report = _evaluate_strategy(requests, spec, cfg, ks, args.jobs)
    out_dir = Path(args.output)
    jsonlio.write_json(out_dir / "report.json", report.to_dict())
    jsonlio.atomic_write_text(out_dir / "report.txt", evaluation.report_table([report]))
    write_manifest(out_dir, "eval", cfg, [args.input], started,
                   {"strategy": spec.kind})
    print(evaluation.report_table([report]), end="")
    return EXIT_OK


def cmd_compare(args: argparse.Namespace) -> int:
    started = time.time()
    cfg = load_config(args)
    ks = _parse_ks(args.k)
    names = [s.strip() for s in args.strategies.split(",") if s.strip()]
    deduped: list[str] = []
    for name in names:
        if name in deduped:
            print(f"warning: duplicate strategy {name!r} ignored", file=sys.stderr)
            continue
        deduped.append(name)
    specs = [strategy_spec(name, args) for name in deduped]
    requests = jsonlio.load_requests(args.input)
    reports = [
        _evaluate_strategy(requests, spec, cfg, ks, args.jobs) for spec in specs
    ]
    out_dir = Path(args.output)
    jsonlio.write_json(out_dir / "compare.json", [r.to_dict() for r in reports])
    table = evaluation.report_table(reports)
    jsonlio.atomic_write_text(out_dir / "compare.txt", table)
    write_manifest(out_dir, "compare", cfg, [args.input], started,
                   {"strategies": deduped})
    print(table, end="")
    return EXIT_OK


SWEEPABLE = ("alpha", "beta", "sim_threshold", "gamma")


def cmd_sweep(args: argparse.Namespace) -> int:
    started = time.time()
    cfg = load_config(args)
    ks = _parse_ks(args.k)
    if args.param not in SWEEPABLE:
        raise ValidationError(
            f"unknown sweep parameter {args.param!r}; choose from {', '.join(SWEEPABLE)}"
        )
    try:
        values = [float(v) for v in args.values.split(",") if v.strip()]
    except ValueError:
        raise ValidationError(f"invalid --values list: {args.values!r}") from None
    if not values:
        raise ValidationError("empty --values list")
    # reject any out-of-range value before running anything
    configs = [cfg.with_overrides(**{args.param: v}) for v in values]

    spec = strategy_spec("usd", args)
    requests = jsonlio.load_requests(args.input)
    out_dir = Path(args.output)
    reports = []
    for value, swept_cfg in zip(values, configs):
        report = _evaluate_strategy(requests, spec, swept_cfg, ks, args.jobs)
        reports.append((value, report))
        jsonlio.write_json(out_dir / f"report_{args.param}_{value:g}.json",
                           report.to_dict())
    header = ["param", "value"] + [
        f"{m}@{k}" for k in ks for m in ("hr", "ndcg", "mrr")
    ]
    lines = [",".join(header)]
    for value, report in reports:
        row = [args.param, f"{value:g}"]
        for k in ks:
            cell = report.per_k[k]
            row += [f"{cell['hr']:.6f}", f"{cell['ndcg']:.6f}", f"{cell['mrr']:.6f}"]
        lines.append(",".join(row))
    jsonlio.atomic_write_text(out_dir / "sweep.csv", "\n".join(lines) + "\n")
    write_manifest(out_dir, "sweep", cfg, [args.input], started,
                   {"param": args.param, "values": values})
    print("\n".join(lines))
    return EXIT_OK


def cmd_synth(args: argparse.Namespace) -> int:
    started = time.time()
    spec = synth.SynthSpec(
        n_users=args.users,
        n_items=args.items,
        n_groups=args.groups,
        logit_dim=args.dim,
        intra_group_sim_target=args.intra,
        inter_group_sim_cap=args.inter,
        markov_concentration=args.concentration,
        seq_len=args.seq_len,
        seed=args.seed if args.seed is not None else 0,
    )
    catalog, interactions, requests = synth.generate_corpus(spec, args.regime)
    out_dir = Path(args.out)
    jsonlio.write_jsonl(
        out_dir / "catalog.jsonl",
        [
            {"id": it.id, "group": it.group, "logits": list(it.logits)}
            for it in catalog.items
        ],
    )
    jsonlio.write_jsonl(
        out_dir / "interactions.jsonl",
        [
            {"user_id": uid, "items": items}
            for uid, items in sorted(interactions.items())
        ],
    )
    from .model import request_to_dict

    jsonlio.write_jsonl(
        out_dir / "requests.jsonl", [request_to_dict(r) for r in requests]
    )
    jsonlio.write_json(
        out_dir / "manifest.json",
        {
            "command": "synth",
            "spec": spec.to_dict(),
            "regime": args.regime,
            "tool_version": __version__,
            "started_at": started,
            "finished_at": time.time(),
        },
    )
    print(f"wrote corpus ({len(requests)} requests) -> {out_dir}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="semrank",
        description="Semantic-cluster reranking engine for next-item candidate sets.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--config", help="flat key=value config file")
        p.add_argument("--seed", type=int, help="override the config seed")
        p.add_argument("--jobs", type=int, default=1,
                       help="worker count (speed only, never results)")
        p.add_argument("--top-p", dest="top_p", type=float, default=0.9)
        p.add_argument("--beam-width", dest="beam_width", type=int, default=5)
        p.add_argument("--n", type=int, default=10,
                       help="sample count for best_of_n / self_consistency")

    p = sub.add_parser("decode", help="rank every request in a JSONL file")
    add_common(p)
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--strategy", default="usd", choices=CLI_STRATEGIES)
    p.add_argument("--dump-similarity", action="store_true",
                   help="include the per-request similarity matrix")
    p.set_defaults(fn=cmd_decode)

    p = sub.add_parser("eval", help="leave-one-out metrics for one strategy")
    add_common(p)
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--strategy", default="usd", choices=CLI_STRATEGIES)
    p.add_argument("--k", default="3,5", help="comma-separated cutoffs")
    p.set_defaults(fn=cmd_eval)

    p = sub.add_parser("compare", help="side-by-side metrics for several strategies")
    add_common(p)
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--strategies", required=True,
                   help="comma-separated strategy names")
    p.add_argument("--k", default="3,5")
    p.set_defaults(fn=cmd_compare)

    p = sub.add_parser("sweep", help="evaluate while varying one hyperparameter")
    add_common(p)
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--param", required=True)
    p.add_argument("--values", required=True, help="comma-separated values")
    p.add_argument("--k", default="1,3,5")
    p.set_defaults(fn=cmd_sweep)

    p = sub.add_parser("synth", help="generate a seeded synthetic corpus")
    p.add_argument("--out", required=True)
    p.add_argument("--users", type=int, default=100)
    p.add_argument("--items", type=int, default=96)
    p.add_argument("--groups", type=int, default=12)
    p.add_argument("--dim", type=int, default=32)
    p.add_argument("--intra", type=float, default=0.9)
    p.add_argument("--inter", type=float, default=0.3)
    p.add_argument("--concentration", type=float, default=8.0)
    p.add_argument("--seq-len", dest="seq_len", type=int, default=8)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--regime", default="strong", choices=synth.REGIMES)
    p.set_defaults(fn=cmd_synth)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    try:
        return args.fn(args)
    except InternalError as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
