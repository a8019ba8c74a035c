"""Command-line pipeline driver.

Subcommands:
    quota run     full pipeline: reduced embeddings + allocation report
    quota plan    stop after planning; write the report only
    quota frames  duration-adaptive frame count and timestamps

Flags may come from a JSON config file (--config) with the same names,
underscored; explicit flags win. The scorer falls back to the
QUOTA_SCORER_URL environment variable, then to the mock.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from typing import Optional, Sequence

from .errors import ConfigError, QuotaError
from .formats import read_embeddings, write_embeddings, write_report
from .model import STRATEGY_DIRECT, STRATEGY_ENTITY, STRATEGY_EVENT
from .pipeline import PipelineConfig, run_pipeline
from .sampling import SamplingConfig, compute_frame_count, sample_timestamps
from .scoring import ScorerBinding, parse_scorer_spec

_STRATEGY_FLAGS = {
    "direct": STRATEGY_DIRECT,
    "entity": STRATEGY_ENTITY,
    "event": STRATEGY_EVENT,
}

ENV_SCORER_URL = "QUOTA_SCORER_URL"


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="quota",
        description="Query-oriented visual token budgeting over frame embeddings.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_pipeline_args(p: argparse.ArgumentParser, with_output: bool) -> None:
        p.add_argument("--config", help="JSON config file mirroring these flags")
        p.add_argument("--embeddings", help="input embeddings file (QTEM)")
        p.add_argument("--query", help="user query text")
        p.add_argument("--budget", type=int,
                       help="total token budget (default: input token count)")
        p.add_argument("--assigner", choices=["bilinear", "pool", "merge"],
                       help="token assigner (default bilinear)")
        p.add_argument("--scorer",
                       help="mock[:seed] | file:PATH | http:URL "
                            f"(default ${ENV_SCORER_URL} or mock)")
        p.add_argument("--strategy", choices=sorted(_STRATEGY_FLAGS),
                       help="query decoupling strategy (default direct)")
        p.add_argument("--max-in-flight", type=int, dest="max_in_flight",
                       help="concurrent scoring requests (default 4)")
        p.add_argument("--duration", type=float,
                       help="video duration in seconds")
        p.add_argument("--t-base", type=int, dest="t_base",
                       help="base sampled frame count (default 96)")
        p.add_argument("--alpha", type=int,
                       help="max extra frames for long videos (default 64)")
        p.add_argument("--frames-are-presampled", action="store_true",
                       default=None, dest="frames_are_presampled",
                       help="input frames already match the sampling plan; "
                            "skip the sampler stage")
        p.add_argument("--out-report", dest="out_report",
                       help="allocation report output path (JSON)")
        if with_output:
            p.add_argument("--out-embeddings", dest="out_embeddings",
                           help="reduced embeddings output path (QTEM)")

    run_p = sub.add_parser("run", help="full pipeline incl. reduced embeddings")
    add_pipeline_args(run_p, with_output=True)

    plan_p = sub.add_parser("plan", help="stop after the allocation report")
    add_pipeline_args(plan_p, with_output=False)

    frames_p = sub.add_parser("frames", help="print frame count and timestamps")
    frames_p.add_argument("--duration", type=float, required=True)
    frames_p.add_argument("--t-base", type=int, dest="t_base", default=96)
    frames_p.add_argument("--alpha", type=int, default=64)

    return parser


def _load_config_file(path: Optional[str]) -> dict:
    if not path:
        return {}
    try:
        with open(path, "r", encoding="utf-8") as fh:
            cfg = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(cfg, dict):
        raise ConfigError(f"config {path} must be a JSON object")
    return cfg


def _setting(args: argparse.Namespace, cfg: dict, name: str, default=None):
    value = getattr(args, name, None)
    if value is not None:
        return value
    if name in cfg and cfg[name] is not None:
        return cfg[name]
    return default


def _resolve_scorer(args: argparse.Namespace, cfg: dict) -> ScorerBinding:
    max_in_flight = int(_setting(args, cfg, "max_in_flight", 4))
    spec = _setting(args, cfg, "scorer")
    if spec is None:
        env_url = os.environ.get(ENV_SCORER_URL)
        spec = f"http:{env_url}" if env_url else "mock"
    try:
        return parse_scorer_spec(str(spec), max_in_flight=max_in_flight)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _run_or_plan(args: argparse.Namespace, emit_embeddings: bool) -> int:
    cfg_file = _load_config_file(args.config)
    embeddings_path = _setting(args, cfg_file, "embeddings")
    if not embeddings_path:
        raise ConfigError("--embeddings is required")
    query = _setting(args, cfg_file, "query")
    if not query:
        raise ConfigError("--query is required")
    strategy_flag = _setting(args, cfg_file, "strategy", "direct")
    if strategy_flag not in _STRATEGY_FLAGS:
        raise ConfigError(f"unknown strategy {strategy_flag!r}")
    out_report = _setting(args, cfg_file, "out_report")
    if not out_report:
        raise ConfigError("--out-report is required")
    out_embeddings = (
        _setting(args, cfg_file, "out_embeddings") if emit_embeddings else None
    )
    if emit_embeddings and not out_embeddings:
        raise ConfigError("--out-embeddings is required for run")

    budget = _setting(args, cfg_file, "budget")
    duration = _setting(args, cfg_file, "duration")
    presampled = bool(_setting(args, cfg_file, "frames_are_presampled", False))

    video = read_embeddings(embeddings_path)
    pipeline_cfg = PipelineConfig(
        query=str(query),
        budget=int(budget) if budget is not None else None,
        assigner=_setting(args, cfg_file, "assigner", "bilinear"),
        strategy=_STRATEGY_FLAGS[strategy_flag],
        scorer=_resolve_scorer(args, cfg_file),
        duration_s=float(duration) if duration is not None else None,
        sampling=SamplingConfig(
            t_base=int(_setting(args, cfg_file, "t_base", 96)),
            alpha=int(_setting(args, cfg_file, "alpha", 64)),
        ),
        frames_are_presampled=presampled,
    )
    result = run_pipeline(video, pipeline_cfg, emit_embeddings=emit_embeddings)

    write_report(result.report, out_report)
    if emit_embeddings and result.reduced is not None:
        write_embeddings(result.reduced.as_video(), out_embeddings)
    print(json.dumps(result.report["totals"]))
    return 0


def _frames(args: argparse.Namespace) -> int:
    cfg = SamplingConfig(t_base=args.t_base, alpha=args.alpha)
    count = compute_frame_count(args.duration, cfg)
    print(count)
    for ts in sample_timestamps(args.duration, count):
        print(f"{ts:.6f}")
    return 0


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "frames":
            return _frames(args)
        return _run_or_plan(args, emit_embeddings=(args.command == "run"))
    except QuotaError as exc:
        print(json.dumps(exc.to_json()), file=sys.stderr)
        return 1
    except OSError as exc:
        print(json.dumps({"error": "io-error", "message": str(exc)}),
              file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
