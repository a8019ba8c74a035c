"""End-to-end orchestration: sample, decouple, score, allocate, assign.

This is the layer the CLI drives. It owns the glue policies: frame refs
are content hashes (identical frames score identically and scores follow
frame permutations), redistribution applies only to the down-sampling
assigners, and failed decoupling degrades to the direct strategy with a
flag in the report.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

from . import allocation, prompts
from .assigners import ASSIGNER_BILINEAR, ASSIGNERS, assign_all
from .errors import (
    ConfigError,
    DimensionMismatchError,
    FrameCountMismatchError,
    UnparseableResponseError,
)
from .model import (
    STRATEGY_DIRECT,
    STRATEGIES,
    AllocationPlan,
    DecoupledQuery,
    NormalizedScores,
    ReducedVideoEmbeddings,
    ScoreVector,
    VideoEmbeddings,
)
from .sampling import SamplingConfig, compute_frame_count, sample_timestamps
from .scoring import ScorerBinding, make_scorer, normalize_scores, score_frames


@dataclass
class PipelineConfig:
    query: str
    budget: Optional[int] = None
    assigner: str = ASSIGNER_BILINEAR
    strategy: str = STRATEGY_DIRECT
    scorer: ScorerBinding = field(
        default_factory=lambda: ScorerBinding(kind="mock")
    )
    duration_s: Optional[float] = None
    sampling: SamplingConfig = field(default_factory=SamplingConfig)
    frames_are_presampled: bool = False

    def __post_init__(self) -> None:
        if self.assigner not in ASSIGNERS:
            raise ConfigError(f"unknown assigner {self.assigner!r}")
        if self.strategy not in STRATEGIES:
            raise ConfigError(f"unknown strategy {self.strategy!r}")
        if not self.query:
            raise ConfigError("query must be non-empty")


@dataclass
class PipelineResult:
    report: dict
    plan: AllocationPlan
    reduced: Optional[ReducedVideoEmbeddings]


def frame_refs(video: VideoEmbeddings) -> List[str]:
    """Content-derived frame identifiers (hash of the token bytes)."""
    return [
        hashlib.sha256(frame.data.tobytes()).hexdigest()[:32]
        for frame in video.frames
    ]


def decouple_query(query: str, strategy: str, scorer) -> DecoupledQuery:
    """Run the decoupling protocol for ``strategy`` against ``scorer``.

    Falls back to the direct strategy, flagged, when the scorer has no text
    generation or its response cannot be parsed.
    """
    if strategy == STRATEGY_DIRECT:
        return DecoupledQuery.direct(query)
    if not getattr(scorer, "supports_generate", False):
        return DecoupledQuery.direct(query, fallback=True)
    prompt = prompts.build_decouple_prompt(query, strategy)
    response = scorer.generate(prompt)
    try:
        return prompts.parse_decouple_response(response, source_query=query)
    except UnparseableResponseError:
        return DecoupledQuery.direct(query, fallback=True)


def build_plan(weights: NormalizedScores, budget: int, assigner: str,
               cap: Optional[int]) -> Tuple[AllocationPlan, NormalizedScores]:
    """Targets and grids for ``budget`` under ``assigner`` semantics.

    Down-sampling assigners first redistribute weight away from frames that
    would overflow the per-frame capacity ``cap``; targets are then clamped
    at the cap so integer rounding cannot reintroduce an overflow.
    """
    if allocation.needs_redistribution(assigner):
        if cap is None:
            raise ConfigError(f"assigner {assigner!r} needs the input grid cap")
        weights = allocation.redistribute_weights(weights, budget, cap)
        targets = [
            min(n, cap) for n in allocation.allocate_budget(weights, budget)
        ]
    else:
        targets = allocation.allocate_budget(weights, budget)
    grids = [allocation.solve_grid(n) for n in targets]
    return (
        AllocationPlan(budget=budget, targets=tuple(targets),
                       grids=tuple(grids)),
        weights,
    )


def build_report(query: str, strategy: str, dq: DecoupledQuery,
                 scores: ScoreVector, weights: NormalizedScores,
                 plan: AllocationPlan,
                 sampling_meta: Optional[dict] = None) -> dict:
    decoupled = {
        "strategy": dq.strategy,
        "object_list": list(dq.object_list) if dq.object_list else None,
        "event_question": dq.event_question,
    }
    if dq.fallback:
        decoupled["fallback"] = True
    report = {
        "query": query,
        "strategy": strategy,
        "decoupled": decoupled,
        "frames": [
            {
                "index": i,
                "score": scores.scores[i],
                "weight": weights.weights[i],
                "target": plan.targets[i],
                "grid_h": plan.grids[i][0],
                "grid_w": plan.grids[i][1],
            }
            for i in range(len(plan))
        ],
        "totals": {"budget": plan.budget, "used": plan.used},
    }
    if sampling_meta is not None:
        report["sampling"] = sampling_meta
    return report


def run_pipeline(video: VideoEmbeddings, cfg: PipelineConfig,
                 emit_embeddings: bool = True) -> PipelineResult:
    """Full pass over ``video``; set ``emit_embeddings=False`` to stop after
    planning (report only)."""
    height, width = video.uniform_grid()
    frame_count = len(video.frames)
    cap = height * width

    sampling_meta = None
    if not cfg.frames_are_presampled:
        if cfg.duration_s is None:
            raise ConfigError(
                "duration is required unless frames are presampled"
            )
        expected = compute_frame_count(cfg.duration_s, cfg.sampling)
        if expected != frame_count:
            raise FrameCountMismatchError(
                f"sampling yields {expected} frames, embeddings hold {frame_count}"
            )
        sampling_meta = {
            "duration_s": cfg.duration_s,
            "t_base": cfg.sampling.t_base,
            "alpha": cfg.sampling.alpha,
            "frame_count": frame_count,
            "timestamps": sample_timestamps(cfg.duration_s, frame_count),
        }

    budget = cfg.budget if cfg.budget is not None else frame_count * cap

    scorer = make_scorer(cfg.scorer)
    dq = decouple_query(cfg.query, cfg.strategy, scorer)
    prompt = prompts.build_frame_scoring_prompt(dq)
    scores = score_frames(frame_refs(video), prompt, cfg.scorer, scorer=scorer)
    weights = normalize_scores(scores)

    plan, final_weights = build_plan(weights, budget, cfg.assigner, cap)
    report = build_report(cfg.query, cfg.strategy, dq, scores, final_weights,
                          plan, sampling_meta)

    reduced = None
    if emit_embeddings:
        reduced = assign_all(video, plan, cfg.assigner)
        if reduced.total_tokens > budget:
            raise DimensionMismatchError(
                "reduced output exceeds the token budget"
            )
    return PipelineResult(report=report, plan=plan, reduced=reduced)
