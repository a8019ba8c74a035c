"""Query-oriented visual token budgeting.

Given per-frame token grids, a text query, and a total token budget:
score frames for query relevance, allocate per-frame token quotas, and
shrink each frame's grid with a bilinear, pooling, or merging assigner.
"""

from .allocation import allocate_budget, redistribute_weights, solve_grid
from .assigners import assign_all, merge_tokens, pool_adaptive, resize_bilinear
from .errors import QuotaError
from .formats import read_embeddings, read_scores, write_embeddings, write_report
from .model import (
    AllocationPlan,
    DecoupledQuery,
    FrameEmbedding,
    NormalizedScores,
    ReducedVideoEmbeddings,
    ScoreVector,
    VideoEmbeddings,
    validate,
)
from .pipeline import PipelineConfig, run_pipeline
from .prompts import (
    build_decouple_prompt,
    build_frame_scoring_prompt,
    parse_decouple_response,
)
from .sampling import SamplingConfig, compute_frame_count, sample_timestamps
from .scoring import ScorerBinding, normalize_scores, score_frames

__version__ = "0.1.0"

__all__ = [
    "AllocationPlan",
    "DecoupledQuery",
    "FrameEmbedding",
    "NormalizedScores",
    "PipelineConfig",
    "QuotaError",
    "ReducedVideoEmbeddings",
    "SamplingConfig",
    "ScoreVector",
    "ScorerBinding",
    "VideoEmbeddings",
    "allocate_budget",
    "assign_all",
    "build_decouple_prompt",
    "build_frame_scoring_prompt",
    "compute_frame_count",
    "merge_tokens",
    "normalize_scores",
    "parse_decouple_response",
    "pool_adaptive",
    "read_embeddings",
    "read_scores",
    "redistribute_weights",
    "resize_bilinear",
    "run_pipeline",
    "sample_timestamps",
    "score_frames",
    "solve_grid",
    "validate",
    "write_embeddings",
    "write_report",
]
