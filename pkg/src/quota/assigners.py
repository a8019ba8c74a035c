"""Token-grid reduction kernels.

Three interchangeable assigners turn an (H, W, C) token grid into the
solved (h, w, C) grid: bilinear resampling (up or down), adaptive average
pooling (down only), and similarity-driven token merging (down only).
All arithmetic runs in float64 and is cast back to float32 at the end;
every kernel is a pure function of its inputs.
"""

from __future__ import annotations

from typing import List, Tuple

import numpy as np

from .errors import QuotaError, UpsampleRequestedError
from .model import (
    AllocationPlan,
    FrameEmbedding,
    ReducedVideoEmbeddings,
    VideoEmbeddings,
)

ASSIGNER_BILINEAR = "bilinear"
ASSIGNER_POOL = "pool"
ASSIGNER_MERGE = "merge"
ASSIGNERS = (ASSIGNER_BILINEAR, ASSIGNER_POOL, ASSIGNER_MERGE)


def _axis_coords(src: int, dst: int) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Half-pixel-center source sampling for one axis.

    Returns (low index, high index, high weight) per output position; the
    source coordinate (j + 0.5) * src / dst - 0.5 is clamped to the grid.
    """
    coords = (np.arange(dst, dtype=np.float64) + 0.5) * (src / dst) - 0.5
    coords = np.clip(coords, 0.0, src - 1)
    lo = np.floor(coords).astype(np.int64)
    hi = np.minimum(lo + 1, src - 1)
    return lo, hi, coords - lo


def resize_bilinear(frame: FrameEmbedding, grid: Tuple[int, int]) -> FrameEmbedding:
    """Separable bilinear resize to ``grid``; identity dims copy bit-exactly."""
    out_h, out_w = int(grid[0]), int(grid[1])
    if out_h < 1 or out_w < 1:
        raise UpsampleRequestedError(f"grid dims must be >= 1, got {grid}")
    data = frame.data.astype(np.float64)
    y0, y1, wy = _axis_coords(frame.height, out_h)
    x0, x1, wx = _axis_coords(frame.width, out_w)
    rows = data[y0] * (1.0 - wy)[:, None, None] + data[y1] * wy[:, None, None]
    out = (
        rows[:, x0] * (1.0 - wx)[None, :, None]
        + rows[:, x1] * wx[None, :, None]
    )
    return FrameEmbedding(out.astype(np.float32))


def pool_adaptive(frame: FrameEmbedding, grid: Tuple[int, int]) -> FrameEmbedding:
    """Adaptive average pooling to ``grid``; windows may overlap when the
    output does not divide the input."""
    out_h, out_w = int(grid[0]), int(grid[1])
    h, w = frame.height, frame.width
    if out_h > h or out_w > w:
        raise UpsampleRequestedError(
            f"pooling cannot upsample ({h}, {w}) to ({out_h}, {out_w})"
        )
    if out_h < 1 or out_w < 1:
        raise UpsampleRequestedError(f"grid dims must be >= 1, got {grid}")
    data = frame.data.astype(np.float64)
    out = np.empty((out_h, out_w, frame.dim), dtype=np.float64)
    for i in range(out_h):
        r0 = (i * h) // out_h
        r1 = ((i + 1) * h + out_h - 1) // out_h
        for j in range(out_w):
            c0 = (j * w) // out_w
            c1 = ((j + 1) * w + out_w - 1) // out_w
            out[i, j] = data[r0:r1, c0:c1].mean(axis=(0, 1))
    return FrameEmbedding(out.astype(np.float32))


def _cosine_matrix(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Pairwise cosine similarity; zero-norm tokens match nothing (sim 0).

    Reductions go through elementwise products and axis sums rather than a
    BLAS matmul, so results do not depend on the library's kernel dispatch.
    """
    na = np.sqrt((a * a).sum(axis=1))
    nb = np.sqrt((b * b).sum(axis=1))
    denom = np.outer(na, nb)
    dots = (a[:, None, :] * b[None, :, :]).sum(axis=2)
    with np.errstate(divide="ignore", invalid="ignore"):
        sims = dots / denom
    sims[denom == 0.0] = 0.0
    return sims


def _greedy_pairs(sims: np.ndarray, r: int) -> List[Tuple[int, int]]:
    """Pick r disjoint (a, b) pairs greedily by descending similarity.

    Ties break toward the lowest a index, then the lowest b index, keeping
    the selection deterministic.
    """
    n_a, n_b = sims.shape
    order = sorted(
        ((a, b) for a in range(n_a) for b in range(n_b)),
        key=lambda ab: (-sims[ab[0], ab[1]], ab[0], ab[1]),
    )
    used_a = [False] * n_a
    used_b = [False] * n_b
    pairs: List[Tuple[int, int]] = []
    for a, b in order:
        if len(pairs) == r:
            break
        if not used_a[a] and not used_b[b]:
            pairs.append((a, b))
            used_a[a] = used_b[b] = True
    return pairs


def _merge_line(values: np.ndarray, sizes: np.ndarray,
                r: int) -> Tuple[np.ndarray, np.ndarray]:
    """Merge ``r`` pairs within one token line (length n -> n - r).

    Even positions form set A, odd positions set B; the r most similar
    disjoint A-B pairs merge by size-weighted mean, the merged token taking
    the pair's earlier position.
    """
    n = values.shape[0]
    a_pos = np.arange(0, n, 2)
    b_pos = np.arange(1, n, 2)
    sims = _cosine_matrix(values[a_pos], values[b_pos])
    out_vals = values.copy()
    out_sizes = sizes.copy()
    drop = np.zeros(n, dtype=bool)
    for a, b in _greedy_pairs(sims, r):
        pa, pb = int(a_pos[a]), int(b_pos[b])
        keep, gone = min(pa, pb), max(pa, pb)
        sa, sb = out_sizes[pa], out_sizes[pb]
        out_vals[keep] = (sa * out_vals[pa] + sb * out_vals[pb]) / (sa + sb)
        out_sizes[keep] = sa + sb
        drop[gone] = True
    return out_vals[~drop], out_sizes[~drop]


def merge_tokens(frame: FrameEmbedding, grid: Tuple[int, int]) -> FrameEmbedding:
    """Similarity-driven merging to ``grid`` by alternating row/column passes.

    Each pass shrinks the axis with the larger relative excess and merges
    the same pair count in every line, so the grid stays rectangular. The
    output carries per-token size counters whose total equals the input
    token count.
    """
    out_h, out_w = int(grid[0]), int(grid[1])
    h, w = frame.height, frame.width
    if out_h > h or out_w > w:
        raise UpsampleRequestedError(
            f"merging cannot upsample ({h}, {w}) to ({out_h}, {out_w})"
        )
    if out_h < 1 or out_w < 1:
        raise UpsampleRequestedError(f"grid dims must be >= 1, got {grid}")

    values = frame.data.astype(np.float64)
    if frame.sizes is not None:
        sizes = frame.sizes.astype(np.float64)
    else:
        sizes = np.ones((h, w), dtype=np.float64)

    while (h, w) != (out_h, out_w):
        rel_w = (w - out_w) / w
        rel_h = (h - out_h) / h
        if rel_w >= rel_h:
            r = min(w - out_w, w // 2)
            new_vals = np.empty((h, w - r, values.shape[2]))
            new_sizes = np.empty((h, w - r))
            for y in range(h):
                new_vals[y], new_sizes[y] = _merge_line(values[y], sizes[y], r)
            values, sizes = new_vals, new_sizes
            w -= r
        else:
            r = min(h - out_h, h // 2)
            new_vals = np.empty((h - r, w, values.shape[2]))
            new_sizes = np.empty((h - r, w))
            for x in range(w):
                col_vals, col_sizes = _merge_line(values[:, x], sizes[:, x], r)
                new_vals[:, x] = col_vals
                new_sizes[:, x] = col_sizes
            values, sizes = new_vals, new_sizes
            h -= r

    return FrameEmbedding(
        values.astype(np.float32), sizes=np.rint(sizes).astype(np.int64)
    )


_ASSIGNER_FNS = {
    ASSIGNER_BILINEAR: resize_bilinear,
    ASSIGNER_POOL: pool_adaptive,
    ASSIGNER_MERGE: merge_tokens,
}


def assign_all(video: VideoEmbeddings, plan: AllocationPlan,
               method: str) -> ReducedVideoEmbeddings:
    """Apply one assigner to every frame according to ``plan``."""
    if method not in _ASSIGNER_FNS:
        raise ValueError(f"unknown assigner {method!r}")
    if len(plan) != len(video.frames):
        raise ValueError(
            f"plan covers {len(plan)} frames, video has {len(video.frames)}"
        )
    fn = _ASSIGNER_FNS[method]
    reduced = []
    for i, (frame, grid) in enumerate(zip(video.frames, plan.grids)):
        try:
            reduced.append(fn(frame, grid))
        except QuotaError as exc:
            raise type(exc)(f"frame {i}: {exc}") from exc
    return ReducedVideoEmbeddings(tuple(reduced), provenance=method)
