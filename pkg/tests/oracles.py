"""Independent reference implementations used only by tests.

Everything here is written with plain Python loops so it shares no code
path with the kernels under test. Kept free of numpy vector ops on
purpose; integer-valued fixtures make float results bit-identical across
both implementations.
"""

from __future__ import annotations

import math
from typing import List, Tuple


def cosine(a: List[float], b: List[float]) -> float:
    na = math.sqrt(sum(x * x for x in a))
    nb = math.sqrt(sum(x * x for x in b))
    denom = na * nb
    if denom == 0.0:
        return 0.0
    return sum(x * y for x, y in zip(a, b)) / denom


def greedy_pairs(sims: List[List[float]], r: int) -> List[Tuple[int, int]]:
    """Exhaustive greedy matching: rescan every free pair each round."""
    n_a = len(sims)
    n_b = len(sims[0]) if n_a else 0
    free_a = set(range(n_a))
    free_b = set(range(n_b))
    pairs = []
    while len(pairs) < r:
        best = None
        for a in sorted(free_a):
            for b in sorted(free_b):
                if best is None or sims[a][b] > sims[best[0]][best[1]]:
                    best = (a, b)
        if best is None:
            break
        pairs.append(best)
        free_a.discard(best[0])
        free_b.discard(best[1])
    return pairs


def merge_line(values: List[List[float]], sizes: List[float],
               r: int) -> Tuple[List[List[float]], List[float]]:
    n = len(values)
    a_pos = list(range(0, n, 2))
    b_pos = list(range(1, n, 2))
    sims = [[cosine(values[pa], values[pb]) for pb in b_pos] for pa in a_pos]
    out_vals = [list(v) for v in values]
    out_sizes = list(sizes)
    drop = [False] * n
    for a, b in greedy_pairs(sims, r):
        pa, pb = a_pos[a], b_pos[b]
        keep, gone = min(pa, pb), max(pa, pb)
        sa, sb = out_sizes[pa], out_sizes[pb]
        out_vals[keep] = [
            (sa * x + sb * y) / (sa + sb)
            for x, y in zip(out_vals[pa], out_vals[pb])
        ]
        out_sizes[keep] = sa + sb
        drop[gone] = True
    kept_vals = [v for v, d in zip(out_vals, drop) if not d]
    kept_sizes = [s for s, d in zip(out_sizes, drop) if not d]
    return kept_vals, kept_sizes


def merge_grid(grid: List[List[List[float]]], out_h: int,
               out_w: int) -> Tuple[List[List[List[float]]], List[List[float]]]:
    """Reference merge of an h x w x c nested-list grid down to (out_h, out_w)."""
    h = len(grid)
    w = len(grid[0])
    values = [[list(tok) for tok in row] for row in grid]
    sizes = [[1.0] * w for _ in range(h)]
    while (h, w) != (out_h, out_w):
        rel_w = (w - out_w) / w
        rel_h = (h - out_h) / h
        if rel_w >= rel_h:
            r = min(w - out_w, w // 2)
            for y in range(h):
                values[y], sizes[y] = merge_line(values[y], sizes[y], r)
            w -= r
        else:
            r = min(h - out_h, h // 2)
            new_cols = []
            for x in range(w):
                col_vals = [values[y][x] for y in range(h)]
                col_sizes = [sizes[y][x] for y in range(h)]
                new_cols.append(merge_line(col_vals, col_sizes, r))
            h -= r
            values = [[new_cols[x][0][y] for x in range(w)] for y in range(h)]
            sizes = [[new_cols[x][1][y] for x in range(w)] for y in range(h)]
    return values, sizes


def grid_search_best(n: int) -> Tuple[int, int]:
    """Largest h*w <= n over the near-square search set."""
    side = math.isqrt(n)
    best = (side, side)
    if (side + 1) * side <= n:
        best = (side + 1, side)
    return best
