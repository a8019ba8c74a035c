"""Budget allocation: weights in, integer token targets and grid dims out.

Targets come from largest-remainder apportionment of ``weight * budget``
with a one-token floor per frame, so the frame sequence keeps its temporal
alignment. Grid solving finds the near-square (h, w) whose product is
closest to a target without exceeding it. Weight redistribution clamps
frames whose target would overflow the per-frame spatial capacity and
hands their excess to the rest, proportionally, until a fixed point.
"""

from __future__ import annotations

import math
from typing import List, Tuple

from .errors import (
    BudgetTooSmallError,
    InfeasibleBudgetError,
    NonPositiveTargetError,
)
from .model import NormalizedScores

CAP_TOL = 1e-6


def allocate_budget(weights: NormalizedScores, budget: int) -> List[int]:
    """Apportion ``budget`` tokens across frames proportionally to weight.

    Floor-plus-largest-remainder keeps the total exactly at the budget;
    remainder ties go to the lowest frame index. Frames rounded to zero are
    raised to one token, paid for by the largest allocations.
    """
    count = len(weights)
    if budget < count:
        raise BudgetTooSmallError(
            f"budget {budget} cannot give {count} frames one token each"
        )
    quotas = [w * budget for w in weights.weights]
    targets = [math.floor(q) for q in quotas]
    leftover = budget - sum(targets)
    remainders = sorted(
        range(count), key=lambda i: (-(quotas[i] - targets[i]), i)
    )
    for i in remainders[:leftover]:
        targets[i] += 1
    # One-token floor: a literal max(1, n) would push the total above the
    # budget, so zero frames borrow from the largest allocation instead.
    for i in range(count):
        if targets[i] == 0:
            donor = max(range(count), key=lambda j: (targets[j], -j))
            targets[donor] -= 1
            targets[i] = 1
    return targets


def solve_grid(target: int) -> Tuple[int, int]:
    """Near-square (height, width) with the largest product <= target."""
    if target < 1:
        raise NonPositiveTargetError(f"target must be >= 1, got {target}")
    side = math.isqrt(target)
    h = w = side
    if (h + 1) * w <= target:
        h += 1
    return h, w


def redistribute_weights(weights: NormalizedScores, budget: int,
                         cap: int) -> NormalizedScores:
    """Clamp over-capacity frames and reassign their excess weight.

    ``cap`` is the per-frame spatial capacity (grid height * width). Each
    pass clamps every frame whose ``weight * budget`` exceeds the cap to
    ``cap / budget`` and spreads the freed weight over still-unclamped
    frames proportionally to their current weight (equally, when those
    weights are all zero). Clamped frames never receive weight again, so
    the clamped set grows strictly and the loop ends within one pass per
    frame.
    """
    count = len(weights)
    if budget > count * cap:
        raise InfeasibleBudgetError(
            f"budget {budget} exceeds {count} frames x cap {cap}"
        )
    limit = cap / budget
    current = list(weights.weights)
    clamped = [False] * count

    for _ in range(count):
        over = [
            i for i in range(count)
            if not clamped[i] and current[i] * budget > cap
        ]
        if not over:
            break
        excess = 0.0
        for i in over:
            excess += current[i] - limit
            current[i] = limit
            clamped[i] = True
        receivers = [i for i in range(count) if not clamped[i]]
        if receivers:
            pool = sum(current[i] for i in receivers)
            if pool > 0.0:
                for i in receivers:
                    current[i] += current[i] / pool * excess
            else:
                share = excess / len(receivers)
                for i in receivers:
                    current[i] += share
        # Weight conservation holds pass by pass; anything else is a bug.
        assert abs(sum(current) - 1.0) <= 1e-9, "weight mass not conserved"
    else:
        if any(
            not clamped[i] and current[i] * budget > cap + CAP_TOL
            for i in range(count)
        ):
            raise AssertionError("redistribution failed to reach a fixed point")

    return NormalizedScores(tuple(current))


def needs_redistribution(assigner: str) -> bool:
    """Down-sampling-only assigners cannot exceed the input grid."""
    return assigner in ("pool", "merge")
