#!/usr/bin/env python3
"""
Brute-force certifiers, independent of the LP code path.

``grid_minimax`` bounds the a priori value from above by enumerating rules on
a finite grid; ``bayes_response_value`` bounds it from below through the best
response to a single distribution.
"""

import itertools
import logging
from dataclasses import dataclass
from fractions import Fraction
from math import comb
from typing import List, Optional, Tuple

try:
    from .config import get_settings
    from .credal import CredalSet, JointDistribution
    from .errors import CredalError, SizeBoundExceededError
    from .game import GameSolution, LossFunction
except ImportError:
    from config import get_settings
    from credal import CredalSet, JointDistribution
    from errors import CredalError, SizeBoundExceededError
    from game import GameSolution, LossFunction


logger = logging.getLogger(__name__)

ZERO = Fraction(0)


def _compositions(total: int, parts: int) -> List[Tuple[int, ...]]:
    """Ordered ways of writing ``total`` as ``parts`` nonnegative integers."""
    out = []
    for bars in itertools.combinations(range(total + parts - 1), parts - 1):
        prev = -1
        counts = []
        for b in bars:
            counts.append(b - prev - 1)
            prev = b
        counts.append(total + parts - 2 - prev)
        out.append(tuple(counts))
    return out


def grid_size(n_x: int, n_a: int, resolution: int) -> int:
    return comb(resolution + n_a - 1, n_a - 1) ** n_x


def grid_minimax(credal: CredalSet, loss: LossFunction, resolution: int) -> Fraction:
    """min over grid rules (weights in multiples of 1/N) of the worst vertex loss."""
    if resolution < 1:
        raise CredalError(f"Grid resolution must be at least 1, got {resolution}")
    settings = get_settings()
    n_x, n_y = credal.space.shape
    n_a = len(credal.space.a_labels)
    if max(n_x, n_a) > settings.grid_max_dimension:
        raise SizeBoundExceededError(
            f"Grid oracle supports at most {settings.grid_max_dimension} observations and actions")
    if resolution > settings.grid_max_resolution:
        raise SizeBoundExceededError(
            f"Grid resolution {resolution} exceeds the bound of {settings.grid_max_resolution}")
    size = grid_size(n_x, n_a, resolution)
    if size > settings.grid_max_rules:
        raise SizeBoundExceededError(
            f"Grid of {size} rules exceeds the bound of {settings.grid_max_rules}")

    # per-vertex loss of playing action a at x
    act_losses = [
        [[sum((v.probs[x][y] * loss.table[y][a] for y in range(n_y)), ZERO) for a in range(n_a)]
         for x in range(n_x)]
        for v in credal.vertices
    ]
    scale = Fraction(1, resolution)
    per_x = []
    for x in range(n_x):
        options = []
        for counts in _compositions(resolution, n_a):
            options.append(tuple(
                scale * sum((c * table[x][a] for a, c in enumerate(counts) if c), ZERO)
                for table in act_losses
            ))
        per_x.append(options)

    best: Optional[Fraction] = None
    for choice in itertools.product(*per_x):
        worst = max(sum(parts) for parts in zip(*choice))
        if best is None or worst < best:
            best = worst
    logger.debug("grid oracle: %d rules at resolution %d, value %s", size, resolution, best)
    return best


def bayes_response_value(p: JointDistribution, loss: LossFunction) -> Fraction:
    """sum over x of min over actions of sum over y of p(x,y) L(y,a)."""
    n_x, n_y = p.shape
    total = ZERO
    for x in range(n_x):
        if not any(p.probs[x]):
            continue
        total += min(sum((p.probs[x][y] * row[a] for y, row in enumerate(loss.table)), ZERO)
                     for a in range(loss.shape[1]))
    return total


@dataclass(frozen=True)
class OracleCertificate:
    """bayes_value <= value <= grid_value, with the lower end attained."""
    value: Fraction
    bayes_value: Fraction
    grid_value: Optional[Fraction]
    resolution: Optional[int]

    @property
    def passed(self) -> bool:
        if self.bayes_value != self.value:
            return False
        return self.grid_value is None or self.value <= self.grid_value


def default_resolution(credal: CredalSet) -> Optional[int]:
    """Largest grid resolution within the configured bounds, or None if none fits."""
    settings = get_settings()
    n_x = len(credal.space.x_labels)
    n_a = len(credal.space.a_labels)
    if max(n_x, n_a) > settings.grid_max_dimension:
        return None
    for n in range(settings.grid_max_resolution, 0, -1):
        if grid_size(n_x, n_a, n) <= settings.grid_max_rules:
            return n
    return None


def certify_solution(credal: CredalSet, loss: LossFunction, solution: GameSolution,
                     resolution: Optional[int] = None) -> OracleCertificate:
    """Sandwich an a priori solution between the two brute-force bounds."""
    if resolution is None:
        resolution = default_resolution(credal)
    grid_value = grid_minimax(credal, loss, resolution) if resolution else None
    return OracleCertificate(
        value=solution.value,
        bayes_value=bayes_response_value(solution.aggregate, loss),
        grid_value=grid_value,
        resolution=resolution,
    )
