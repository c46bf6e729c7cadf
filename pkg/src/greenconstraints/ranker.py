"""Normalised importance weights for constraints."""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Iterable, Sequence

from .model import Constraint

DEFAULT_MIN_IMPACT = 100.0
DEFAULT_LAMBDA_LOW = 0.75
DEFAULT_DROP_WEIGHT = 0.1


@dataclass(frozen=True)
class RankerConfig:
    min_impact: float = DEFAULT_MIN_IMPACT
    lambda_low: float = DEFAULT_LAMBDA_LOW
    drop_weight: float = DEFAULT_DROP_WEIGHT

    def __post_init__(self) -> None:
        if self.min_impact < 0:
            raise ValueError(f"min_impact must be >= 0, got {self.min_impact}")
        if not 0 < self.lambda_low <= 1:
            raise ValueError(f"lambda_low must lie in (0, 1], got {self.lambda_low}")
        if not 0 <= self.drop_weight < 1:
            raise ValueError(f"drop_weight must lie in [0, 1), got {self.drop_weight}")


def max_em(constraints: Iterable[Constraint]) -> float:
    ems = [c.em for c in constraints]
    if not ems:
        raise ValueError("max_em of an empty constraint set")
    return max(ems)


def sort_key(c: Constraint) -> tuple:
    return (-(c.weight or 0.0), c.kind, c.service, c.flavour, c.target)


def rank(constraints: Sequence[Constraint], config: RankerConfig = RankerConfig()) -> list[Constraint]:
    """Weight each constraint by its share of the largest impact.

    The raw weight ``em / max_em`` is attenuated by ``lambda_low`` when the
    absolute impact is below ``min_impact``, then multiplied by the memory
    weight. Constraints under ``drop_weight`` are removed and the rest are
    returned heaviest first, ties broken by identity.
    """
    if not constraints:
        return []
    top = max_em(constraints)
    out = []
    for c in constraints:
        w = c.em / top if top > 0 else 0.0
        if c.em < config.min_impact:
            w *= config.lambda_low
        w *= c.mu
        if w >= config.drop_weight and w > 0:
            out.append(replace(c, weight=w))
    out.sort(key=sort_key)
    return out
