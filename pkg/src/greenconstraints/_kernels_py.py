"""Pure-Python versions of the compiled kernels, used when the extension is absent."""

from __future__ import annotations

from typing import Sequence


def pair_impacts(
    energy: Sequence[float],
    carbon: Sequence[float],
    compat: Sequence[Sequence[bool]],
) -> tuple[list[int], list[int], list[float]]:
    rows: list[int] = []
    cols: list[int] = []
    out: list[float] = []
    for i, e in enumerate(energy):
        mask = compat[i]
        for j, ci in enumerate(carbon):
            if mask[j]:
                rows.append(i)
                cols.append(j)
                out.append(e * ci)
    return rows, cols, out


def kth_smallest(values: Sequence[float], k: int) -> float:
    n = len(values)
    if k < 1 or k > n:
        raise IndexError(f"rank {k} outside 1..{n}")
    return sorted(values)[k - 1]


def count_above(values: Sequence[float], tau: float) -> int:
    return sum(1 for v in values if v > tau)
