"""Backend selection for the hot loops.

The compiled extension is used when it imports; otherwise, or when
``GREENCONSTRAINTS_PURE_PYTHON`` is set to a non-empty value, the
pure-Python module is used. Both expose ``pair_impacts``, ``kth_smallest``
and ``count_above`` with identical results.
"""

from __future__ import annotations

import os
from types import ModuleType
from typing import Sequence

import numpy as np

from . import _kernels_py

try:
    from . import _kernels as _native  # type: ignore[attr-defined]
except ImportError:  # extension not built
    _native = None


class Kernels:
    def __init__(self, name: str, module: ModuleType):
        self.name = name
        self._m = module

    def __repr__(self) -> str:
        return f"Kernels({self.name!r})"

    def pair_impacts(
        self,
        energy: Sequence[float],
        carbon: Sequence[float],
        compat: Sequence[Sequence[bool]],
    ) -> tuple[Sequence[int], Sequence[int], Sequence[float]]:
        if self._m is _kernels_py:
            return self._m.pair_impacts(energy, carbon, compat)
        mask = np.asarray(compat, dtype=np.uint8).reshape(len(energy), len(carbon))
        return self._m.pair_impacts(
            np.asarray(energy, dtype=np.float64),
            np.asarray(carbon, dtype=np.float64),
            mask,
        )

    def kth_smallest(self, values: Sequence[float], k: int) -> float:
        if self._m is _kernels_py:
            return float(self._m.kth_smallest(values, k))
        return float(self._m.kth_smallest(np.asarray(values, dtype=np.float64), k))

    def count_above(self, values: Sequence[float], tau: float) -> int:
        if self._m is _kernels_py:
            return self._m.count_above(values, tau)
        return int(self._m.count_above(np.asarray(values, dtype=np.float64), tau))


PYTHON = Kernels("python", _kernels_py)
NATIVE = Kernels("cython", _native) if _native is not None else None


def available() -> list[Kernels]:
    return [k for k in (NATIVE, PYTHON) if k is not None]


def default() -> Kernels:
    if os.environ.get("GREENCONSTRAINTS_PURE_PYTHON") or NATIVE is None:
        return PYTHON
    return NATIVE


def get(name: str | None) -> Kernels:
    if name is None:
        return default()
    for k in available():
        if k.name == name:
            return k
    raise ValueError(f"kernel backend {name!r} is not available (have: {[k.name for k in available()]})")


def threshold_rank(n: int, alpha: float) -> int:
    """Smallest rank k in 1..n with empirical CDF k/n >= alpha.

    Evaluated with the same float comparison a direct CDF scan would make,
    so 8/10 >= 0.8 holds even though 0.8 is not exactly representable.
    """
    if n < 1:
        raise ValueError("no values")
    k = max(1, min(n, int(alpha * n)))
    while k > 1 and (k - 1) / n >= alpha:
        k -= 1
    while k < n and k / n < alpha:
        k += 1
    return k
