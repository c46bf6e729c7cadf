from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

import oracles
from greenconstraints import kernels
from greenconstraints.kernels import threshold_rank

impacts = st.lists(st.floats(min_value=0, max_value=1e9, allow_nan=False), min_size=1, max_size=200)
alphas = st.floats(min_value=0.01, max_value=0.99)


def test_native_backend_is_built():
    # the package ships a compiled core; a silent fallback in CI would hide regressions
    assert kernels.NATIVE is not None
    assert kernels.default().name == "cython"


def test_env_var_forces_python(monkeypatch):
    monkeypatch.setenv("GREENCONSTRAINTS_PURE_PYTHON", "1")
    assert kernels.default() is kernels.PYTHON
    with pytest.raises(ValueError):
        kernels.get("fortran")


def test_threshold_rank_examples():
    assert threshold_rank(10, 0.8) == 8
    assert threshold_rank(5, 0.8) == 4
    assert threshold_rank(1, 0.99) == 1
    assert threshold_rank(3, 0.5) == 2
    with pytest.raises(ValueError):
        threshold_rank(0, 0.5)


@given(st.integers(1, 5000), alphas)
def test_threshold_rank_is_smallest_reaching_alpha(n, alpha):
    k = threshold_rank(n, alpha)
    assert k / n >= alpha or k == n
    assert k == 1 or (k - 1) / n < alpha


def test_kth_smallest_bounds(backend):
    assert backend.kth_smallest([3.0, 1.0, 2.0], 1) == 1.0
    assert backend.kth_smallest([3.0, 1.0, 2.0], 3) == 3.0
    with pytest.raises(IndexError):
        backend.kth_smallest([1.0], 2)
    with pytest.raises(IndexError):
        backend.kth_smallest([1.0], 0)


def test_kth_smallest_leaves_input_untouched(backend):
    v = np.array([5.0, 4.0, 3.0, 2.0, 1.0])
    backend.kth_smallest(v, 2)
    assert v.tolist() == [5.0, 4.0, 3.0, 2.0, 1.0]


@given(impacts, alphas)
def test_kth_smallest_matches_oracle(values, alpha):
    k = threshold_rank(len(values), alpha)
    expected = oracles.threshold(values, alpha)
    for b in kernels.available():
        assert b.kth_smallest(values, k) == expected


@given(st.lists(st.sampled_from([1.0, 2.0, 3.0]), min_size=1, max_size=100), alphas)
def test_kth_smallest_with_heavy_ties(values, alpha):
    k = threshold_rank(len(values), alpha)
    assert {b.kth_smallest(values, k) for b in kernels.available()} == {sorted(values)[k - 1]}


@given(impacts, st.floats(min_value=0, max_value=1e9))
def test_count_above(values, tau):
    for b in kernels.available():
        assert b.count_above(values, tau) == sum(v > tau for v in values)


@given(st.data())
def test_pair_impacts_parity(data):
    r = data.draw(st.integers(0, 12))
    c = data.draw(st.integers(1, 12))
    pos = st.floats(min_value=0, max_value=1e4)
    energy = data.draw(st.lists(pos, min_size=r, max_size=r))
    carbon = data.draw(st.lists(pos, min_size=c, max_size=c))
    mask = [data.draw(st.lists(st.booleans(), min_size=c, max_size=c)) for _ in range(r)]
    expected = oracles.pair_impacts(energy, carbon, mask)
    for b in kernels.available():
        rows, cols, vals = b.pair_impacts(energy, carbon, mask)
        got = list(zip((int(x) for x in rows), (int(x) for x in cols), (float(x) for x in vals)))
        assert got == expected


@given(st.lists(st.sampled_from([1.0, 2.0, 3.0, 4.0]), min_size=1, max_size=30), alphas)
def test_fast_oracle_agrees_with_cdf_definition(values, alpha):
    direct = next(v for v in sorted(values) if oracles.empirical_cdf(values, v) >= alpha)
    assert oracles.threshold(values, alpha) == direct
