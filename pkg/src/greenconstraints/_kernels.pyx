# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels for impact enumeration and quantile selection."""

import numpy as np


def pair_impacts(const double[:] energy, const double[:] carbon, const unsigned char[:, :] compat):
    """Impacts ``energy[i] * carbon[j]`` for every compatible ``(i, j)``, row-major."""
    cdef Py_ssize_t nf = energy.shape[0], nn = carbon.shape[0]
    cdef Py_ssize_t i, j, m = 0
    for i in range(nf):
        for j in range(nn):
            if compat[i, j]:
                m += 1
    rows = np.empty(m, dtype=np.intp)
    cols = np.empty(m, dtype=np.intp)
    out = np.empty(m, dtype=np.float64)
    cdef Py_ssize_t[:] r = rows
    cdef Py_ssize_t[:] c = cols
    cdef double[:] o = out
    m = 0
    for i in range(nf):
        for j in range(nn):
            if compat[i, j]:
                r[m] = i
                c[m] = j
                o[m] = energy[i] * carbon[j]
                m += 1
    return rows, cols, out


cdef inline void _swap(double* a, Py_ssize_t i, Py_ssize_t j) noexcept nogil:
    cdef double t = a[i]
    a[i] = a[j]
    a[j] = t


cdef double _select(double* a, Py_ssize_t n, Py_ssize_t target) noexcept nogil:
    cdef Py_ssize_t lo = 0, hi = n - 1
    cdef Py_ssize_t mid, i, lt, gt
    cdef double pivot
    while lo < hi:
        mid = lo + (hi - lo) // 2
        # median of three as pivot
        if a[mid] < a[lo]:
            _swap(a, mid, lo)
        if a[hi] < a[lo]:
            _swap(a, hi, lo)
        if a[hi] < a[mid]:
            _swap(a, hi, mid)
        pivot = a[mid]
        # three-way partition keeps runs of equal values cheap
        lt = lo
        gt = hi
        i = lo
        while i <= gt:
            if a[i] < pivot:
                _swap(a, lt, i)
                lt += 1
                i += 1
            elif a[i] > pivot:
                _swap(a, i, gt)
                gt -= 1
            else:
                i += 1
        if target < lt:
            hi = lt - 1
        elif target > gt:
            lo = gt + 1
        else:
            return pivot
    return a[target]


def kth_smallest(const double[:] values, Py_ssize_t k):
    """The k-th smallest value (1-based) by quickselect on a copy."""
    cdef Py_ssize_t n = values.shape[0]
    if k < 1 or k > n:
        raise IndexError(f"rank {k} outside 1..{n}")
    buf = np.array(values, dtype=np.float64, copy=True)
    cdef double[::1] view = buf
    cdef double result
    with nogil:
        result = _select(&view[0], n, k - 1)
    return result


def count_above(const double[:] values, double tau):
    cdef Py_ssize_t i, n = values.shape[0], count = 0
    for i in range(n):
        if values[i] > tau:
            count += 1
    return count
