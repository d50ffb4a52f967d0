# cython: language_level=3, boundscheck=False, wraparound=False, initializedcheck=False
"""Compiled block scanners for the stopping rules.

Every scanner consumes a block of LLR increments (one row per time step),
adds them to ``llr`` in place row by row, and returns the first row at which
its stopping condition holds (``llr`` is then the state at that row), or -1
after absorbing the whole block. Arithmetic mirrors ``_fallback`` operation
for operation so both backends stop at the same row.

``order`` is a permutation of stream indices sorted by descending weighted
LLR (ties by ascending index). It persists between calls and is repaired by
insertion sort each step, which is near-linear because paths move little per
step.
"""
import numpy as np
from libc.math cimport INFINITY

cdef inline bint _ahead(const double[::1] w, Py_ssize_t i, Py_ssize_t j) noexcept nogil:
    return w[i] > w[j] or (w[i] == w[j] and i < j)


cdef void _resort(Py_ssize_t[::1] order, const double[::1] w) noexcept nogil:
    cdef Py_ssize_t n = order.shape[0]
    cdef Py_ssize_t k, p, idx
    for k in range(1, n):
        idx = order[k]
        p = k - 1
        while p >= 0 and _ahead(w, idx, order[p]):
            order[p + 1] = order[p]
            p -= 1
        order[p + 1] = idx


cdef inline void _step(double[::1] llr, const double[:, ::1] incr, Py_ssize_t row,
                       const double[::1] logw, double[::1] w) noexcept nogil:
    cdef Py_ssize_t j
    for j in range(llr.shape[0]):
        llr[j] = llr[j] + incr[row, j]
        w[j] = llr[j] + logw[j]


cdef inline double _stat(const double[::1] w, const Py_ssize_t[::1] order, Py_ssize_t k) noexcept nogil:
    # k-th largest, 1-based; k = 0 and k = J + 1 are +inf / -inf
    if k <= 0:
        return INFINITY
    if k > order.shape[0]:
        return -INFINITY
    return w[order[k - 1]]


def gap_scan(double[::1] llr, const double[:, ::1] incr, const double[::1] logw,
             Py_ssize_t[::1] order, Py_ssize_t m, double c):
    cdef Py_ssize_t rows = incr.shape[0]
    cdef Py_ssize_t i
    cdef Py_ssize_t hit = -1
    cdef double[::1] w = np.empty(llr.shape[0])
    with nogil:
        for i in range(rows):
            _step(llr, incr, i, logw, w)
            _resort(order, w)
            if w[order[m - 1]] - w[order[m]] >= c:
                hit = i
                break
    return hit


def gi_scan(double[::1] llr, const double[:, ::1] incr, const double[::1] logw,
            Py_ssize_t[::1] order, Py_ssize_t l, Py_ssize_t u, double a, double b,
            double c, double d, bint use_tau1, bint use_tau3):
    """Returns (row, rule) with rule in {1, 2, 3}; the lowest rule wins ties."""
    cdef Py_ssize_t J = llr.shape[0]
    cdef Py_ssize_t rows = incr.shape[0]
    cdef Py_ssize_t i, j, positive
    cdef bint outside
    cdef double lo, hi, v
    cdef double neg_a = -a
    cdef Py_ssize_t hit = -1
    cdef int rule = 0
    cdef double[::1] w = np.empty(J)
    with nogil:
        for i in range(rows):
            _step(llr, incr, i, logw, w)
            _resort(order, w)
            if use_tau1:
                lo = _stat(w, order, l + 1)
                hi = _stat(w, order, l)
                if lo <= neg_a and hi - lo >= c:
                    hit = i
                    rule = 1
                    break
            positive = 0
            outside = True
            for j in range(J):
                v = w[j]
                if v > 0:
                    positive += 1
                if not (v <= neg_a or v >= b):
                    outside = False
            if outside and l <= positive <= u:
                hit = i
                rule = 2
                break
            if use_tau3:
                hi = _stat(w, order, u)
                lo = _stat(w, order, u + 1)
                if hi >= b and hi - lo >= d:
                    hit = i
                    rule = 3
                    break
    return hit, rule


def separated_scan(double[::1] llr, const double[:, ::1] incr, const double[::1] logw,
                   const unsigned char[::1] signal, double c):
    """First row where every signal's weighted LLR exceeds every null's by more than c."""
    cdef Py_ssize_t J = llr.shape[0]
    cdef Py_ssize_t rows = incr.shape[0]
    cdef Py_ssize_t i, j
    cdef double lo, hi
    cdef Py_ssize_t hit = -1
    cdef double[::1] w = np.empty(J)
    with nogil:
        for i in range(rows):
            _step(llr, incr, i, logw, w)
            lo = INFINITY
            hi = -INFINITY
            for j in range(J):
                if signal[j]:
                    if w[j] < lo:
                        lo = w[j]
                elif w[j] > hi:
                    hi = w[j]
            if lo > hi + c:
                hit = i
                break
    return hit
