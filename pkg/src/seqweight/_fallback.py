"""Pure numpy versions of the block scanners in ``_kernels.pyx``.

Same signatures and same floating-point operations, vectorized over the rows
of a block instead of looped. ``order`` is accepted and ignored.
"""
from __future__ import annotations

import numpy as np


def _path(llr: np.ndarray, incr: np.ndarray) -> np.ndarray:
    # accumulate starting from llr so row i equals (((llr + x0) + x1) + ... + xi)
    return np.cumsum(np.vstack([llr[None, :], incr]), axis=0)[1:]


def _finish(llr: np.ndarray, path: np.ndarray, hits: np.ndarray) -> int:
    if hits.size:
        row = int(hits[0])
        llr[:] = path[row]
        return row
    llr[:] = path[-1]
    return -1


def _descending(w: np.ndarray) -> np.ndarray:
    """Rows sorted descending, padded with +inf in front and -inf behind.

    Column k then holds the k-th largest value for k = 0..J+1.
    """
    rows = w.shape[0]
    body = -np.sort(-w, axis=1)
    return np.hstack([np.full((rows, 1), np.inf), body, np.full((rows, 1), -np.inf)])


def gap_scan(llr, incr, logw, order, m, c):
    path = _path(llr, incr)
    w = path + logw
    J = w.shape[1]
    part = np.partition(w, (J - m - 1, J - m), axis=1)
    gap = part[:, J - m] - part[:, J - m - 1]
    return _finish(llr, path, np.flatnonzero(gap >= c))


def gi_scan(llr, incr, logw, order, l, u, a, b, c, d, use_tau1, use_tau3):
    path = _path(llr, incr)
    w = path + logw
    neg_a = -a
    ranked = _descending(w)
    rows = w.shape[0]
    fired = np.zeros(rows, dtype=np.int8)

    if use_tau3:
        hi, lo = ranked[:, u], ranked[:, u + 1]
        fired[(hi >= b) & (hi - lo >= d)] = 3
    positive = (w > 0).sum(axis=1)
    outside = ((w <= neg_a) | (w >= b)).all(axis=1)
    fired[outside & (positive >= l) & (positive <= u)] = 2
    if use_tau1:
        hi, lo = ranked[:, l], ranked[:, l + 1]
        fired[(lo <= neg_a) & (hi - lo >= c)] = 1

    hits = np.flatnonzero(fired)
    row = _finish(llr, path, hits)
    return row, (int(fired[row]) if row >= 0 else 0)


def separated_scan(llr, incr, logw, signal, c):
    path = _path(llr, incr)
    w = path + logw
    mask = signal.astype(bool)
    lo = np.where(mask, w, np.inf).min(axis=1)
    hi = np.where(mask, -np.inf, w).max(axis=1)
    return _finish(llr, path, np.flatnonzero(lo > hi + c))
