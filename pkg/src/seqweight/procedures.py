"""Weighted gap and weighted gap-intersection sequential procedures.

Two layers live here. ``gap_step`` and ``gi_step`` evaluate a stopping rule
on a single ``TrialState`` and let a caller interleave trials by hand. The
``run_*`` drivers feed blocks of increments to the scanners picked by
``_backend`` (compiled when available) and are what the Monte Carlo harness
uses.

Stream indices are 0-based throughout.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence, TextIO

import numpy as np

from . import _backend
from .model import (
    UNBOUNDED,
    IncrementStream,
    Rate,
    StreamModel,
    TrialState,
    TruthAssignment,
    worst_case_rates,
)
from .thresholds import GapThreshold, GIThresholds, is_active
from .weights import WeightVector

GAP, TAU1, TAU2, TAU3, CAP = "gap", "tau1", "tau2", "tau3", "truncated-cap"
_TAU_NAMES = {1: TAU1, 2: TAU2, 3: TAU3}
CAP_MULTIPLIER = 50


@dataclass(frozen=True)
class GapConfig:
    m: int
    threshold: GapThreshold
    weights: WeightVector

    def __post_init__(self) -> None:
        J = self.weights.J
        if not 1 <= self.m <= J - 1:
            raise ValueError(f"gap procedure needs 1 <= m <= J-1, got m = {self.m}, J = {J}")
        if not isinstance(self.threshold.c, float) or math.isnan(self.threshold.c):
            raise ValueError("gap threshold must be an active number")

    @property
    def c(self) -> float:
        return self.threshold.c


@dataclass(frozen=True)
class GIConfig:
    l: int
    u: int
    thresholds: GIThresholds
    weights: WeightVector

    def __post_init__(self) -> None:
        if not 0 <= self.l <= self.u <= self.weights.J:
            raise ValueError(f"need 0 <= l <= u <= J, got l = {self.l}, u = {self.u}")


@dataclass(frozen=True)
class Decision:
    """Stopping time T, rejected set D and the rule that fired."""

    T: int
    rejected: frozenset[int]
    rule: str

    @property
    def capped(self) -> bool:
        return self.rule == CAP


# ---------------------------------------------------------------- single-step rules


def ordered_wllr(state: TrialState, weights: WeightVector) -> list[tuple[float, int]]:
    """(weighted LLR, stream) pairs, descending; ties go to the lower index."""
    if state.J != weights.J:
        raise ValueError(f"state has {state.J} streams, weights {weights.J}")
    w = state.llr + weights.log
    idx = np.arange(w.size)
    order = np.lexsort((idx, -w))
    return [(float(w[j]), int(j)) for j in order]


def _order_stat(ranked: list[tuple[float, int]], k: int) -> float:
    if k <= 0:
        return math.inf
    if k > len(ranked):
        return -math.inf
    return ranked[k - 1][0]


def count_positive_wllr(state: TrialState, weights: WeightVector) -> int:
    return int(np.count_nonzero(state.llr + weights.log > 0))


def gap_step(state: TrialState, cfg: GapConfig) -> Decision | None:
    """Stop (returning the decision) when the m-th/(m+1)-th gap reaches c; else None."""
    ranked = ordered_wllr(state, cfg.weights)
    m = cfg.m
    if ranked[m - 1][0] - ranked[m][0] >= cfg.c:
        return Decision(state.n, frozenset(j for _, j in ranked[:m]), GAP)
    return None


def gi_decision(ranked: list[tuple[float, int]], l: int, u: int) -> frozenset[int]:
    """Positive-WLLR streams, cut to the u largest or topped up to the l largest."""
    positive = sum(1 for v, _ in ranked if v > 0)
    size = min(max(positive, l), u)
    return frozenset(j for _, j in ranked[:size])


def gi_rule(ranked: list[tuple[float, int]], cfg: GIConfig) -> int:
    """Lowest-index rule (1, 2, 3) satisfied by this ordering, or 0."""
    th = cfg.thresholds
    l, u = cfg.l, cfg.u
    if is_active(th.c):
        lo, hi = _order_stat(ranked, l + 1), _order_stat(ranked, l)
        if lo <= -th.a and hi - lo >= th.c:
            return 1
    positive = sum(1 for v, _ in ranked if v > 0)
    if l <= positive <= u and all(v <= -th.a or v >= th.b for v, _ in ranked):
        return 2
    if is_active(th.d):
        hi, lo = _order_stat(ranked, u), _order_stat(ranked, u + 1)
        if hi >= th.b and hi - lo >= th.d:
            return 3
    return 0


def gi_step(state: TrialState, cfg: GIConfig) -> Decision | None:
    ranked = ordered_wllr(state, cfg.weights)
    rule = gi_rule(ranked, cfg)
    if not rule:
        return None
    return Decision(state.n, gi_decision(ranked, cfg.l, cfg.u), _TAU_NAMES[rule])


# ---------------------------------------------------------------- drivers


def default_max_steps(alpha: float, beta: float, eta1: float | Rate, eta0: float | Rate) -> int:
    """ceil(50 |log min(alpha, beta)| / (eta1 + eta0)), unbounded rates dropped."""
    rate = sum(e for e in (eta1, eta0) if e is not UNBOUNDED)
    if rate <= 0:
        raise ValueError("need at least one finite information rate")
    return max(1, math.ceil(CAP_MULTIPLIER * abs(math.log(min(alpha, beta))) / rate))


Scan = Callable[[np.ndarray, np.ndarray], tuple[int, int]]


def _write_trace(fh: TextIO, n0: int, llr0: np.ndarray, incr: np.ndarray, logw: np.ndarray) -> None:
    path = np.cumsum(np.vstack([llr0[None, :], incr]), axis=0)[1:]
    for i, row in enumerate(path):
        for j, value in enumerate(row.tolist()):
            fh.write(f"{n0 + i + 1},{j},{value!r},{value + float(logw[j])!r}\n")


def _drive(
    scan: Scan,
    blocks: Iterable[np.ndarray],
    max_steps: int,
    logw: np.ndarray,
    trace: TextIO | None,
) -> tuple[int, np.ndarray, int]:
    """Feed blocks to ``scan`` until it fires, ``max_steps`` is reached or the blocks run out.

    Returns (T, llr at T, rule code); rule code 0 means no rule fired.
    """
    if max_steps < 1:
        raise ValueError("max_steps must be at least 1")
    llr = np.zeros(logw.size)
    n = 0
    if trace is not None:
        trace.write("n,stream,llr,wllr\n")
    for incr in blocks:
        incr = np.ascontiguousarray(incr[: max_steps - n], dtype=float)
        before = llr.copy() if trace is not None else None
        row, rule = scan(llr, incr)
        if trace is not None:
            used = incr if row < 0 else incr[: row + 1]
            _write_trace(trace, n, before, used, logw)
        if row >= 0:
            return n + row + 1, llr, rule
        n += incr.shape[0]
        if n >= max_steps:
            break
    return n, llr, 0


def _initial_order(logw: np.ndarray) -> np.ndarray:
    return np.lexsort((np.arange(logw.size), -logw)).astype(np.intp)


def _gap_engine(cfg: GapConfig, blocks, max_steps, trace, kernels) -> Decision:
    kernels = kernels or _backend.kernels
    logw = np.ascontiguousarray(cfg.weights.log)
    order = _initial_order(logw)
    m, c = cfg.m, cfg.c

    def scan(llr, incr):
        return kernels.gap_scan(llr, incr, logw, order, m, c), 1

    T, llr, rule = _drive(scan, blocks, max_steps, logw, trace)
    ranked = ordered_wllr(TrialState(llr, T), cfg.weights)
    return Decision(T, frozenset(j for _, j in ranked[:m]), GAP if rule else CAP)


def _gi_engine(cfg: GIConfig, blocks, max_steps, trace, kernels) -> Decision:
    kernels = kernels or _backend.kernels
    th = cfg.thresholds
    logw = np.ascontiguousarray(cfg.weights.log)
    order = _initial_order(logw)
    use1, use3 = is_active(th.c), is_active(th.d)
    c = th.c if use1 else math.nan
    d = th.d if use3 else math.nan

    def scan(llr, incr):
        return kernels.gi_scan(llr, incr, logw, order, cfg.l, cfg.u, th.a, th.b, c, d, use1, use3)

    T, llr, rule = _drive(scan, blocks, max_steps, logw, trace)
    ranked = ordered_wllr(TrialState(llr, T), cfg.weights)
    return Decision(T, gi_decision(ranked, cfg.l, cfg.u), _TAU_NAMES.get(rule, CAP))


def run_on_path(
    cfg: GapConfig | GIConfig,
    increments: np.ndarray,
    trace: TextIO | None = None,
    kernels=None,
) -> Decision:
    """Run a procedure on an explicit (steps, J) array of LLR increments.

    If no rule fires within the supplied steps the decision is flagged as
    truncated at the last step.
    """
    increments = np.atleast_2d(np.asarray(increments, dtype=float))
    if increments.shape[1] != cfg.weights.J or increments.shape[0] < 1:
        raise ValueError(f"increments must have shape (steps >= 1, {cfg.weights.J})")
    engine = _gap_engine if isinstance(cfg, GapConfig) else _gi_engine
    return engine(cfg, [increments], increments.shape[0], trace, kernels)


def run_gap(
    models: StreamModel | Sequence[StreamModel],
    truth: TruthAssignment,
    cfg: GapConfig,
    rng: np.random.Generator,
    max_steps: int | None = None,
    trace: TextIO | None = None,
    kernels=None,
) -> Decision:
    """Run the weighted gap procedure on fresh data drawn from ``rng``."""
    if max_steps is None:
        alpha = cfg.threshold.alpha
        max_steps = default_max_steps(alpha, alpha, *worst_case_rates(models, truth))
    return _gap_engine(cfg, IncrementStream(rng, models, truth), max_steps, trace, kernels)


def _separated_engine(cfg: GapConfig, truth: TruthAssignment, blocks, max_steps, kernels) -> int:
    kernels = kernels or _backend.kernels
    logw = np.ascontiguousarray(cfg.weights.log)
    signal = truth.mask().astype(np.uint8)
    c = cfg.c

    def scan(llr, incr):
        return kernels.separated_scan(llr, incr, logw, signal, c), 1

    T, _, _ = _drive(scan, blocks, max_steps, logw, None)
    return T


def conservative_gap_time(
    models: StreamModel | Sequence[StreamModel],
    truth: TruthAssignment,
    cfg: GapConfig,
    rng: np.random.Generator,
    max_steps: int | None = None,
    kernels=None,
) -> int:
    """First n at which every signal's WLLR beats every null's by more than c.

    Given a generator in the same state as the one handed to ``run_gap`` this
    replays the same path, so the result bounds that run's T from above.
    Returns ``max_steps`` if the cap is reached first.
    """
    if max_steps is None:
        alpha = cfg.threshold.alpha
        max_steps = default_max_steps(alpha, alpha, *worst_case_rates(models, truth))
    return _separated_engine(cfg, truth, IncrementStream(rng, models, truth), max_steps, kernels)


def conservative_time_on_path(cfg: GapConfig, truth: TruthAssignment, increments: np.ndarray, kernels=None) -> int:
    increments = np.atleast_2d(np.asarray(increments, dtype=float))
    return _separated_engine(cfg, truth, [increments], increments.shape[0], kernels)


def run_gi(
    models: StreamModel | Sequence[StreamModel],
    truth: TruthAssignment,
    cfg: GIConfig,
    rng: np.random.Generator,
    max_steps: int | None = None,
    trace: TextIO | None = None,
    kernels=None,
) -> Decision:
    """Run the weighted gap-intersection procedure on fresh data drawn from ``rng``."""
    th = cfg.thresholds
    if max_steps is None:
        max_steps = default_max_steps(th.alpha, th.beta, *worst_case_rates(models, truth))
    return _gi_engine(cfg, IncrementStream(rng, models, truth), max_steps, trace, kernels)


# ---------------------------------------------------------------- lower bounds


def lower_bound_gap(alpha: float, eta1: float, eta0: float) -> float:
    """|log alpha| / (eta1 + eta0): first-order ESS lower bound for known m."""
    if not (eta1 > 0 and eta0 > 0):
        raise ValueError("information rates must be positive")
    return abs(math.log(alpha)) / (eta1 + eta0)


def _term(kappa: float, *rates: float | Rate) -> float:
    finite = [r for r in rates if r is not UNBOUNDED]
    if any(r <= 0 for r in finite):
        raise ValueError("information rates must be positive")
    if len(finite) < len(rates) or not finite:
        # an unbounded rate in the denominator sends the term to zero
        return 0.0
    return kappa / sum(finite)


def lower_bound_gi(
    alpha: float,
    beta: float,
    size: int,
    l: int,
    u: int,
    eta1: float | Rate,
    eta0: float | Rate,
) -> float:
    """ESS lower bound for a signal count known to lie in [l, u]."""
    if not l <= size <= u:
        raise ValueError(f"|A| = {size} outside [{l}, {u}]")
    ka, kb = abs(math.log(alpha)), abs(math.log(beta))
    if size == l:
        return max(_term(kb, eta0), _term(ka, eta1, eta0))
    if size == u:
        return max(_term(ka, eta1), _term(kb, eta0, eta1))
    return max(_term(kb, eta0), _term(ka, eta1))
