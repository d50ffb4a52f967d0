"""Stopping thresholds with FWE guarantees, and the matching FWE upper bounds.

Thresholds sit exactly at the smallest value the union/change-of-measure
bound allows. A gap rule whose worst-case constant is zero (l = 0 or u = J)
is disabled and carries the ``INACTIVE`` tag instead of a number.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

from .model import TruthAssignment
from .weights import WeightVector, c_w, max_complement_weight_sum, max_reciprocal_weight_sum


class Inactive(enum.Enum):
    INACTIVE = "inactive"

    def __str__(self) -> str:
        return "inactive"


INACTIVE = Inactive.INACTIVE
Threshold = float | Inactive


def _check_level(name: str, value: float) -> None:
    if not 0 < value < 1:
        raise ValueError(f"{name} must lie in (0, 1), got {value}")


def _log_or_neg_inf(x: float) -> float:
    return math.log(x) if x > 0 else -math.inf


def is_active(th: Threshold) -> bool:
    return th is not INACTIVE


@dataclass(frozen=True)
class GapThreshold:
    c: float
    alpha: float
    m: int
    cw: float


@dataclass(frozen=True)
class GIThresholds:
    a: float
    b: float
    c: Threshold
    d: Threshold
    alpha: float
    beta: float
    l: int
    u: int
    complement_sum: float
    reciprocal_sum: float
    cw_l: float
    cw_u: float

    def manifest_items(self) -> dict[str, object]:
        return {
            "alpha": self.alpha, "beta": self.beta, "l": self.l, "u": self.u,
            "a": self.a, "b": self.b, "c": self.c, "d": self.d,
            "cw_l": self.cw_l, "cw_u": self.cw_u,
        }


def calibrate_gap(alpha: float, m: int, weights: WeightVector) -> GapThreshold:
    """c = |log alpha| + log C_W(m, J), recomputed for the given weights."""
    _check_level("alpha", alpha)
    J = weights.J
    if not 1 <= m <= J - 1:
        raise ValueError(f"gap procedure needs 1 <= m <= J-1, got m = {m}, J = {J}")
    cw = c_w(m, weights)
    return GapThreshold(c=abs(math.log(alpha)) + math.log(cw), alpha=alpha, m=m, cw=cw)


def calibrate_gi(alpha: float, beta: float, l: int, u: int, weights: WeightVector) -> GIThresholds:
    _check_level("alpha", alpha)
    _check_level("beta", beta)
    J = weights.J
    if not 0 <= l <= u <= J:
        raise ValueError(f"need 0 <= l <= u <= J, got l = {l}, u = {u}, J = {J}")
    kappa_a = abs(math.log(alpha / 2))
    kappa_b = abs(math.log(beta / 2))
    comp = max_complement_weight_sum(l, weights)
    recip = max_reciprocal_weight_sum(u, weights)
    cw_l = c_w(l, weights)
    cw_u = c_w(u, weights)
    return GIThresholds(
        a=kappa_b + _log_or_neg_inf(recip),
        b=kappa_a + _log_or_neg_inf(comp),
        c=kappa_a + math.log(cw_l) if cw_l > 0 else INACTIVE,
        d=kappa_b + math.log(cw_u) if cw_u > 0 else INACTIVE,
        alpha=alpha, beta=beta, l=l, u=u,
        complement_sum=comp, reciprocal_sum=recip, cw_l=cw_l, cw_u=cw_u,
    )


def _set_sums(truth: TruthAssignment, weights: WeightVector) -> tuple[float, float]:
    if truth.J != weights.J:
        raise ValueError(f"truth has J = {truth.J} but weights have J = {weights.J}")
    w = weights.w
    comp = math.fsum(w[j] for j in sorted(truth.nulls))
    recip = math.fsum(1.0 / w[k] for k in sorted(truth.signals))
    return comp, recip


def _exp_term(threshold: float, total: float) -> float:
    # an empty sum contributes nothing, whatever the threshold
    if total == 0:
        return 0.0
    return math.exp(-threshold) * total


def fwe_bound_gap(c: float, truth: TruthAssignment, weights: WeightVector) -> float:
    """exp(-c) * sum_{A^c} W * sum_A 1/W; may exceed 1."""
    comp, recip = _set_sums(truth, weights)
    return _exp_term(c, comp * recip)


def fwe_bounds_gi(th: GIThresholds, truth: TruthAssignment, weights: WeightVector) -> tuple[float, float]:
    """(type I, type II) upper bounds for the gap-intersection procedure."""
    comp, recip = _set_sums(truth, weights)
    size = truth.m
    type1 = _exp_term(th.b, comp)
    type2 = _exp_term(th.a, recip)
    if size == th.l and is_active(th.c):
        type1 += _exp_term(th.c, comp * recip)
    if size == th.u and is_active(th.d):
        type2 += _exp_term(th.d, comp * recip)
    return type1, type2


def clamp_probability(bound: float) -> float:
    """Reporting-level clamp of a bound into [0, 1]."""
    return min(1.0, max(0.0, bound))
