"""Hypothesis weights, the weighted LLR shift, and weight-derived constants."""
from __future__ import annotations

import csv
import io
import itertools
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable

import numpy as np

from .model import TruthAssignment

BRUTEFORCE_MAX_J = 20


@dataclass(frozen=True, eq=False)
class WeightVector:
    """Positive weights W_1..W_J; the library never renormalizes them."""

    w: np.ndarray

    def __init__(self, w: Iterable[float]) -> None:
        arr = np.array(list(w) if not isinstance(w, np.ndarray) else w, dtype=float).reshape(-1)
        if arr.size == 0:
            raise ValueError("weight vector must be non-empty")
        if not np.all(np.isfinite(arr)) or np.any(arr <= 0):
            raise ValueError("weights must be positive and finite")
        arr.setflags(write=False)
        object.__setattr__(self, "w", arr)

    @classmethod
    def ones(cls, J: int) -> "WeightVector":
        return cls(np.ones(J))

    def __len__(self) -> int:
        return self.w.size

    def __eq__(self, other: object) -> bool:
        return isinstance(other, WeightVector) and np.array_equal(self.w, other.w)

    def __hash__(self) -> int:
        return hash(self.w.tobytes())

    @property
    def J(self) -> int:
        return self.w.size

    def scaled(self, gamma: float) -> "WeightVector":
        return WeightVector(self.w * gamma)

    @cached_property
    def log(self) -> np.ndarray:
        out = np.log(self.w)
        out.setflags(write=False)
        return out

    @cached_property
    def ascending(self) -> np.ndarray:
        """Weights sorted ascending; ties keep stream-index order."""
        out = self.w[np.argsort(self.w, kind="stable")]
        out.setflags(write=False)
        return out

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["stream_index", "weight"])
        for j, wj in enumerate(self.w):
            writer.writerow([j, repr(float(wj))])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "WeightVector":
        rows = list(csv.DictReader(io.StringIO(text)))
        rows.sort(key=lambda row: int(row["stream_index"]))
        return cls(float(row["weight"]) for row in rows)


def wllr(lam: float, weight: float) -> float:
    """Weighted LLR: the LLR shifted by log(weight)."""
    if not weight > 0:
        raise ValueError(f"weight must be positive, got {weight}")
    return lam + math.log(weight)


def _check_count(name: str, k: int, J: int) -> None:
    if not 0 <= k <= J:
        raise ValueError(f"{name} = {k} outside [0, {J}]")


def max_complement_weight_sum(l: int, weights: WeightVector) -> float:
    """Sum of the J - l largest weights."""
    _check_count("l", l, weights.J)
    return math.fsum(weights.ascending[l:])


def max_reciprocal_weight_sum(u: int, weights: WeightVector) -> float:
    """Sum of reciprocals of the u smallest weights."""
    _check_count("u", u, weights.J)
    return math.fsum(1.0 / weights.ascending[:u])


def c_w(m: int, weights: WeightVector) -> float:
    """Price of weighting: worst case over |A| = m of sum_{A^c} W * sum_A 1/W.

    The maximum is attained by putting the m smallest weights in A. Zero at
    m = 0 and m = J.
    """
    _check_count("m", m, weights.J)
    if m in (0, weights.J):
        return 0.0
    return max_complement_weight_sum(m, weights) * max_reciprocal_weight_sum(m, weights)


def c_w_bruteforce(m: int, weights: WeightVector) -> float:
    """Enumerate every size-m subset and take the maximum product."""
    J = weights.J
    _check_count("m", m, J)
    if J > BRUTEFORCE_MAX_J:
        raise ValueError(f"J = {J} too large to enumerate (limit {BRUTEFORCE_MAX_J}); use c_w")
    w = weights.w
    best = 0.0
    for subset in itertools.combinations(range(J), m):
        chosen = set(subset)
        comp = math.fsum(w[j] for j in range(J) if j not in chosen)
        recip = math.fsum(1.0 / w[k] for k in subset)
        best = max(best, comp * recip)
    return best


@dataclass(frozen=True)
class WeightGenSpec:
    """Guess-based weight generator: informativeness eta, strength r."""

    eta: float
    r: float
    signal_fraction: float

    def __post_init__(self) -> None:
        if not self.eta >= 0:
            raise ValueError(f"eta must be >= 0, got {self.eta}")
        if not self.r >= 1:
            raise ValueError(f"r must be >= 1, got {self.r}")
        if not 0 < self.signal_fraction < 1:
            raise ValueError(f"signal_fraction must lie in (0, 1), got {self.signal_fraction}")


def guess_probabilities(spec: WeightGenSpec) -> tuple[float, float]:
    """P(U=1 | signal) and P(U=1 | null)."""
    frac = spec.signal_fraction
    denom = 1.0 + (spec.eta - 1.0) * frac
    if denom <= 0:
        raise ValueError(f"non-positive normalizer {denom} for eta={spec.eta}, m/J={frac}")
    p0 = frac / denom
    if p0 > 1.0:
        raise ValueError(f"eta={spec.eta} with m/J={frac} gives P(U=1 | null) = {p0} > 1")
    return spec.eta * p0, p0


def weights_from_guesses(guesses: np.ndarray, r: float) -> WeightVector:
    """W_j = (1 + (r-1) U_j) / (1 + (r-1) mean(U)); mean weight is 1."""
    u = np.asarray(guesses, dtype=float)
    if r == 1:
        return WeightVector.ones(u.size)
    raw = 1.0 + (r - 1.0) * u
    return WeightVector(raw / (1.0 + (r - 1.0) * u.mean()))


def draw_guesses(spec: WeightGenSpec, truth: TruthAssignment, rng: np.random.Generator) -> np.ndarray:
    p1, p0 = guess_probabilities(spec)
    prob = np.where(truth.mask(), p1, p0)
    return (rng.random(truth.J) < prob).astype(np.int8)


def generate_weights(
    spec: WeightGenSpec, truth: TruthAssignment, rng: np.random.Generator
) -> WeightVector:
    """Draw one guess per stream and turn the guesses into mean-one weights.

    Guesses are drawn even when r = 1 so the generator is consumed the same
    way in every scenario.
    """
    return weights_from_guesses(draw_guesses(spec, truth, rng), spec.r)
