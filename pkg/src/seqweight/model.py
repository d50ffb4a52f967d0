"""Per-stream statistical model for the Gaussian mean-shift testbed.

Each stream j tests N(0, 1) against N(mu1_j, 1). The cumulative
log-likelihood ratio of a stream is a random walk whose drift is +I1 under
the alternative and -I0 under the null.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Iterator, Sequence

import numpy as np

GAUSSIAN_MEAN = "gaussian-mean"
MODEL_KINDS = (GAUSSIAN_MEAN,)


class Rate(enum.Enum):
    """Tag for an information rate taken as a minimum over an empty set."""

    UNBOUNDED = "unbounded"


UNBOUNDED = Rate.UNBOUNDED


@dataclass(frozen=True)
class StreamModel:
    mu1: float
    kind: str = GAUSSIAN_MEAN

    def __post_init__(self) -> None:
        if self.kind not in MODEL_KINDS:
            raise ValueError(f"unknown model kind {self.kind!r}; expected one of {MODEL_KINDS}")
        if not math.isfinite(self.mu1):
            raise ValueError(f"mu1 must be finite, got {self.mu1}")
        if self.mu1 == 0:
            raise ValueError("mu1 = 0 gives zero KL information; the hypotheses coincide")

    @property
    def half_square(self) -> float:
        return 0.5 * self.mu1 * self.mu1


@dataclass(frozen=True)
class TruthAssignment:
    """Number of streams and the (0-based) indices of true signals."""

    J: int
    signals: frozenset[int] = field(default_factory=frozenset)

    def __post_init__(self) -> None:
        if self.J < 1:
            raise ValueError("J must be at least 1")
        object.__setattr__(self, "signals", frozenset(int(k) for k in self.signals))
        bad = [k for k in self.signals if not 0 <= k < self.J]
        if bad:
            raise ValueError(f"signal indices {sorted(bad)} outside [0, {self.J})")

    @property
    def m(self) -> int:
        return len(self.signals)

    @property
    def nulls(self) -> frozenset[int]:
        return frozenset(range(self.J)) - self.signals

    def mask(self) -> np.ndarray:
        out = np.zeros(self.J, dtype=bool)
        out[list(self.signals)] = True
        return out


@dataclass
class TrialState:
    """Time index and cumulative LLR of every stream; owned by one trial."""

    llr: np.ndarray
    n: int = 0

    @classmethod
    def start(cls, J: int) -> "TrialState":
        return cls(np.zeros(J))

    @property
    def J(self) -> int:
        return len(self.llr)

    def advance(self, increments: np.ndarray) -> None:
        increments = np.asarray(increments, dtype=float)
        if increments.shape != self.llr.shape:
            raise ValueError(f"expected {self.llr.shape[0]} increments, got shape {increments.shape}")
        self.llr = self.llr + increments
        self.n += 1


def llr_increment(x: float, model: StreamModel) -> float:
    """log f1(x)/f0(x) for N(mu1, 1) against N(0, 1)."""
    if not math.isfinite(x):
        raise ValueError(f"non-finite observation {x!r}")
    return model.mu1 * x - model.half_square


def kl_info(model: StreamModel) -> tuple[float, float]:
    """Return (I0, I1); both equal mu1**2 / 2 for the Gaussian mean shift."""
    info = model.half_square
    return info, info


def sample_increment(rng: np.random.Generator, model: StreamModel, is_signal: bool) -> float:
    """Draw one observation from N(mu1, 1) if ``is_signal`` else N(0, 1)."""
    mean = model.mu1 if is_signal else 0.0
    return mean + float(rng.standard_normal())


def as_models(models: StreamModel | Sequence[StreamModel], J: int) -> list[StreamModel]:
    if isinstance(models, StreamModel):
        return [models] * J
    models = list(models)
    if len(models) != J:
        raise ValueError(f"got {len(models)} stream models for J = {J}")
    return models


def worst_case_rates(
    models: StreamModel | Sequence[StreamModel], truth: TruthAssignment
) -> tuple[float | Rate, float | Rate]:
    """Minimum I1 over signals and minimum I0 over nulls.

    A minimum over an empty set is reported as ``UNBOUNDED``.
    """
    models = as_models(models, truth.J)
    infos = [kl_info(md) for md in models]
    eta1 = min((infos[k][1] for k in truth.signals), default=UNBOUNDED)
    eta0 = min((infos[j][0] for j in truth.nulls), default=UNBOUNDED)
    return eta1, eta0


class IncrementStream:
    """Yields blocks of LLR increments, one row per time step, all J streams per row.

    Block sizes follow a fixed schedule so two streams built from generators
    in the same state produce identical paths whatever the consumer does.
    """

    SCHEDULE = (32, 64, 128, 256)

    def __init__(
        self,
        rng: np.random.Generator,
        models: StreamModel | Sequence[StreamModel],
        truth: TruthAssignment,
    ) -> None:
        models = as_models(models, truth.J)
        self.rng = rng
        self.J = truth.J
        self._mu1 = np.array([md.mu1 for md in models])
        self._half = np.array([md.half_square for md in models])
        self._mean = np.where(truth.mask(), self._mu1, 0.0)

    def __iter__(self) -> Iterator[np.ndarray]:
        k = 0
        while True:
            size = self.SCHEDULE[min(k, len(self.SCHEDULE) - 1)]
            x = self.rng.standard_normal((size, self.J)) + self._mean
            yield self._mu1 * x - self._half
            k += 1
