"""Brute-force validators, kept off the hot path.

Closed forms are checked against subset enumeration, and the engine's
stepping rules against naive reimplementations that re-sort everything at
every step with plain Python.
"""
from __future__ import annotations

import csv
import io
import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from . import _backend
from .model import IncrementStream, StreamModel, TrialState, TruthAssignment
from .procedures import (
    GAP,
    GapConfig,
    GIConfig,
    Decision,
    gap_step,
    gi_decision,
    run_gap,
    run_gi,
)
from .thresholds import calibrate_gap, calibrate_gi
from .weights import (
    WeightVector,
    c_w,
    c_w_bruteforce,
    max_complement_weight_sum,
    max_reciprocal_weight_sum,
)

ENUMERATION_MAX_J = 12


@dataclass
class OracleReport:
    name: str
    checked: int = 0
    mismatches: list[tuple[str, object, object]] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.mismatches

    def record(self, description: str, expected: object, got: object) -> None:
        self.checked += 1
        if expected != got:
            self.mismatches.append((description, expected, got))

    def to_text(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        lines = [f"{status} {self.name}: {self.checked} checked, {len(self.mismatches)} mismatches"]
        lines += [f"  {desc}: expected {exp!r}, got {got!r}" for desc, exp, got in self.mismatches[:20]]
        return "\n".join(lines)

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["oracle", "input", "expected", "got"])
        for desc, exp, got in self.mismatches:
            writer.writerow([self.name, desc, exp, got])
        return buf.getvalue()


def _random_weights(rng: np.random.Generator, J: int) -> WeightVector:
    # log-uniform over two decades, with occasional ties
    w = np.exp(rng.uniform(-math.log(10), math.log(10), J))
    if J > 1 and rng.random() < 0.2:
        w[rng.integers(J)] = w[rng.integers(J)]
    return WeightVector(w)


def _check_j_max(J_max: int) -> None:
    if J_max > ENUMERATION_MAX_J:
        raise ValueError(f"J_max = {J_max} exceeds enumeration guard {ENUMERATION_MAX_J}")


def verify_cw_closed_form(J_max: int = 10, trials: int = 200, rng: np.random.Generator | None = None) -> OracleReport:
    """Closed-form C_W against enumeration for every m, on random and all-one weights."""
    _check_j_max(J_max)
    rng = rng if rng is not None else np.random.default_rng(0)
    report = OracleReport("c_w closed form")
    for J in range(1, J_max + 1):
        ones = WeightVector.ones(J)
        for m in range(J + 1):
            report.record(f"ones J={J} m={m}", float(m * (J - m)), c_w(m, ones))
    for t in range(trials):
        J = int(rng.integers(1, J_max + 1))
        weights = _random_weights(rng, J)
        for m in range(J + 1):
            report.record(f"trial {t} J={J} m={m}", c_w_bruteforce(m, weights), c_w(m, weights))
    return report


def _enumerate_size_maxima(w: np.ndarray) -> tuple[list[float], list[float]]:
    """Per subset size s, the largest complement sum and largest reciprocal sum."""
    J = w.size
    comp = [0.0] * (J + 1)
    recip = [0.0] * (J + 1)
    for size in range(J + 1):
        for subset in itertools.combinations(range(J), size):
            chosen = set(subset)
            comp[size] = max(comp[size], math.fsum(w[j] for j in range(J) if j not in chosen))
            recip[size] = max(recip[size], math.fsum(1.0 / w[k] for k in subset))
    return comp, recip


def verify_gi_maxima(J_max: int = 10, trials: int = 200, rng: np.random.Generator | None = None) -> OracleReport:
    """Closed-form interval maxima against enumeration over all |A| in [l, u]."""
    _check_j_max(J_max)
    rng = rng if rng is not None else np.random.default_rng(1)
    report = OracleReport("gap-intersection maxima")
    for t in range(trials):
        J = int(rng.integers(1, J_max + 1))
        weights = WeightVector.ones(J) if t == 0 else _random_weights(rng, J)
        by_size = _enumerate_size_maxima(weights.w)
        for l in range(J + 1):
            for u in range(l, J + 1):
                comp = max(by_size[0][l : u + 1])
                recip = max(by_size[1][l : u + 1])
                report.record(f"trial {t} J={J} l={l} u={u} complement", comp, max_complement_weight_sum(l, weights))
                report.record(f"trial {t} J={J} l={l} u={u} reciprocal", recip, max_reciprocal_weight_sum(u, weights))
    return report


# ---------------------------------------------------------------- naive stepping rules


def _naive_ranking(state: TrialState, weights: WeightVector) -> list[tuple[float, int]]:
    values = [float(x) + float(lw) for x, lw in zip(state.llr, weights.log)]
    return sorted(((v, j) for j, v in enumerate(values)), key=lambda vj: (-vj[0], vj[1]))


def reference_gap_step(state: TrialState, cfg: GapConfig) -> Decision | None:
    ranked = _naive_ranking(state, cfg.weights)
    if ranked[cfg.m - 1][0] - ranked[cfg.m][0] >= cfg.c:
        return Decision(state.n, frozenset(j for _, j in ranked[: cfg.m]), GAP)
    return None


def reference_intersection_step(state: TrialState, a: float, b: float, weights: WeightVector) -> frozenset[int] | None:
    """Pure intersection rule: stop once every WLLR is outside (-a, b); reject the positives."""
    ranked = _naive_ranking(state, weights)
    if all(v <= -a or v >= b for v, _ in ranked):
        return frozenset(j for v, j in ranked if v > 0)
    return None


def _replay(stream: IncrementStream, step, max_steps: int):
    state = TrialState.start(stream.J)
    for block in stream:
        for row in block:
            state.advance(row)
            out = step(state)
            if out is not None or state.n >= max_steps:
                return state.n, out
    raise AssertionError("increment stream ended")  # pragma: no cover


def reference_run_gap(models, truth, cfg: GapConfig, rng, max_steps: int) -> tuple[int, Decision | None]:
    return _replay(IncrementStream(rng, models, truth), lambda s: reference_gap_step(s, cfg), max_steps)


def reference_run_intersection(models, truth, cfg: GIConfig, rng, max_steps: int) -> tuple[int, frozenset[int] | None]:
    th = cfg.thresholds
    return _replay(
        IncrementStream(rng, models, truth),
        lambda s: reference_intersection_step(s, th.a, th.b, cfg.weights),
        max_steps,
    )


def verify_gap_step(states: int = 10_000, J_max: int = 50, rng: np.random.Generator | None = None) -> OracleReport:
    """gap_step against the naive rule on random states, including ties and exact-boundary gaps."""
    rng = rng if rng is not None else np.random.default_rng(2)
    report = OracleReport("gap_step differential")
    for t in range(states):
        J = int(rng.integers(2, J_max + 1))
        m = int(rng.integers(1, J))
        weights = _random_weights(rng, J) if t % 3 else WeightVector.ones(J)
        kind = t % 4
        if kind == 0:
            llr = np.round(rng.normal(0, 2, J))  # many ties
        else:
            llr = rng.normal(0, 5, J)
        state = TrialState(llr, n=int(rng.integers(1, 1000)))
        th = calibrate_gap(0.05, m, weights)
        if kind == 3:
            ranked = _naive_ranking(state, weights)
            # the exact observed gap as the threshold: both rules must stop
            c = ranked[m - 1][0] - ranked[m][0]
            th = type(th)(c=float(c), alpha=th.alpha, m=m, cw=th.cw)
        elif kind == 2:
            th = type(th)(c=float(rng.uniform(0, 5)), alpha=th.alpha, m=m, cw=th.cw)
        cfg = GapConfig(m, th, weights)
        report.record(f"state {t} J={J} m={m}", reference_gap_step(state, cfg), gap_step(state, cfg))
    return report


def verify_engines(trials: int = 100, rng: np.random.Generator | None = None) -> OracleReport:
    """Compiled scanners, numpy fallback and the naive step rule on shared seeded paths."""
    rng = rng if rng is not None else np.random.default_rng(3)
    report = OracleReport(f"engine differential ({_backend.BACKEND} vs python vs naive)")
    model = StreamModel(0.5)
    for t in range(trials):
        J = int(rng.integers(2, 12))
        m = int(rng.integers(1, J))
        truth = TruthAssignment(J, frozenset(rng.choice(J, m, replace=False).tolist()))
        weights = _random_weights(rng, J)
        seed = int(rng.integers(2**32))
        cfg = GapConfig(m, calibrate_gap(0.05, m, weights), weights)
        fast = run_gap(model, truth, cfg, np.random.default_rng(seed), max_steps=5000)
        slow = run_gap(model, truth, cfg, np.random.default_rng(seed), max_steps=5000, kernels=_backend.fallback)
        _, naive = reference_run_gap(model, truth, cfg, np.random.default_rng(seed), 5000)
        report.record(f"gap trial {t} backends", slow, fast)
        report.record(f"gap trial {t} naive", naive, fast)

        l = int(rng.integers(0, J + 1))
        u = int(rng.integers(l, J + 1))
        gcfg = GIConfig(l, u, calibrate_gi(0.05, 0.05, l, u, weights), weights)
        fast = run_gi(model, truth, gcfg, np.random.default_rng(seed), max_steps=5000)
        slow = run_gi(model, truth, gcfg, np.random.default_rng(seed), max_steps=5000, kernels=_backend.fallback)
        report.record(f"gi trial {t} l={l} u={u} backends", slow, fast)
        if l == 0 and u == J:
            n, rejected = reference_run_intersection(model, truth, gcfg, np.random.default_rng(seed), 5000)
            report.record(f"gi trial {t} intersection", (n, rejected), (fast.T, fast.rejected))
    return report


def verify_gi_decision(states: int = 2000, rng: np.random.Generator | None = None) -> OracleReport:
    """Truncated GI decision: always within [l, u] and nested in the WLLR ranking."""
    rng = rng if rng is not None else np.random.default_rng(4)
    report = OracleReport("gap-intersection decision size")
    for t in range(states):
        J = int(rng.integers(1, 20))
        l = int(rng.integers(0, J + 1))
        u = int(rng.integers(l, J + 1))
        weights = _random_weights(rng, J)
        ranked = _naive_ranking(TrialState(rng.normal(0, 3, J)), weights)
        D = gi_decision(ranked, l, u)
        top = frozenset(j for _, j in ranked[: len(D)])
        report.record(f"state {t} l={l} u={u} size ok", True, l <= len(D) <= u)
        report.record(f"state {t} l={l} u={u} top-ranked", top, D)
    return report


def run_all(rng_seed: int = 0) -> list[OracleReport]:
    seeds = np.random.SeedSequence(rng_seed).spawn(5)
    gens = [np.random.default_rng(s) for s in seeds]
    return [
        verify_cw_closed_form(10, 200, gens[0]),
        verify_gi_maxima(10, 200, gens[1]),
        verify_gap_step(10_000, 50, gens[2]),
        verify_gi_decision(2000, gens[3]),
        verify_engines(100, gens[4]),
    ]
