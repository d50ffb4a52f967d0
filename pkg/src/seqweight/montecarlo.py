"""Monte Carlo harness for the Gaussian weighted-testing study.

Each replication is a pure function of (master_seed, rep_index): it draws the
signal set uniformly among size-m subsets, draws guesses and turns them into
weights, calibrates thresholds on the realized weights, runs the procedure
and scores the decision. Replications can be spread over worker processes;
results are gathered and reduced in rep-index order, so the summary does not
depend on the worker count.
"""
from __future__ import annotations

import csv
import io
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, fields
from typing import Iterable, Sequence

import numpy as np

from . import _backend, __version__
from .model import UNBOUNDED, StreamModel, TruthAssignment, kl_info
from .procedures import GapConfig, GIConfig, lower_bound_gap, lower_bound_gi, run_gap, run_gi
from .thresholds import calibrate_gap, calibrate_gi, is_active
from .weights import WeightGenSpec, generate_weights

log = logging.getLogger(__name__)

SEED_DERIVATION = "numpy SeedSequence(entropy=master_seed, spawn_key=(rep,)) -> Philox4x64-10"

# name: (informativeness eta, strength r)
WEIGHTING_SCENARIOS = {
    "Unweighted": (1.0, 1.0),
    "Informative": (20.0, 5.0),
    "Misinformative": (0.05, 5.0),
    "Noisy": (1.0, 5.0),
}
FULL_J_GRID = (200, 250, 300, 350, 400)
DESK_J_GRID = (100, 200)
FULL_REPS = 10_000
DESK_REPS = 2_000

REP_COLUMNS = ["scenario", "J", "m", "alpha", "beta", "eta", "r", "rep", "T", "cap_hit",
               "n_false_pos", "n_false_neg", "threshold_c"]
SUMMARY_COLUMNS = ["scenario", "J", "m", "alpha", "beta", "eta", "r", "reps", "ess", "ess_se",
                   "fwe1", "fwe1_se", "fwe2", "fwe2_se", "cap_rate", "optimality_ratio"]


@dataclass(frozen=True)
class ScenarioSpec:
    name: str
    J: int
    signal_fraction: float = 0.1
    mu: float = 0.15
    alpha: float = 0.05
    beta: float = 0.05
    eta: float = 1.0
    r: float = 1.0
    procedure: str = "gap"
    l: int | None = None
    u: int | None = None
    reps: int = DESK_REPS
    master_seed: int = 0
    max_steps: int | None = None

    def __post_init__(self) -> None:
        if not self.name:
            raise ValueError("scenario name must be non-empty")
        if self.J < 2:
            raise ValueError(f"J must be at least 2, got {self.J}")
        if self.reps < 1:
            raise ValueError(f"reps must be at least 1, got {self.reps}")
        for level in ("alpha", "beta"):
            value = getattr(self, level)
            if not 0 < value < 1:
                raise ValueError(f"{level} must lie in (0, 1), got {value}")
        if not 0 <= self.master_seed < 2**64:
            raise ValueError("master_seed must be a 64-bit unsigned integer")
        StreamModel(self.mu)
        WeightGenSpec(self.eta, self.r, self.signal_fraction)
        m = self.m
        if self.procedure == "gap":
            if not 1 <= m <= self.J - 1:
                raise ValueError(f"gap procedure needs 1 <= m <= J-1; m = {m} for J = {self.J}")
        elif self.procedure == "gi":
            if self.l is None or self.u is None:
                raise ValueError("gi procedure needs both l and u")
            if not 0 <= self.l <= m <= self.u <= self.J:
                raise ValueError(f"need 0 <= l <= m <= u <= J; got l={self.l}, m={m}, u={self.u}, J={self.J}")
        else:
            raise ValueError(f"procedure must be 'gap' or 'gi', got {self.procedure!r}")

    @property
    def m(self) -> int:
        # round() sends halves to the even neighbour
        return round(self.signal_fraction * self.J)

    @property
    def model(self) -> StreamModel:
        return StreamModel(self.mu)

    @property
    def weight_spec(self) -> WeightGenSpec:
        return WeightGenSpec(self.eta, self.r, self.m / self.J)

    def etas(self) -> tuple:
        i0, i1 = kl_info(self.model)
        m = self.m
        return (i1 if m > 0 else UNBOUNDED, i0 if m < self.J else UNBOUNDED)


@dataclass(frozen=True)
class RepRecord:
    rep: int
    T: int
    cap_hit: bool
    n_false_pos: int
    n_false_neg: int
    threshold_c: float
    rule: str


@dataclass(frozen=True)
class ScenarioResult:
    spec: ScenarioSpec
    ess: float
    ess_se: float
    fwe1: float
    fwe1_se: float
    fwe2: float
    fwe2_se: float
    cap_rate: float
    optimality_ratio: float
    records: tuple[RepRecord, ...] = ()

    @property
    def reps(self) -> int:
        return self.spec.reps


def rep_rng(master_seed: int, rep: int) -> np.random.Generator:
    """Independent generator for one replication, keyed by (master_seed, rep)."""
    seq = np.random.SeedSequence(entropy=master_seed, spawn_key=(rep,))
    return np.random.Generator(np.random.Philox(seq))


def run_replication(spec: ScenarioSpec, rep: int, rng: np.random.Generator | None = None) -> RepRecord:
    rng = rng if rng is not None else rep_rng(spec.master_seed, rep)
    J, m = spec.J, spec.m
    truth = TruthAssignment(J, frozenset(rng.choice(J, size=m, replace=False).tolist()))
    weights = generate_weights(spec.weight_spec, truth, rng)
    if spec.procedure == "gap":
        th = calibrate_gap(spec.alpha, m, weights)
        decision = run_gap(spec.model, truth, GapConfig(m, th, weights), rng, spec.max_steps)
        c = th.c
    else:
        th = calibrate_gi(spec.alpha, spec.beta, spec.l, spec.u, weights)
        decision = run_gi(spec.model, truth, GIConfig(spec.l, spec.u, th, weights), rng, spec.max_steps)
        c = th.c if is_active(th.c) else math.nan
    return RepRecord(
        rep=rep,
        T=decision.T,
        cap_hit=decision.capped,
        n_false_pos=len(decision.rejected - truth.signals),
        n_false_neg=len(truth.signals - decision.rejected),
        threshold_c=c,
        rule=decision.rule,
    )


def _run_chunk(args: tuple[ScenarioSpec, int, int]) -> list[RepRecord]:
    spec, start, stop = args
    return [run_replication(spec, rep) for rep in range(start, stop)]


def _chunks(reps: int, pieces: int) -> list[tuple[int, int]]:
    bounds = np.linspace(0, reps, pieces + 1).round().astype(int)
    return [(int(a), int(b)) for a, b in zip(bounds[:-1], bounds[1:]) if b > a]


def run_records(spec: ScenarioSpec, workers: int = 1) -> list[RepRecord]:
    if workers <= 1:
        return _run_chunk((spec, 0, spec.reps))
    tasks = [(spec, a, b) for a, b in _chunks(spec.reps, workers * 4)]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        parts = list(pool.map(_run_chunk, tasks))
    records = [rec for part in parts for rec in part]
    records.sort(key=lambda rec: rec.rep)
    return records


def _proportion(count: int, n: int) -> tuple[float, float]:
    p = count / n
    return p, math.sqrt(p * (1 - p) / n)


def optimality_ratio(ess: float, spec: ScenarioSpec, etas: tuple | None = None) -> float:
    """ESS divided by the first-order lower bound for the scenario's procedure."""
    eta1, eta0 = etas if etas is not None else spec.etas()
    if spec.procedure == "gap":
        bound = lower_bound_gap(spec.alpha, eta1, eta0)
    else:
        bound = lower_bound_gi(spec.alpha, spec.beta, spec.m, spec.l, spec.u, eta1, eta0)
    if not bound > 0:
        raise ValueError("lower bound is zero; ratio undefined")
    return ess / bound


def summarize(spec: ScenarioSpec, records: Sequence[RepRecord], keep_records: bool = False) -> ScenarioResult:
    n = len(records)
    times = np.array([rec.T for rec in records], dtype=float)
    ess = math.fsum(times) / n
    ess_se = float(np.std(times, ddof=1)) / math.sqrt(n) if n > 1 else math.nan
    if spec.procedure == "gap":
        # |D| = m forces a false negative for every false positive
        errors = sum(1 for rec in records if rec.n_false_pos or rec.n_false_neg)
        fwe1, fwe1_se = fwe2, fwe2_se = _proportion(errors, n)
    else:
        fwe1, fwe1_se = _proportion(sum(1 for rec in records if rec.n_false_pos), n)
        fwe2, fwe2_se = _proportion(sum(1 for rec in records if rec.n_false_neg), n)
    cap_rate = sum(1 for rec in records if rec.cap_hit) / n
    return ScenarioResult(
        spec=spec, ess=ess, ess_se=ess_se,
        fwe1=fwe1, fwe1_se=fwe1_se, fwe2=fwe2, fwe2_se=fwe2_se,
        cap_rate=cap_rate, optimality_ratio=optimality_ratio(ess, spec),
        records=tuple(records) if keep_records else (),
    )


def run_scenario(spec: ScenarioSpec, workers: int = 1, keep_records: bool = False) -> ScenarioResult:
    records = run_records(spec, workers)
    result = summarize(spec, records, keep_records)
    if result.cap_rate:
        log.warning("%s: %.2f%% of replications hit the step cap", spec.name, 100 * result.cap_rate)
    return result


@dataclass
class SweepTable:
    results: list[ScenarioResult]
    failures: dict[str, str]

    @property
    def ok(self) -> bool:
        return not self.failures


def check_unique(specs: Iterable[ScenarioSpec]) -> None:
    seen: set[str] = set()
    for spec in specs:
        if spec.name in seen:
            raise ValueError(f"duplicate scenario name {spec.name!r}")
        seen.add(spec.name)


def run_sweep(specs: Sequence[ScenarioSpec], workers: int = 1, keep_records: bool = False) -> SweepTable:
    """Run every scenario; a failing scenario is reported, not fatal."""
    check_unique(specs)
    table = SweepTable([], {})
    for spec in specs:
        log.info("running %s (J=%d, reps=%d)", spec.name, spec.J, spec.reps)
        try:
            table.results.append(run_scenario(spec, workers, keep_records))
        except Exception as exc:  # noqa: BLE001 - reported per scenario
            log.error("scenario %s failed: %s", spec.name, exc)
            table.failures[spec.name] = f"{type(exc).__name__}: {exc}"
    return table


def weighting_specs(
    J_grid: Iterable[int] = DESK_J_GRID,
    reps: int = DESK_REPS,
    master_seed: int = 0,
    **overrides,
) -> list[ScenarioSpec]:
    """The four weighting scenarios crossed with a grid of J, all at m/J = 0.1."""
    return [
        ScenarioSpec(name=f"{name}-J{J}", J=J, eta=eta, r=r, reps=reps, master_seed=master_seed, **overrides)
        for J in J_grid
        for name, (eta, r) in WEIGHTING_SCENARIOS.items()
    ]


# ---------------------------------------------------------------- output files


def _fmt(x: object) -> str:
    if isinstance(x, bool):
        return str(int(x))
    if isinstance(x, float):
        if math.isnan(x):
            return ""
        return format(x, ".12g")
    return str(x)


def summary_rows(results: Iterable[ScenarioResult]) -> list[list[str]]:
    rows = []
    for res in results:
        s = res.spec
        rows.append([_fmt(v) for v in (
            s.name, s.J, s.m, s.alpha, s.beta, s.eta, s.r, s.reps,
            res.ess, res.ess_se, res.fwe1, res.fwe1_se, res.fwe2, res.fwe2_se,
            res.cap_rate, res.optimality_ratio,
        )])
    return rows


def _csv(header: list[str], rows: Iterable[list[str]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def summary_csv(results: Iterable[ScenarioResult]) -> str:
    return _csv(SUMMARY_COLUMNS, summary_rows(results))


def records_csv(results: Iterable[ScenarioResult]) -> str:
    rows = []
    for res in results:
        s = res.spec
        for rec in res.records:
            rows.append([_fmt(v) for v in (
                s.name, s.J, s.m, s.alpha, s.beta, s.eta, s.r, rec.rep, rec.T, rec.cap_hit,
                rec.n_false_pos, rec.n_false_neg, rec.threshold_c,
            )])
    return _csv(REP_COLUMNS, rows)


def manifest_text(specs: Iterable[ScenarioSpec], validated: bool, extra: dict[str, object] | None = None) -> str:
    """key=value run manifest; one [section] per scenario."""
    lines = [
        f"code_version={__version__}",
        f"backend={_backend.BACKEND}",
        f"seed_derivation={SEED_DERIVATION}",
        f"validation_stamp={'present' if validated else 'absent'}",
    ]
    for key, value in (extra or {}).items():
        lines.append(f"{key}={_fmt(value)}")
    for spec in specs:
        lines.append("")
        lines.append(f"[{spec.name}]")
        for f in fields(spec):
            if f.name == "name":
                continue
            value = getattr(spec, f.name)
            if value is not None:
                lines.append(f"{f.name}={_fmt(value)}")
        lines.append(f"m={spec.m}")
    return "\n".join(lines) + "\n"
