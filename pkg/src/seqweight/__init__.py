"""Weighted gap and gap-intersection sequential multiple testing.

Streams are tested in parallel; each stream's log-likelihood ratio is shifted
by the log of a prior weight, and sampling of all streams stops together once
the weighted statistics separate. Thresholds are calibrated on the realized
weights so the family-wise error rate stays below the requested level.
"""
__version__ = "0.1.0"

from ._backend import BACKEND
from .model import UNBOUNDED, StreamModel, TrialState, TruthAssignment, kl_info, llr_increment, worst_case_rates
from .procedures import (
    Decision,
    GapConfig,
    GIConfig,
    conservative_gap_time,
    gap_step,
    gi_step,
    lower_bound_gap,
    lower_bound_gi,
    run_gap,
    run_gi,
)
from .thresholds import INACTIVE, calibrate_gap, calibrate_gi, fwe_bound_gap, fwe_bounds_gi
from .weights import WeightGenSpec, WeightVector, c_w, generate_weights, wllr

__all__ = [
    "BACKEND", "UNBOUNDED", "INACTIVE",
    "StreamModel", "TrialState", "TruthAssignment", "kl_info", "llr_increment", "worst_case_rates",
    "WeightVector", "WeightGenSpec", "wllr", "c_w", "generate_weights",
    "calibrate_gap", "calibrate_gi", "fwe_bound_gap", "fwe_bounds_gi",
    "Decision", "GapConfig", "GIConfig", "gap_step", "gi_step", "run_gap", "run_gi",
    "conservative_gap_time", "lower_bound_gap", "lower_bound_gi",
]
