import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from seqweight.model import TruthAssignment
from seqweight.thresholds import (
    INACTIVE,
    calibrate_gap,
    calibrate_gi,
    clamp_probability,
    fwe_bound_gap,
    fwe_bounds_gi,
    is_active,
)
from seqweight.weights import WeightVector, c_w

small_weights = st.lists(st.floats(0.05, 20.0), min_size=2, max_size=8).map(WeightVector)
REL = 1e-12  # float rounding slack on bounds that sit exactly at the level


def test_calibrate_gap_examples():
    assert calibrate_gap(0.05, 1, WeightVector.ones(2)).c == pytest.approx(2.995732273553991, abs=1e-12)
    th = calibrate_gap(0.05, 20, WeightVector.ones(200))
    assert th.cw == 3600
    assert th.c == pytest.approx(-math.log(0.05) + math.log(3600), abs=1e-12)
    assert round(th.c, 4) == 11.1844


@pytest.mark.parametrize("m", [0, 5])
def test_calibrate_gap_rejects_degenerate_m(m):
    with pytest.raises(ValueError):
        calibrate_gap(0.05, m, WeightVector.ones(5))


@pytest.mark.parametrize("alpha", [0, 1, -0.1, 1.5])
def test_calibrate_rejects_bad_levels(alpha):
    with pytest.raises(ValueError):
        calibrate_gap(alpha, 1, WeightVector.ones(3))
    with pytest.raises(ValueError):
        calibrate_gi(0.05, alpha, 0, 1, WeightVector.ones(3))


def test_calibrate_gi_boundary_example():
    th = calibrate_gi(0.05, 0.05, 0, 10, WeightVector.ones(10))
    expected = -math.log(0.025) + math.log(10)
    assert th.a == pytest.approx(expected, abs=1e-12)
    assert th.b == pytest.approx(expected, abs=1e-12)
    assert round(th.a, 4) == 5.9915
    assert th.c is INACTIVE and th.d is INACTIVE
    assert not is_active(th.c)


def test_calibrate_gi_interior():
    w = WeightVector([0.5, 1, 1, 2, 4])
    th = calibrate_gi(0.1, 0.2, 1, 3, w)
    assert th.b == pytest.approx(-math.log(0.05) + math.log(8.0))
    assert th.a == pytest.approx(-math.log(0.1) + math.log(4.0))
    assert th.c == pytest.approx(-math.log(0.05) + math.log(c_w(1, w)))
    assert th.d == pytest.approx(-math.log(0.1) + math.log(c_w(3, w)))


def test_calibrate_gi_empty_sums():
    th = calibrate_gi(0.05, 0.05, 3, 3, WeightVector.ones(3))
    assert th.b == -math.inf and th.c is INACTIVE and th.d is INACTIVE
    th = calibrate_gi(0.05, 0.05, 0, 0, WeightVector.ones(3))
    assert th.a == -math.inf


@pytest.mark.parametrize("lu", [(2, 1), (0, 4)])
def test_calibrate_gi_rejects_bad_interval(lu):
    with pytest.raises(ValueError):
        calibrate_gi(0.05, 0.05, *lu, WeightVector.ones(3))


def test_fwe_bound_gap_examples():
    ones = WeightVector.ones(2)
    assert fwe_bound_gap(-math.log(0.05), TruthAssignment(2, {0}), ones) == pytest.approx(0.05, rel=1e-15)
    w = WeightVector([0.5, 1, 1, 2, 4])
    th = calibrate_gap(0.05, 2, w)
    worst = TruthAssignment(5, {0, 1})
    assert fwe_bound_gap(th.c, worst, w) == pytest.approx(math.exp(-th.c) * th.cw, rel=1e-15)
    bounds = [fwe_bound_gap(c, worst, w) for c in (1, 5, 10, 40)]
    assert bounds == sorted(bounds, reverse=True)


def test_fwe_bounds_gi_boundary_example():
    th = calibrate_gi(0.05, 0.05, 0, 10, WeightVector.ones(10))
    t1, t2 = fwe_bounds_gi(th, TruthAssignment(10, {0, 1, 2}), WeightVector.ones(10))
    assert t1 == pytest.approx(math.exp(-th.b) * 7)
    assert t1 <= 0.05
    assert t2 == pytest.approx(math.exp(-th.a) * 3)


def test_fwe_bounds_gi_large_thresholds_vanish():
    th = calibrate_gi(0.05, 0.05, 1, 3, WeightVector.ones(5))
    big = type(th)(**{**th.__dict__, "a": 800.0, "b": 800.0, "c": 800.0, "d": 800.0})
    assert fwe_bounds_gi(big, TruthAssignment(5, {0}), WeightVector.ones(5)) == (0.0, 0.0)


def test_bounds_check_shapes():
    with pytest.raises(ValueError):
        fwe_bound_gap(1.0, TruthAssignment(3, {0}), WeightVector.ones(4))


@given(small_weights, st.sampled_from([0.2, 0.05, 1e-4]))
@settings(max_examples=60, deadline=None)
def test_gap_bound_holds_for_every_signal_set(weights, alpha):
    J = weights.J
    for m in range(1, J):
        c = calibrate_gap(alpha, m, weights).c
        for A in itertools.combinations(range(J), m):
            assert fwe_bound_gap(c, TruthAssignment(J, A), weights) <= alpha * (1 + REL)


@given(small_weights, st.data())
@settings(max_examples=60, deadline=None)
def test_gi_bounds_hold_for_every_admissible_set(weights, data):
    J = weights.J
    l = data.draw(st.integers(0, J))
    u = data.draw(st.integers(l, J))
    alpha, beta = data.draw(st.sampled_from([(0.05, 0.05), (0.1, 1e-3)]))
    th = calibrate_gi(alpha, beta, l, u, weights)
    for size in range(l, u + 1):
        for A in itertools.combinations(range(J), size):
            t1, t2 = fwe_bounds_gi(th, TruthAssignment(J, A), weights)
            assert t1 <= alpha * (1 + REL)
            assert t2 <= beta * (1 + REL)


@given(small_weights, st.floats(0.01, 100))
def test_calibration_scale_invariance(weights, gamma):
    J = weights.J
    scaled = weights.scaled(gamma)
    for m in range(1, J):
        assert calibrate_gap(0.05, m, scaled).c == pytest.approx(calibrate_gap(0.05, m, weights).c, abs=1e-9)
    th, ths = calibrate_gi(0.05, 0.05, 1, J - 1, weights), calibrate_gi(0.05, 0.05, 1, J - 1, scaled)
    assert ths.a + ths.b == pytest.approx(th.a + th.b, abs=1e-9)
    assert ths.b - th.b == pytest.approx(math.log(gamma), abs=1e-9)
    assert ths.c == pytest.approx(th.c, abs=1e-9)
    assert ths.d == pytest.approx(th.d, abs=1e-9)


def test_clamp_probability():
    assert clamp_probability(3.2) == 1.0
    assert clamp_probability(-0.0) == 0.0
    assert clamp_probability(0.3) == 0.3


def test_manifest_items_render_inactive():
    items = calibrate_gi(0.05, 0.05, 0, 4, WeightVector.ones(4)).manifest_items()
    assert str(items["c"]) == "inactive"
    assert np.isfinite(items["a"])
