import math

import numpy as np
import pytest

from seqweight import montecarlo as mc
from seqweight.montecarlo import ScenarioSpec


def small(name="s", **kw):
    base = dict(name=name, J=10, signal_fraction=0.2, mu=0.6, reps=40, master_seed=11)
    base.update(kw)
    return ScenarioSpec(**base)


def test_spec_validation():
    with pytest.raises(ValueError):
        small(J=1)
    with pytest.raises(ValueError):
        small(alpha=1.0)
    with pytest.raises(ValueError):
        small(procedure="gi")
    with pytest.raises(ValueError):
        small(procedure="gi", l=3, u=5)  # m = 2 outside [3, 5]
    with pytest.raises(ValueError):
        small(procedure="other")
    with pytest.raises(ValueError):
        small(mu=0)
    assert small().m == 2
    assert small(J=25, signal_fraction=0.1).m == 2  # 2.5 rounds to even


def test_rep_rng_is_keyed():
    a = mc.rep_rng(3, 7).random(4)
    assert np.array_equal(a, mc.rep_rng(3, 7).random(4))
    assert not np.array_equal(a, mc.rep_rng(3, 8).random(4))
    assert not np.array_equal(a, mc.rep_rng(4, 7).random(4))


def test_replication_is_repeatable():
    spec = small(eta=20, r=5)
    assert mc.run_replication(spec, 5) == mc.run_replication(spec, 5)


def test_unweighted_threshold_matches_closed_form():
    spec = small(J=20, signal_fraction=0.1)
    rec = mc.run_replication(spec, 0)
    assert rec.threshold_c == pytest.approx(-math.log(0.05) + math.log(2 * 18))


def test_worker_count_does_not_change_records():
    spec = small(eta=20, r=5, reps=24)
    assert mc.run_records(spec, 1) == mc.run_records(spec, 3)


def test_summary_fields():
    res = mc.run_scenario(small(), keep_records=True)
    Ts = [rec.T for rec in res.records]
    assert res.ess == pytest.approx(np.mean(Ts))
    assert res.ess_se == pytest.approx(np.std(Ts, ddof=1) / math.sqrt(len(Ts)))
    assert res.fwe1 == res.fwe2
    assert 0 <= res.cap_rate <= 1
    assert res.optimality_ratio == pytest.approx(res.ess / (-math.log(0.05) / 0.36))


def test_gi_scenario_scores_both_error_types():
    spec = small(procedure="gi", l=1, u=4, alpha=0.3, beta=0.3, mu=0.4)
    res = mc.run_scenario(spec, keep_records=True)
    fp = np.mean([rec.n_false_pos > 0 for rec in res.records])
    fn = np.mean([rec.n_false_neg > 0 for rec in res.records])
    assert (res.fwe1, res.fwe2) == (pytest.approx(fp), pytest.approx(fn))
    assert all(rec.rule in {"tau1", "tau2", "tau3", "truncated-cap"} for rec in res.records)


def test_inactive_threshold_written_as_empty_cell():
    spec = small(procedure="gi", l=0, u=10, reps=3)
    res = mc.run_scenario(spec, keep_records=True)
    rows = mc.records_csv([res]).splitlines()
    assert rows[0].split(",") == mc.REP_COLUMNS
    assert all(row.endswith(",") for row in rows[1:])


def test_cap_is_flagged():
    res = mc.run_scenario(small(max_steps=2, reps=5))
    assert res.cap_rate == 1.0
    assert res.ess == 2.0


def test_sweep_rejects_duplicate_names():
    with pytest.raises(ValueError):
        mc.run_sweep([small("x"), small("x", J=12)])


def test_summary_csv_layout():
    table = mc.run_sweep([small("a"), small("b", eta=0.05, r=5)])
    assert table.ok
    lines = mc.summary_csv(table.results).splitlines()
    assert lines[0].split(",") == mc.SUMMARY_COLUMNS
    assert [line.split(",")[0] for line in lines[1:]] == ["a", "b"]


def test_weighting_specs():
    specs = mc.weighting_specs((100, 200), 10, master_seed=4)
    assert len(specs) == 8
    assert {s.name for s in specs} >= {"Informative-J100", "Noisy-J200"}
    inf = next(s for s in specs if s.name == "Informative-J100")
    assert (inf.eta, inf.r, inf.m, inf.reps) == (20, 5, 10, 10)


def test_manifest_contents():
    text = mc.manifest_text([small()], validated=False)
    assert "seed_derivation=" in text and "validation_stamp=absent" in text
    assert "[s]" in text and "m=2" in text
