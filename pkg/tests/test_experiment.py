import math
from dataclasses import replace

import pytest

from ltsgsprt.batch import SchemeConfig
from ltsgsprt.experiment import ExperimentSpec, compare_schemes, grid_points, run_point, run_sweep
from ltsgsprt.model import Hypothesis, MeanShiftProblem, TruthPoint

MS = MeanShiftProblem()
THETA = TruthPoint(Hypothesis.H1, 0.4)
A3 = -math.log(1e-4)


def spec(**kw):
    base = dict(problem=MS, scheme=SchemeConfig("centralized"), L=2, truth=THETA,
                replications=2000, seed=4)
    base.update(kw)
    return ExperimentSpec(**base)


def test_single_censored_replication():
    s = spec(replications=1, cap=1, threshold_source="explicit", A=50.0, B=50.0, error_probes=False)
    out = run_sweep(s)
    assert len(out) == 1
    assert out[0].censored_count == 1
    assert out[0].failed
    assert math.isnan(out[0].mean_stopping_time)


def test_censoring_above_one_percent_fails():
    s = spec(replications=200, cap=3, threshold_source="explicit", A=9.0, B=9.0)
    (summary,) = run_sweep(s)
    assert summary.failed and "censored" in summary.note


def test_same_seed_identical():
    s = spec(scheme=SchemeConfig("lts", a=1.5, b=1.5), sweep_axis="alpha", grid=(1e-1, 1e-2))
    assert run_sweep(s) == run_sweep(s)


def test_threads_do_not_change_results():
    s = spec(scheme=SchemeConfig("uniform", T0=2, lam=0.6), replications=999)
    assert run_sweep(s) == run_sweep(replace(s, threads=4))


def test_centralized_matches_prediction():
    s = spec(threshold_source="explicit", A=A3, B=A3, replications=10_000, error_probes=False)
    (r,) = run_sweep(s)
    assert r.censored_count == 0
    assert 0.75 <= r.mean_stopping_time / 57.56 <= 1.25
    assert r.predicted_stopping_time == pytest.approx(57.56, abs=0.01)
    assert r.stderr >= 0


def test_alpha_sweep_monotone():
    s = spec(sweep_axis="alpha", grid=(1e-1, 1e-2, 1e-3), target_beta=1e-3, replications=4000)
    out = run_sweep(s)
    means = [r.mean_stopping_time for r in out]
    assert means == sorted(means)
    for r in out:
        assert 0.0 <= r.alpha_ci[0] <= r.empirical_alpha <= r.alpha_ci[1] <= 1.0


def test_sensor_count_scaling():
    s = spec(sweep_axis="L", grid=(1, 2, 4, 8), replications=4000, error_probes=False)
    out = run_sweep(s)
    assert [r.L for r in out] == [1, 2, 4, 8]
    ratio = out[0].mean_stopping_time / out[1].mean_stopping_time
    assert 1.6 <= ratio <= 2.4
    means = [r.mean_stopping_time for r in out]
    assert means == sorted(means, reverse=True)


def test_truth_sweep_period_decreases():
    s = spec(scheme=SchemeConfig("lts", a=1.25, b=1.25), sweep_axis="truth",
             grid=(0.4, 0.8, 1.2, 2.0), replications=2000, error_probes=False)
    out = run_sweep(s)
    taus = [r.mean_inter_comm_period for r in out]
    assert taus == sorted(taus, reverse=True)
    assert taus[0] > 5 and taus[-1] < 3


def test_truth_sweep_infers_hypothesis():
    pts = grid_points(spec(sweep_axis="truth", grid=(0.0, 0.4)))
    assert [p.truth.hypothesis for p in pts] == [Hypothesis.H0, Hypothesis.H1]


def test_bad_sweep_values():
    with pytest.raises(ValueError):
        grid_points(spec(sweep_axis="L", grid=(1.5,)))
    with pytest.raises(ValueError):
        grid_points(spec(sweep_axis="truth", grid=(0.2,)))
    with pytest.raises(ValueError):
        spec(sweep_axis="alpha", grid=())


def test_unresolved_lts_needs_target():
    s = spec(scheme=SchemeConfig("lts"))
    with pytest.raises(ValueError):
        run_sweep(s)
    (r,) = run_sweep(replace(s, local_target_period=10.0, replications=500))
    assert r.a == r.b and r.a > 0


def test_error_probes_under_h0_truth():
    s = spec(truth=TruthPoint(Hypothesis.H0, 0.0), threshold_source="explicit", A=3.0, B=3.0)
    r = run_point(s, grid_points(s)[0])
    assert 0 < r.empirical_alpha < 0.1
    assert 0 < r.empirical_beta < 0.1


def test_compare_self_ratio():
    s = spec(sweep_axis="alpha", grid=(1e-1, 1e-2))
    rows = compare_schemes([s, s])
    for row in rows:
        assert row["centralized#0.T_ratio"] == 1.0
        assert row["centralized#1.T_ratio"] == 1.0


def test_compare_mismatch_raises():
    s = spec(sweep_axis="alpha", grid=(1e-1, 1e-2))
    with pytest.raises(ValueError):
        compare_schemes([s, replace(s, grid=(1e-1,))])
    with pytest.raises(ValueError):
        compare_schemes([s, replace(s, L=3)])
    with pytest.raises(ValueError):
        compare_schemes([s])


def test_compare_three_schemes_messages():
    common = dict(threshold_source="explicit", A=A3, B=A3, replications=2000, error_probes=False)
    specs = [spec(**common),
             spec(scheme=SchemeConfig("uniform", T0=1, lam=0.32), **common),
             spec(scheme=SchemeConfig("lts", a=1.25, b=1.25), **common)]
    (row,) = compare_schemes(specs)
    assert row["baseline"] == "centralized"
    assert row["lts.message_ratio"] <= 0.2
    assert row["uniform.T_ratio"] >= 1.3
    assert row["lts.T_ratio"] <= 1.35
