import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from ltsgsprt.model import Hypothesis, MeanShiftProblem, ParameterInterval, TruthPoint, VarianceProblem
from ltsgsprt.rng import derive_key
from ltsgsprt.uniform import (BernoulliFusion, BernoulliGllrTable, UniformSensor, bernoulli_gllr,
                              bernoulli_mle, inf_quantized_kl, minimax_lambda, minimax_objective,
                              quantized_kl, run_uniform)

import oracles

MS = MeanShiftProblem()
VAR = VarianceProblem()
TOY = MeanShiftProblem(ParameterInterval.point(-1.0), ParameterInterval.point(1.0))


def test_quantize_block_examples():
    assert UniformSensor(MS, 1, 0.32).quantize_block([1.0]) == 1
    assert UniformSensor(MS, 2, 0.32).quantize_block([0.1, 0.1]) == -1
    assert UniformSensor(VAR, 1, 3.8).quantize_block([-2.5]) == 1
    assert UniformSensor(MS, 1, 0.5).quantize_block([0.5]) == -1  # tie
    with pytest.raises(ValueError):
        UniformSensor(MS, 2, 0.32).quantize_block([1.0])


def test_sensor_block_resets():
    s = UniformSensor(MS, 3, 0.0)
    out = [s.observe(y) for y in (1.0, 1.0, -5.0, 2.0, 2.0, 2.0)]
    assert out == [None, None, -1, None, None, 1]
    assert s.block.n == 0


def test_bernoulli_gllr_singleton_is_exact_llr():
    p = MeanShiftProblem(ParameterInterval.point(0.0), ParameterInterval.point(0.7))
    pt = MS.bit_probability(0.7, 2, 0.5)
    pg = MS.bit_probability(0.0, 2, 0.5)
    for r1, r0 in ((3, 1), (0, 4), (5, 0)):
        exact = r1 * math.log(pt / pg) + r0 * math.log((1 - pt) / (1 - pg))
        assert bernoulli_gllr(p, 2, 0.5, r1, r0) == pytest.approx(exact, abs=1e-12)


def test_bernoulli_gllr_example_r0_zero():
    p2 = MS.bit_probability(2.0, 1, 0.32)
    p0 = MS.bit_probability(0.0, 1, 0.32)
    assert bernoulli_gllr(MS, 1, 0.32, 3, 0) == pytest.approx(3 * math.log(p2 / p0), abs=1e-12)
    brute = oracles.brute_bernoulli_gllr("mean_shift", 1, 0.32, 3, 0, (0, 0), (0.4, 2))
    assert bernoulli_gllr(MS, 1, 0.32, 3, 0) == pytest.approx(brute, abs=1e-6)


@pytest.mark.parametrize("problem,kind,lam", [(MS, "mean_shift", 0.32), (VAR, "variance", 3.8)])
def test_bernoulli_gllr_r1_r0_one_against_grid(problem, kind, lam):
    null = (problem.null_set.lo, problem.null_set.hi)
    alt = (problem.alt_set.lo, problem.alt_set.hi)
    brute = oracles.brute_bernoulli_gllr(kind, 1, lam, 1, 1, null, alt)
    assert bernoulli_gllr(problem, 1, lam, 1, 1) == pytest.approx(brute, abs=1e-6)


@given(st.integers(0, 30), st.integers(0, 30), st.integers(1, 5))
def test_bernoulli_gllr_against_grid_random(r1, r0, T0):
    if r1 + r0 == 0:
        return
    lam = 0.32 * T0
    brute = oracles.brute_bernoulli_gllr("mean_shift", T0, lam, r1, r0, (0, 0), (0.4, 2), n=4001)
    # the grid optimum can only fall short of the true sup, by at most the grid curvature term
    got = bernoulli_gllr(MS, T0, lam, r1, r0)
    assert got >= brute - 1e-9
    assert got == pytest.approx(brute, abs=1e-4 * (r1 + r0))


def test_bernoulli_mle_examples():
    assert bernoulli_mle(MS, 1, 0.32, 5, 5, MS.alt_set) == pytest.approx(0.4)
    assert bernoulli_mle(VAR, 1, 3.8, 5, 5, VAR.alt_set) == 5.0
    assert bernoulli_mle(MS, 1, 0.32, 4, 0, MS.alt_set) == 0.4
    assert bernoulli_mle(MS, 1, 0.32, 0, 4, MS.alt_set) == 2.0
    with pytest.raises(ValueError):
        bernoulli_mle(MS, 1, 0.32, 0, 0, MS.alt_set)


def test_gllr_table_matches_direct():
    t = BernoulliGllrTable(VAR, 2, 7.0)
    for r1, r0 in ((1, 0), (2, 9), (7, 7)):
        assert t(r1, r0) == bernoulli_gllr(VAR, 2, 7.0, r1, r0)
        assert t(r1, r0) == t(r1, r0)


def test_fusion_empty_step_is_noop():
    f = BernoulliFusion(MS, 1, 0.32, 5, 5)
    assert f.step_fusion([]) is None
    assert (f.r0, f.r1, f.blocks) == (0, 0, 0)


def test_fusion_all_plus_stops_after_expected_bits():
    p = MeanShiftProblem(ParameterInterval.point(0.0), ParameterInterval.point(1.0))
    per_bit = math.log(p.bit_probability(1.0, 1, 0.5) / p.bit_probability(0.0, 1, 0.5))
    A = 4.0
    f = BernoulliFusion(p, 1, 0.5, A, 4.0)
    n = 0
    v = None
    while v is None:
        n += 1
        v = f.step_fusion([1])
    assert n == math.ceil(A / per_bit)
    assert v.decision == Hypothesis.H1 and v.messages_sent == n
    with pytest.raises(RuntimeError):
        f.step_fusion([1])


def test_fusion_alternating_stays_bounded():
    f = BernoulliFusion(TOY, 1, 0.0, 5.0, 5.0)
    for i in range(200):
        assert f.step_fusion([1 if i % 2 == 0 else -1]) is None
        assert abs(f.statistic) < 5.0


def test_fusion_rejects_bad_bits():
    with pytest.raises(ValueError):
        BernoulliFusion(MS, 1, 0.3, 1, 1).step_fusion([0])


def test_stopping_time_in_raw_samples():
    v = run_uniform(MS, 2, 5, 1.6, 3.0, 3.0, TruthPoint(Hypothesis.H1, 0.4), derive_key(4))
    assert v.stopping_time % 5 == 0
    assert v.messages_sent == 2 * v.stopping_time // 5


def test_singleton_matches_bernoulli_sprt():
    p = MeanShiftProblem(ParameterInterval.point(0.0), ParameterInterval.point(0.6))
    T0, lam, A, B = 2, 0.6, 3.0, 3.0
    pt = oracles.bit_prob_scipy("mean_shift", 0.6, T0, lam)
    pg = oracles.bit_prob_scipy("mean_shift", 0.0, T0, lam)
    up, down = math.log(pt / pg), math.log((1 - pt) / (1 - pg))
    for seed in range(150):
        truth = TruthPoint(Hypothesis(seed % 2), 0.6 if seed % 2 else 0.0)
        bits = []
        v = run_uniform(p, 2, T0, lam, A, B, truth, derive_key(seed),
                        trace=lambda t, l, b, f: bits.append(b))
        # the fusion checks once per block of L bits: run the SPRT on block sums
        blocks = [sum(up if b == 1 else down for b in bits[i:i + 2]) for i in range(0, len(bits), 2)]
        d, n = oracles.plain_sprt(blocks, A, B)
        assert (int(v.decision), v.stopping_time) == (d, n * T0)


def test_quantized_kl_values():
    assert quantized_kl(MS, 0.4, 0.0, 1, 0.32) == pytest.approx(0.051, abs=0.003)
    assert inf_quantized_kl(MS, TruthPoint(Hypothesis.H0, 0.0), 1, 0.32) == pytest.approx(0.050, abs=0.003)
    assert inf_quantized_kl(MS, TruthPoint(Hypothesis.H0, 0.0), 10, 3.2) / 10 == pytest.approx(0.042, abs=0.004)


@pytest.mark.parametrize("problem", [MS, VAR])
def test_quantized_kl_below_raw(problem):
    for T0 in (1, 4, 10):
        lo, hi = (0.0, 2.0 * T0) if problem is MS else (0.5 * T0, 10.0 * T0)
        for lam in np.linspace(lo, hi, 15):
            for th in (problem.alt_set.lo, problem.alt_set.hi):
                for g in (problem.null_set.lo, problem.null_set.hi):
                    assert quantized_kl(problem, th, g, T0, lam) < T0 * problem.kl_divergence(th, g)


def test_minimax_values():
    lam, _ = minimax_lambda(MS, 10)
    assert 0.30 <= lam / 10 <= 0.34
    lam, _ = minimax_lambda(MS, 1)
    assert 0.30 <= lam <= 0.34
    lam, _ = minimax_lambda(VAR, 1)
    assert 3.7 <= lam <= 3.9


@pytest.mark.parametrize("problem,T0", [(MS, 1), (MS, 10), (VAR, 1)])
def test_minimax_local_optimality(problem, T0):
    res = 1e-4
    lam, val = minimax_lambda(problem, T0, resolution=res)
    assert val >= minimax_objective(problem, T0, lam + res)
    assert val >= minimax_objective(problem, T0, lam - res)
    assert val == pytest.approx(minimax_objective(problem, T0, lam))


def test_minimax_inner_grid_agrees_with_endpoints():
    for lam in np.linspace(0.0, 1.0, 11):
        assert minimax_objective(MS, 1, lam, inner_grid=50) == pytest.approx(
            minimax_objective(MS, 1, lam), abs=1e-15)


def test_symmetric_toy_mirror():
    # the worst-case objective uses D(p_theta || p_gamma), which is not symmetric in the
    # two laws, so the optimum is not at 0; swapping the roles of the sets mirrors it
    lam, val = minimax_lambda(TOY, 1)
    mirrored = MeanShiftProblem(ParameterInterval.point(-1.0), ParameterInterval.point(1.0))
    rev = lambda l: quantized_kl(mirrored, -1.0, 1.0, 1, l)
    assert rev(-lam) == pytest.approx(val, abs=1e-12)
    assert all(rev(-lam) >= rev(x) - 1e-12 for x in np.linspace(-3, 3, 601))


def test_minimax_rejects_bad_args():
    with pytest.raises(ValueError):
        minimax_lambda(MS, 1, resolution=0)
