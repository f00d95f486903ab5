"""Asymptotic predictions and Monte Carlo threshold calibration."""

import logging
import math
from dataclasses import dataclass, field
from typing import List, Tuple

import numpy as np

from . import batch
from .model import Hypothesis, TruthPoint
from .rng import derive_key
from .stats import wilson_interval
from .uniform import inf_quantized_kl

log = logging.getLogger(__name__)

PREDICTION_SCHEMES = ("centralized", "uniform", "lts", "simple-sprt")


class CalibrationError(RuntimeError):
    pass


@dataclass(frozen=True)
class AsymptoticPrediction:
    scheme: str
    expected_size_h0: float
    expected_size_h1: float
    log_alpha: float
    log_beta: float

    def expected_size(self, hypothesis):
        return self.expected_size_h1 if hypothesis == Hypothesis.H1 else self.expected_size_h0


def _points(problem, truth):
    theta = truth.value if truth.hypothesis == Hypothesis.H1 else problem.alt_probe().value
    gamma = truth.value if truth.hypothesis == Hypothesis.H0 else problem.null_probe().value
    return TruthPoint(Hypothesis.H0, gamma), TruthPoint(Hypothesis.H1, theta)


def predict(problem, scheme, truth, L, A, B, T0=None, lam=None):
    """First-order expected sample sizes and log error rates.

    Sizes are A / (inf KL * L) under H1 and B / (inf KL * L) under H0. The
    uniform scheme uses the quantized Bernoulli KL per raw sample (divided by
    T0). Whichever hypothesis ``truth`` does not belong to is evaluated at its
    worst-case boundary point.
    """
    if scheme not in PREDICTION_SCHEMES:
        raise ValueError(f"unknown scheme {scheme!r}")
    h0, h1 = _points(problem, truth)
    if scheme == "uniform":
        if T0 is None or lam is None:
            raise ValueError("uniform prediction needs T0 and lambda")
        d0 = inf_quantized_kl(problem, h0, T0, lam) / T0
        d1 = inf_quantized_kl(problem, h1, T0, lam) / T0
    elif scheme == "simple-sprt":
        d0 = problem.kl_divergence(h0.value, h1.value)
        d1 = problem.kl_divergence(h1.value, h0.value)
    else:
        d0 = problem.inf_kl(h0)
        d1 = problem.inf_kl(h1)
    return AsymptoticPrediction(scheme, B / (d0 * L), A / (d1 * L), -A, -B)


@dataclass
class LocalCalibration:
    a: float
    b: float
    mean_period: float
    trace: List[Tuple[float, float]] = field(default_factory=list)


def calibrate_local_thresholds(problem, target_mean_period, seed=0, tolerance=0.05,
                               reference=None, replications=4000, b_ratio=1.0,
                               max_iter=80, cap=100_000):
    """Bisect a (with b = b_ratio * a) until the mean local period hits the target.

    All evaluations reuse the same sample streams, which makes the estimated
    mean period nondecreasing in a, so bisection is well posed.
    """
    if target_mean_period < 1:
        raise ValueError("target mean period must be at least 1")
    reference = reference if reference is not None else problem.alt_probe()
    keys = derive_key(seed, 0xCA1, np.arange(replications, dtype=np.uint64))
    trace = []

    def mean_period(a):
        m = float(batch.local_periods(problem, a, b_ratio * a, reference, keys, cap).mean())
        trace.append((a, m))
        return m

    def close(m):
        return abs(m - target_mean_period) <= tolerance * target_mean_period

    lo = 1e-9
    m_lo = mean_period(lo)
    if close(m_lo):
        return LocalCalibration(lo, b_ratio * lo, m_lo, trace)
    hi = 1.0
    m_hi = mean_period(hi)
    while m_hi < target_mean_period:
        lo, m_lo = hi, m_hi
        hi *= 2.0
        if hi > 1e6:
            raise CalibrationError("could not bracket the target mean period")
        m_hi = mean_period(hi)
    if close(m_hi):
        return LocalCalibration(hi, b_ratio * hi, m_hi, trace)
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        m = mean_period(mid)
        if close(m):
            return LocalCalibration(mid, b_ratio * mid, m, trace)
        if m < target_mean_period:
            lo = mid
        else:
            hi = mid
    raise CalibrationError(f"local calibration did not converge (last bracket [{lo}, {hi}])")


@dataclass
class GlobalCalibration:
    A: float
    B: float
    alpha_hat: float = math.nan
    alpha_ci: Tuple[float, float] = (math.nan, math.nan)
    beta_hat: float = math.nan
    beta_ci: Tuple[float, float] = (math.nan, math.nan)
    converged: bool = False
    warning: str = ""
    history: list = field(default_factory=list)


def _secant(x, f, x_prev, f_prev):
    if x_prev is None or f == f_prev:
        slope = -1.0  # log P(error) ~ -threshold
    else:
        slope = (f - f_prev) / (x - x_prev)
        slope = min(max(slope, -3.0), -0.2)
    return max(x - f / slope, 1e-3)


def calibrate_global_thresholds(problem, scheme, L, target_alpha, target_beta, seed=0,
                                budget=10_000, steps=4, cap=1_000_000):
    """Refine (A, B) from (-log alpha, -log beta) by secant steps on the log error rates.

    Errors are estimated at the worst-case probes: type-I at the null endpoint
    nearest the alternative, type-II at the alternative endpoint nearest the
    null. ``budget`` is the replication count per estimate.
    """
    for target in (target_alpha, target_beta):
        if not 0 < target < 1:
            raise ValueError("target error rates must lie in (0, 1)")
    A, B = -math.log(target_alpha), -math.log(target_beta)
    result = GlobalCalibration(A, B)
    if budget <= 0:
        result.warning = "no budget: asymptotic thresholds returned"
        return result
    if min(target_alpha, target_beta) * budget < 5:
        result.warning = "budget too small to resolve the targets: asymptotic thresholds returned"
        log.warning(result.warning)
        return result

    null, alt = problem.null_probe(), problem.alt_probe()
    floor = 0.5 / budget
    prev = (None, None, None, None)
    for step in range(steps + 1):
        keys0 = derive_key(seed, 0xCA2, step, 0, np.arange(budget, dtype=np.uint64))
        keys1 = derive_key(seed, 0xCA2, step, 1, np.arange(budget, dtype=np.uint64))
        r0 = batch.run_scheme(problem, scheme, L, A, B, null, keys0, cap)
        r1 = batch.run_scheme(problem, scheme, L, A, B, alt, keys1, cap)
        k_alpha = int((r0.decision == 1).sum())
        k_beta = int((r1.decision == 0).sum())
        result = GlobalCalibration(
            A, B, k_alpha / budget, wilson_interval(k_alpha, budget),
            k_beta / budget, wilson_interval(k_beta, budget), history=result.history)
        result.history.append((A, B, result.alpha_hat, result.beta_hat))
        ok_a = result.alpha_ci[0] <= target_alpha <= result.alpha_ci[1]
        ok_b = result.beta_ci[0] <= target_beta <= result.beta_ci[1]
        if ok_a and ok_b:
            result.converged = True
            return result
        if step == steps:
            break
        fa = math.log(max(result.alpha_hat, floor)) - math.log(target_alpha)
        fb = math.log(max(result.beta_hat, floor)) - math.log(target_beta)
        A_prev, fa_prev, B_prev, fb_prev = prev
        prev = (A, fa, B, fb)
        if not ok_a:
            A = _secant(A, fa, A_prev, fa_prev)
        if not ok_b:
            B = _secant(B, fb, B_prev, fb_prev)
    result.warning = "secant steps exhausted before both targets fell inside the confidence intervals"
    return result
