"""Uniform sampling with one-bit quantization, and the minimax quantizer threshold."""

import math

import numpy as np
from scipy.optimize import minimize_scalar

from . import numerics
from .centralized import DEFAULT_CAP, Verdict, check_thresholds, sensor_streams, threshold_decision
from .model import Hypothesis, SuffStat, clamp


def _xlogy(x, y):
    if x == 0:
        return 0.0
    if y == 0.0:
        return -math.inf
    return x * math.log(y)


def bernoulli_kl(pair_a, pair_b):
    """KL divergence between two Bernoulli laws given as (P(+1), P(-1)) pairs."""
    total = 0.0
    for pa, pb in zip(pair_a, pair_b):
        if pa > 0:
            total += pa * (math.log(pa) - math.log(pb)) if pb > 0 else math.inf
    return max(total, 0.0)


def quantized_kl(problem, p, q, T0, lam):
    """D(Bern(p_p) || Bern(p_q)) for the one-bit quantizer with block T0 and threshold lam."""
    return bernoulli_kl(problem.bit_pair(p, T0, lam), problem.bit_pair(q, T0, lam))


def inf_quantized_kl(problem, truth, T0, lam):
    # bit probabilities are monotone in the parameter, so the clamp is the minimizer
    other = problem.null_set if truth.hypothesis == Hypothesis.H1 else problem.alt_set
    return quantized_kl(problem, truth.value, clamp(truth.value, other), T0, lam)


def bernoulli_loglik(problem, x, T0, lam, r1, r0):
    p_plus, p_minus = problem.bit_pair(x, T0, lam)
    return _xlogy(r1, p_plus) + _xlogy(r0, p_minus)


def bernoulli_mle(problem, T0, lam, r0, r1, interval):
    """Constrained MLE of the parameter from r1 (+1) and r0 (-1) bit counts."""
    n = r0 + r1
    if n < 1:
        raise ValueError("need at least one bit")
    if r1 == 0:
        return interval.lo
    if r0 == 0:
        return interval.hi
    return clamp(problem.bit_parameter(r0 / n, T0, lam), interval)


def bernoulli_gllr(problem, T0, lam, r1, r0):
    """sup over the alternative minus sup over the null of the Bernoulli log-likelihood."""
    if r0 + r1 < 1:
        raise ValueError("need at least one bit")
    theta = bernoulli_mle(problem, T0, lam, r0, r1, problem.alt_set)
    gamma = bernoulli_mle(problem, T0, lam, r0, r1, problem.null_set)
    return (bernoulli_loglik(problem, theta, T0, lam, r1, r0)
            - bernoulli_loglik(problem, gamma, T0, lam, r1, r0))


class BernoulliGllrTable:
    """Memoized bernoulli_gllr over (r1, r0); the fusion statistic only depends on the counts."""

    def __init__(self, problem, T0, lam):
        self.problem = problem
        self.T0 = T0
        self.lam = lam
        self._cache = {}

    def __call__(self, r1, r0):
        k = (int(r1), int(r0))
        value = self._cache.get(k)
        if value is None:
            value = bernoulli_gllr(self.problem, self.T0, self.lam, *k)
            self._cache[k] = value
        return value


class UniformSensor:
    def __init__(self, problem, T0, lam):
        if int(T0) != T0 or T0 < 1:
            raise ValueError("T0 must be a positive integer")
        self.problem = problem
        self.T0 = int(T0)
        self.lam = lam
        self.block = SuffStat()

    def quantize_block(self, samples):
        """+1 iff the block statistic strictly exceeds lam."""
        if len(samples) != self.T0:
            raise ValueError(f"expected {self.T0} samples, got {len(samples)}")
        acc = 0.0
        for y in samples:
            acc = acc + self.problem.statistic(y)
        return 1 if acc > self.lam else -1

    def observe(self, y):
        """Feed one sample; returns the bit at the end of each block, else None."""
        self.block = self.problem.accumulate(self.block, y)
        if self.block.n < self.T0:
            return None
        bit = 1 if self.block.acc > self.lam else -1
        self.block = SuffStat()
        return bit


class BernoulliFusion:
    def __init__(self, problem, T0, lam, A, B, table=None):
        check_thresholds(A, B)
        self.problem = problem
        self.T0 = int(T0)
        self.lam = lam
        self.A = A
        self.B = B
        self.r1 = 0
        self.r0 = 0
        self.blocks = 0
        self.statistic = 0.0
        self.verdict = None
        self.table = table if table is not None else BernoulliGllrTable(problem, T0, lam)

    def step_fusion(self, bits):
        """Ingest one block's worth of bits (one per sensor); Verdict on stopping, else None."""
        if self.verdict is not None:
            raise RuntimeError("fusion already stopped")
        if not bits:
            return None
        for bit in bits:
            if bit == 1:
                self.r1 += 1
            elif bit == -1:
                self.r0 += 1
            else:
                raise ValueError(f"bits must be +1 or -1, got {bit!r}")
        self.blocks += 1
        self.statistic = self.table(self.r1, self.r0)
        decision = threshold_decision(self.statistic, self.A, self.B)
        if decision is not None:
            self.verdict = Verdict(decision, self.blocks * self.T0, self.r0 + self.r1)
        return self.verdict


def minimax_objective(problem, T0, lam, inner_grid=0):
    """Worst-case quantized KL, min over (theta, gamma) of D(p_theta || p_gamma).

    Endpoints suffice for the two models here; ``inner_grid`` adds interior
    points to both sets as a safety net.
    """
    def points(interval):
        if interval.is_singleton:
            return [interval.lo]
        if inner_grid > 0:
            return list(np.linspace(interval.lo, interval.hi, inner_grid + 2))
        return [interval.lo, interval.hi]

    alt_pairs = [problem.bit_pair(th, T0, lam) for th in points(problem.alt_set)]
    null_pairs = [problem.bit_pair(g, T0, lam) for g in points(problem.null_set)]
    return min(bernoulli_kl(a, n) for a in alt_pairs for n in null_pairs)


def _lambda_range(problem, T0):
    if problem.kind == "mean_shift":
        spread = 8.0 * problem.sigma * math.sqrt(T0)
        return problem.null_set.lo * T0 - spread, problem.alt_set.hi * T0 + spread
    upper = problem.alt_set.hi * numerics.chi_squared_quantile(T0, 1.0 - 1e-9)
    return 0.0, upper


def minimax_lambda(problem, T0, resolution=1e-4, grid_points=2001, inner_grid=0):
    """Threshold maximizing the worst-case quantized KL.

    Coarse grid over a range that covers every useful threshold, then
    bounded scalar refinement around the best grid cell down to ``resolution``.
    Returns (lambda, objective at lambda).
    """
    if resolution <= 0:
        raise ValueError("resolution must be positive")
    if problem.null_set.hi >= problem.alt_set.lo:
        raise ValueError("degenerate parameter sets")
    lo, hi = _lambda_range(problem, T0)
    grid = np.linspace(lo, hi, grid_points)
    values = [minimax_objective(problem, T0, lam, inner_grid) for lam in grid]
    k = int(np.argmax(values))
    a, b = grid[max(k - 1, 0)], grid[min(k + 1, grid_points - 1)]
    res = minimize_scalar(lambda lam: -minimax_objective(problem, T0, lam, inner_grid),
                          bounds=(a, b), method="bounded", options={"xatol": resolution / 10})
    if -res.fun >= values[k]:
        return float(res.x), float(-res.fun)
    return float(grid[k]), float(values[k])


def run_uniform(problem, L, T0, lam, A, B, truth, key, cap=DEFAULT_CAP, trace=None):
    """One uniform-sampling trajectory with per-sensor streams.

    ``trace`` is called as trace(t, sensor, bit, fusion) for every bit after
    the fusion center has processed the block.
    """
    problem.check_truth(truth)
    sensors = [UniformSensor(problem, T0, lam) for _ in range(L)]
    streams = sensor_streams(key, L)
    fusion = BernoulliFusion(problem, T0, lam, A, B)
    for t in range(1, cap + 1):
        bits = [s.observe(problem.sample(truth, st)) for s, st in zip(sensors, streams)]
        if bits[0] is None:
            continue
        verdict = fusion.step_fusion(bits)
        if trace is not None:
            for sensor, bit in enumerate(bits):
                trace(t, sensor, bit, fusion)
        if verdict is not None:
            return verdict
    return Verdict(None, cap, fusion.r0 + fusion.r1, censored=True)
