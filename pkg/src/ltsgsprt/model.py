"""Composite testing problems: Gaussian mean shift and Gaussian variance.

Both models share one shape. The per-sample sufficient statistic is ``y``
(mean shift) or ``y**2`` (variance), the constrained MLE is the clamp of its
running mean onto a parameter interval, and the GLLR is the difference of the
profile log-likelihoods at the two constrained MLEs.

Array-valued methods (``gllr_arrays``, ``draw``) accept numpy arrays so the
batch simulator and the single-trajectory engines run the same arithmetic.
"""

import enum
import math
from dataclasses import dataclass

import numpy as np

from . import numerics
from .rng import normal


class Hypothesis(enum.IntEnum):
    H0 = 0
    H1 = 1


@dataclass(frozen=True)
class ParameterInterval:
    lo: float
    hi: float

    def __post_init__(self):
        if not (math.isfinite(self.lo) and math.isfinite(self.hi)):
            raise ValueError("interval endpoints must be finite")
        if self.lo > self.hi:
            raise ValueError(f"empty interval [{self.lo}, {self.hi}]")

    @classmethod
    def point(cls, x):
        return cls(x, x)

    @property
    def is_singleton(self):
        return self.lo == self.hi

    def __contains__(self, x):
        return self.lo <= x <= self.hi


@dataclass(frozen=True)
class SuffStat:
    acc: float = 0.0
    n: int = 0


@dataclass(frozen=True)
class TruthPoint:
    hypothesis: Hypothesis
    value: float


def clamp(x, interval):
    """Project ``x`` onto a closed interval (works elementwise on arrays)."""
    if isinstance(x, np.ndarray):
        return np.clip(x, interval.lo, interval.hi)
    return min(max(x, interval.lo), interval.hi)


class TestingProblem:
    """Base class; subclasses supply the model-specific formulas."""

    __test__ = False  # keep pytest from collecting this as a test class

    kind = ""

    def __init__(self, null_set, alt_set):
        if null_set.hi >= alt_set.lo:
            raise ValueError("null and alternative sets must be separated (null.hi < alt.lo)")
        self.null_set = null_set
        self.alt_set = alt_set

    # -- sets and truth points -------------------------------------------
    def interval(self, hypothesis):
        return self.alt_set if hypothesis == Hypothesis.H1 else self.null_set

    def check_truth(self, truth):
        if truth.value not in self.interval(truth.hypothesis):
            raise ValueError(f"truth value {truth.value} outside the {truth.hypothesis.name} set")

    def null_probe(self):
        """Worst-case null point for type-I error: the null endpoint nearest the alternative."""
        return TruthPoint(Hypothesis.H0, self.null_set.hi)

    def alt_probe(self):
        """Worst-case alternative point for type-II error."""
        return TruthPoint(Hypothesis.H1, self.alt_set.lo)

    # -- sampling ----------------------------------------------------------
    def draw(self, value, key, counter):
        """Vectorized i.i.d. draws under parameter ``value`` from counter-based streams."""
        raise NotImplementedError

    def sample(self, truth, stream):
        self.check_truth(truth)
        z = stream.next_normal()
        return float(self._scale_normal(truth.value, z))

    def _scale_normal(self, value, z):
        raise NotImplementedError

    # -- sufficient statistics --------------------------------------------
    def statistic(self, y):
        raise NotImplementedError

    def accumulate(self, stat, y):
        return SuffStat(stat.acc + self.statistic(y), stat.n + 1)

    def constrained_mle(self, stat, interval):
        if stat.n < 1:
            raise ValueError("constrained MLE needs at least one sample")
        return clamp(stat.acc / stat.n, interval)

    def loglik(self, acc, n, x):
        """Log-likelihood of ``n`` samples with statistic sum ``acc`` at parameter ``x``.

        Terms that do not depend on ``x`` are dropped.
        """
        raise NotImplementedError

    def gllr_arrays(self, acc, n):
        mean = acc / n
        theta = clamp(mean, self.alt_set)
        gamma = clamp(mean, self.null_set)
        return self.loglik(acc, n, theta) - self.loglik(acc, n, gamma)

    def gllr(self, stat):
        if stat.n < 1:
            raise ValueError("GLLR needs at least one sample")
        return float(self.gllr_arrays(stat.acc, stat.n))

    # -- divergences -------------------------------------------------------
    def kl_divergence(self, p, q):
        """D(law(p) || law(q)) for two parameter values."""
        raise NotImplementedError

    def inf_kl(self, truth):
        """Infimum of the KL divergence from ``truth`` to the opposite parameter set.

        Both models have D(x || .) unimodal with its minimum at x itself, so
        the infimum sits at the clamp of x onto the opposite set.
        """
        other = self.null_set if truth.hypothesis == Hypothesis.H1 else self.alt_set
        return self.kl_divergence(truth.value, clamp(truth.value, other))

    # -- one-bit quantizer -------------------------------------------------
    def bit_probability(self, value, T0, lam):
        """P(block statistic over T0 samples > lam) under parameter ``value``."""
        return self.bit_pair(value, T0, lam)[0]

    def bit_pair(self, value, T0, lam):
        """(P(bit = +1), P(bit = -1)), each computed in its own tail."""
        raise NotImplementedError

    def bit_parameter(self, frac_minus, T0, lam):
        """Unconstrained parameter at which P(bit = -1) equals ``frac_minus`` in (0, 1)."""
        raise NotImplementedError

    def describe(self):
        raise NotImplementedError


def _check_block(T0):
    if int(T0) != T0 or T0 < 1:
        raise ValueError(f"block length must be a positive integer, got {T0!r}")


class MeanShiftProblem(TestingProblem):
    """y ~ N(x, sigma^2); null and alternative sets on the mean."""

    kind = "mean_shift"

    def __init__(self, null_set=ParameterInterval(0.0, 0.0), alt_set=ParameterInterval(0.4, 2.0),
                 sigma2=1.0):
        if not sigma2 > 0:
            raise ValueError("noise variance must be positive")
        super().__init__(null_set, alt_set)
        self.sigma2 = float(sigma2)
        self.sigma = math.sqrt(self.sigma2)

    def draw(self, value, key, counter):
        return value + self.sigma * normal(key, counter)

    def _scale_normal(self, value, z):
        return value + self.sigma * z

    def statistic(self, y):
        return y

    def loglik(self, acc, n, x):
        return (x * acc - n * x * x / 2.0) / self.sigma2

    def kl_divergence(self, p, q):
        return (p - q) ** 2 / (2.0 * self.sigma2)

    def bit_pair(self, value, T0, lam):
        _check_block(T0)
        if lam == -math.inf:
            return 1.0, 0.0
        if lam == math.inf:
            return 0.0, 1.0
        z = (lam - value * T0) / (self.sigma * math.sqrt(T0))
        return numerics.std_normal_sf(z), numerics.std_normal_cdf(z)

    def bit_parameter(self, frac_minus, T0, lam):
        z = numerics.std_normal_quantile(frac_minus)
        return (lam - z * self.sigma * math.sqrt(T0)) / T0

    def describe(self):
        return {"kind": self.kind, "sigma2": self.sigma2,
                "null": [self.null_set.lo, self.null_set.hi],
                "alt": [self.alt_set.lo, self.alt_set.hi]}


class VarianceProblem(TestingProblem):
    """y ~ N(0, x); small variance under the null, large under the alternative."""

    kind = "variance"

    def __init__(self, null_set=ParameterInterval(0.2, 1.0), alt_set=ParameterInterval(2.0, 5.0)):
        if null_set.lo <= 0:
            raise ValueError("variance parameters must be positive")
        super().__init__(null_set, alt_set)

    def draw(self, value, key, counter):
        return math.sqrt(value) * normal(key, counter)

    def _scale_normal(self, value, z):
        return math.sqrt(value) * z

    def statistic(self, y):
        return y * y

    def loglik(self, acc, n, x):
        return -acc / (2.0 * x) - n * np.log(x) / 2.0

    def gllr_arrays(self, acc, n):
        mean = acc / n
        theta = clamp(mean, self.alt_set)
        gamma = clamp(mean, self.null_set)
        return (1.0 / (2.0 * gamma) - 1.0 / (2.0 * theta)) * acc + n / 2.0 * np.log(gamma / theta)

    def kl_divergence(self, p, q):
        if p <= 0 or q <= 0:
            raise ValueError("variance parameters must be positive")
        return 0.5 * (p / q - 1.0) + 0.5 * math.log(q / p)

    def bit_pair(self, value, T0, lam):
        _check_block(T0)
        if value <= 0:
            raise ValueError("variance parameter must be positive")
        if lam < 0:
            raise ValueError("variance quantizer threshold must be nonnegative")
        p, q = numerics.regularized_gamma(0.5 * T0, 0.5 * lam / value)
        return q, p

    def bit_parameter(self, frac_minus, T0, lam):
        return lam / numerics.chi_squared_quantile(T0, frac_minus)

    def describe(self):
        return {"kind": self.kind,
                "null": [self.null_set.lo, self.null_set.hi],
                "alt": [self.alt_set.lo, self.alt_set.hi]}


DEFAULT_SETS = {"mean_shift": ((0.0, 0.0), (0.4, 2.0)), "variance": ((0.2, 1.0), (2.0, 5.0))}


def make_problem(kind, null=None, alt=None, sigma2=1.0):
    """Build a model; missing parameter sets fall back to DEFAULT_SETS."""
    if kind not in DEFAULT_SETS:
        raise ValueError(f"unknown model kind {kind!r}")
    null = DEFAULT_SETS[kind][0] if null is None else null
    alt = DEFAULT_SETS[kind][1] if alt is None else alt
    null_set, alt_set = ParameterInterval(*null), ParameterInterval(*alt)
    if kind == "mean_shift":
        return MeanShiftProblem(null_set, alt_set, sigma2)
    return VarianceProblem(null_set, alt_set)
