"""Independent reference implementations used only by the tests."""

import math

import numpy as np
from scipy import stats


def plain_sprt(llr_increments, A, B):
    """Wald's SPRT on a sequence of per-step log-likelihood ratio increments.

    Returns (decision, step) with decision 1 for H1, 0 for H0, None if the
    sequence runs out first.
    """
    s = 0.0
    for t, inc in enumerate(llr_increments, start=1):
        s += inc
        if s >= A:
            return 1, t
        if s <= -B:
            return 0, t
    return None, len(llr_increments)


def normal_logpdf(y, mean, var):
    return -0.5 * math.log(2 * math.pi * var) - (y - mean) ** 2 / (2 * var)


def sample_llr(kind, y, theta, gamma, sigma2=1.0):
    """log f_theta(y) - log h_gamma(y) from full densities."""
    if kind == "mean_shift":
        return normal_logpdf(y, theta, sigma2) - normal_logpdf(y, gamma, sigma2)
    return normal_logpdf(y, 0.0, theta) - normal_logpdf(y, 0.0, gamma)


def grid(interval, n):
    lo, hi = interval
    return np.array([lo]) if lo == hi else np.linspace(lo, hi, n)


def brute_gllr(kind, ys, null, alt, sigma2=1.0, n=20001):
    """Max over a dense alternative grid minus max over a dense null grid, from full densities."""
    ys = np.asarray(ys, dtype=float)

    def profile(points):
        if kind == "mean_shift":
            ll = stats.norm.logpdf(ys[None, :], loc=points[:, None], scale=math.sqrt(sigma2))
        else:
            ll = stats.norm.logpdf(ys[None, :], loc=0.0, scale=np.sqrt(points)[:, None])
        return ll.sum(axis=1).max()

    return profile(grid(alt, n)) - profile(grid(null, n))


def bit_prob_scipy(kind, x, T0, lam, sigma2=1.0):
    if kind == "mean_shift":
        return stats.norm.sf((lam - x * T0) / math.sqrt(sigma2 * T0))
    return stats.chi2.sf(lam / x, T0)


def brute_bernoulli_gllr(kind, T0, lam, r1, r0, null, alt, sigma2=1.0, n=20001):
    def profile(points):
        p = bit_prob_scipy(kind, points, T0, lam, sigma2)
        with np.errstate(divide="ignore"):
            ll = r1 * np.log(p) + r0 * np.log1p(-p)
        return ll.max()

    return profile(grid(alt, n)) - profile(grid(null, n))
