"""Scalar special functions: standard normal and chi-squared CDFs and quantiles."""

import math

_SQRT2 = math.sqrt(2.0)
_SQRT2PI = math.sqrt(2.0 * math.pi)

# Acklam's rational approximation, used only as the Newton starting point.
_A = (-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
      1.383577518672690e+02, -3.066479806614716e+01, 2.506628277459239e+00)
_B = (-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
      6.680131188771972e+01, -1.328068155288572e+01)
_C = (-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
      -2.549732539343734e+00, 4.374664141464968e+00, 2.938163982698783e+00)
_D = (7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
      3.754408661907416e+00)
_P_LOW = 0.02425

_GAMMA_EPS = 1e-16
_GAMMA_MAX_ITER = 10_000
_QUANTILE_MAX_ITER = 200


def _check_finite(x):
    if not math.isfinite(x):
        raise ValueError(f"argument must be finite, got {x!r}")


def _check_open_unit(p):
    if not (0.0 < p < 1.0):
        raise ValueError(f"probability must lie in (0, 1), got {p!r}")


def std_normal_cdf(x):
    """Phi(x), computed through erfc so that both tails keep relative accuracy."""
    _check_finite(x)
    return 0.5 * math.erfc(-x / _SQRT2)


def std_normal_sf(x):
    """1 - Phi(x) without cancellation in the upper tail."""
    _check_finite(x)
    return 0.5 * math.erfc(x / _SQRT2)


def std_normal_pdf(x):
    return math.exp(-0.5 * x * x) / _SQRT2PI


def _acklam(p):
    if p < _P_LOW:
        q = math.sqrt(-2.0 * math.log(p))
        return ((((((_C[0] * q + _C[1]) * q + _C[2]) * q + _C[3]) * q + _C[4]) * q + _C[5])
                / ((((_D[0] * q + _D[1]) * q + _D[2]) * q + _D[3]) * q + 1.0))
    if p > 1.0 - _P_LOW:
        q = math.sqrt(-2.0 * math.log1p(-p))
        return -((((((_C[0] * q + _C[1]) * q + _C[2]) * q + _C[3]) * q + _C[4]) * q + _C[5])
                 / ((((_D[0] * q + _D[1]) * q + _D[2]) * q + _D[3]) * q + 1.0))
    q = p - 0.5
    r = q * q
    return ((((((_A[0] * r + _A[1]) * r + _A[2]) * r + _A[3]) * r + _A[4]) * r + _A[5]) * q
            / (((((_B[0] * r + _B[1]) * r + _B[2]) * r + _B[3]) * r + _B[4]) * r + 1.0))


def std_normal_quantile(p):
    """Inverse of Phi on (0, 1).

    Rational starting point refined by two Halley steps; the residual is taken
    in whichever tail keeps it well conditioned.
    """
    _check_open_unit(p)
    if p == 0.5:
        return 0.0
    x = _acklam(p)
    for _ in range(2):
        if p < 0.5:
            resid = std_normal_cdf(x) - p
        else:
            resid = (1.0 - p) - std_normal_sf(x)
        pdf = std_normal_pdf(x)
        if pdf == 0.0:
            break
        u = resid / pdf
        x -= u / (1.0 + 0.5 * x * u)
    return x


def _gamma_series(s, x):
    # P(s, x) by the power series; converges fast for x < s + 1.
    term = 1.0 / s
    total = term
    a = s
    for _ in range(_GAMMA_MAX_ITER):
        a += 1.0
        term *= x / a
        total += term
        if abs(term) < abs(total) * _GAMMA_EPS:
            break
    else:
        raise ArithmeticError("incomplete gamma series did not converge")
    return total * math.exp(-x + s * math.log(x) - math.lgamma(s))


def _gamma_cfrac(s, x):
    # Q(s, x) by Lentz's continued fraction; used for x >= s + 1.
    tiny = 1e-300
    b = x + 1.0 - s
    c = 1.0 / tiny
    d = 1.0 / b
    h = d
    for i in range(1, _GAMMA_MAX_ITER):
        an = -i * (i - s)
        b += 2.0
        d = an * d + b
        if abs(d) < tiny:
            d = tiny
        c = b + an / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _GAMMA_EPS:
            break
    else:
        raise ArithmeticError("incomplete gamma continued fraction did not converge")
    return h * math.exp(-x + s * math.log(x) - math.lgamma(s))


def regularized_gamma(s, x):
    """Return (P(s, x), Q(s, x)), the regularized lower and upper incomplete gamma."""
    if s <= 0:
        raise ValueError("shape must be positive")
    if x < 0 or not math.isfinite(x):
        if x == math.inf:
            return 1.0, 0.0
        raise ValueError(f"x must be finite and nonnegative, got {x!r}")
    if x == 0.0:
        return 0.0, 1.0
    if x < s + 1.0:
        p = _gamma_series(s, x)
        return p, 1.0 - p
    q = _gamma_cfrac(s, x)
    return 1.0 - q, q


def _check_dof(k):
    if int(k) != k or k < 1:
        raise ValueError(f"degrees of freedom must be a positive integer, got {k!r}")


def chi_squared_cdf(k, x):
    _check_dof(k)
    if x < 0:
        raise ValueError(f"chi-squared argument must be nonnegative, got {x!r}")
    return regularized_gamma(0.5 * k, 0.5 * x)[0]


def chi_squared_sf(k, x):
    _check_dof(k)
    if x < 0:
        raise ValueError(f"chi-squared argument must be nonnegative, got {x!r}")
    return regularized_gamma(0.5 * k, 0.5 * x)[1]


def _chi_squared_pdf(k, x):
    if x <= 0.0:
        return 0.0
    s = 0.5 * k
    return math.exp((s - 1.0) * math.log(x) - 0.5 * x - s * math.log(2.0) - math.lgamma(s))


def chi_squared_quantile(k, p, tol=1e-12):
    """Inverse chi-squared CDF by safeguarded Newton iteration.

    The bracket [lo, hi] always contains the root, so a Newton step that
    leaves it falls back to bisection. Stops once the bracket or the
    p-space residual is below ``tol``.
    """
    _check_dof(k)
    _check_open_unit(p)
    lo, hi = 0.0, max(1.0, float(k))
    while chi_squared_cdf(k, hi) < p:
        lo, hi = hi, 2.0 * hi
    # Wilson-Hilferty start, clipped into the bracket.
    z = std_normal_quantile(p)
    c = 2.0 / (9.0 * k)
    x = k * (1.0 - c + z * math.sqrt(c)) ** 3
    if not (lo < x < hi):
        x = 0.5 * (lo + hi)
    for _ in range(_QUANTILE_MAX_ITER):
        if p < 0.5:
            resid = chi_squared_cdf(k, x) - p
        else:
            resid = (1.0 - p) - chi_squared_sf(k, x)
        if resid > 0:
            hi = x
        else:
            lo = x
        if abs(resid) <= tol * min(p, 1.0 - p) or hi - lo <= tol * max(1.0, hi):
            return x
        pdf = _chi_squared_pdf(k, x)
        step = resid / pdf if pdf > 0 else math.inf
        x_new = x - step
        if not (lo < x_new < hi):
            x_new = 0.5 * (lo + hi)
        x = x_new
    raise ArithmeticError(f"chi-squared quantile did not converge for k={k}, p={p}")
