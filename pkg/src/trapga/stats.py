"""Two-tailed t-tests with +/-/~ verdicts.

The t distribution is evaluated through the regularized incomplete beta
function, computed with the modified Lentz continued fraction, so no
statistics package is needed.
"""

import math
from dataclasses import dataclass

import numpy as np

from ._validation import DimensionError

__all__ = [
    "ALPHA",
    "ComparisonVerdict",
    "betainc",
    "t_critical",
    "t_sf_two_sided",
    "t_test_paired",
    "t_test_two_sample",
]

ALPHA = 0.05

PLUS, MINUS, TILDE = "+", "-", "~"

_EPS = 1e-15
_TINY = 1e-300


def _beta_cf(a, b, x, max_iter=10000):
    """Continued fraction for the incomplete beta function (modified Lentz)."""
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < _TINY:
        d = _TINY
    d = 1.0 / d
    h = d
    for m in range(1, max_iter + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < _TINY:
            d = _TINY
        c = 1.0 + aa / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < _TINY:
            d = _TINY
        c = 1.0 + aa / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _EPS:
            return h
    raise ArithmeticError(f"incomplete beta continued fraction did not converge (a={a}, b={b}, x={x})")


def betainc(a, b, x):
    """Regularized incomplete beta function I_x(a, b)."""
    if not 0.0 <= x <= 1.0:
        raise ValueError(f"x must lie in [0, 1], got {x}")
    if x == 0.0 or x == 1.0:
        return x
    log_front = (
        math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b)
        + a * math.log(x) + b * math.log1p(-x)
    )
    front = math.exp(log_front)
    # the fraction converges fast only below the distribution's mean
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _beta_cf(a, b, x) / a
    return 1.0 - front * _beta_cf(b, a, 1.0 - x) / b


def t_sf_two_sided(t, df):
    """P(|T| >= |t|) for Student's t with ``df`` degrees of freedom."""
    if df <= 0:
        raise ValueError(f"degrees of freedom must be positive, got {df}")
    if math.isinf(t):
        return 0.0
    return betainc(df / 2.0, 0.5, df / (df + t * t))


def t_critical(df, alpha=ALPHA):
    """|t| at which the two-tailed p-value equals ``alpha`` (bisection)."""
    lo, hi = 0.0, 1.0
    while t_sf_two_sided(hi, df) > alpha:
        hi *= 2.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if t_sf_two_sided(mid, df) > alpha:
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-12:
            break
    return 0.5 * (lo + hi)


@dataclass(frozen=True)
class ComparisonVerdict:
    """Outcome of comparing sample ``a`` against sample ``b``.

    ``verdict`` is ``"+"`` when ``a`` is significantly larger, ``"-"`` when
    significantly smaller and ``"~"`` otherwise.
    """

    t_statistic: float
    degrees_of_freedom: int
    p_value: float
    mean_difference: float
    alpha: float = ALPHA

    @property
    def significant(self):
        return self.p_value < self.alpha

    @property
    def verdict(self):
        if not self.significant or self.mean_difference == 0:
            return TILDE
        return PLUS if self.mean_difference > 0 else MINUS


def _verdict(diff, se, df, alpha):
    if se == 0.0:
        if diff == 0.0:
            return ComparisonVerdict(0.0, df, 1.0, 0.0, alpha)
        return ComparisonVerdict(math.copysign(math.inf, diff), df, 0.0, diff, alpha)
    t = diff / se
    return ComparisonVerdict(t, df, t_sf_two_sided(t, df), diff, alpha)


def _as_sample(x, name):
    x = np.asarray(x, dtype=float)
    if x.ndim != 1 or x.shape[0] < 2:
        raise DimensionError(f"{name} must be a 1-d sample of at least two values")
    return x


def t_test_two_sample(a, b, alpha=ALPHA):
    """Pooled-variance two-sample t-test, ``df = len(a) + len(b) - 2``."""
    a = _as_sample(a, "a")
    b = _as_sample(b, "b")
    na, nb = a.shape[0], b.shape[0]
    df = na + nb - 2
    pooled = ((na - 1) * a.var(ddof=1) + (nb - 1) * b.var(ddof=1)) / df
    se = math.sqrt(pooled * (1.0 / na + 1.0 / nb))
    return _verdict(float(a.mean() - b.mean()), se, df, alpha)


def t_test_paired(a, b, alpha=ALPHA):
    """Paired t-test on ``a - b``, ``df = R - 1``."""
    a = _as_sample(a, "a")
    b = _as_sample(b, "b")
    if a.shape != b.shape:
        raise DimensionError(f"paired samples differ in length: {a.shape[0]} != {b.shape[0]}")
    d = a - b
    r = d.shape[0]
    se = math.sqrt(d.var(ddof=1) / r)
    return _verdict(float(d.mean()), se, r - 1, alpha)
