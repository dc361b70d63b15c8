"""Tail-probability helpers shared by the insight functions.

The Student-t survival function goes through the regularized incomplete beta
function directly, so small-sample tests use the exact CDF rather than a
normal approximation.
"""

from __future__ import annotations

import math

from scipy.special import betainc, gammaincc, ndtr


def clip01(p: float) -> float:
    """Clamp a probability to [0, 1]."""
    if p < 0.0:
        return 0.0
    if p > 1.0:
        return 1.0
    return float(p)


def t_two_sided_p(t: float, df: float) -> float:
    """P(|T| >= |t|) for Student's t with ``df`` degrees of freedom."""
    if df <= 0 or math.isnan(t):
        return 1.0
    if math.isinf(t):
        return 0.0
    if t == 0.0:
        return 1.0
    x = df / (df + t * t)
    return clip01(float(betainc(df / 2.0, 0.5, x)))


def normal_upper_p(z: float) -> float:
    """P(Z >= z) for a standard normal."""
    if math.isnan(z):
        return 1.0
    return clip01(float(ndtr(-z)))


def normal_two_sided_p(z: float) -> float:
    """P(|Z| >= |z|) for a standard normal."""
    return clip01(2.0 * normal_upper_p(abs(z)))


def chi2_upper_p(x: float, df: float) -> float:
    """P(X >= x) for a chi-square with ``df`` degrees of freedom."""
    if x <= 0.0:
        return 1.0
    return clip01(float(gammaincc(df / 2.0, x / 2.0)))
