"""Independent oracles for the test suite.

Deliberately separate routes from the implementation: tail probabilities go
through mpmath, fits through numpy.polyfit, and scans through naive
per-split loops, so agreement with the package is evidence rather than
tautology.
"""

from __future__ import annotations

import math

import mpmath
import numpy as np

mpmath.mp.dps = 30


def t_two_sided_p(t: float, df: float) -> float:
    """P(|T| >= |t|) via the mpmath regularized incomplete beta."""
    if math.isinf(t):
        return 0.0
    if t == 0.0:
        return 1.0
    x = df / (df + t * t)
    return float(mpmath.betainc(df / 2.0, 0.5, 0, x, regularized=True))


def normal_upper_p(z: float) -> float:
    if math.isinf(z):
        return 0.0 if z > 0 else 1.0
    return float(mpmath.erfc(z / mpmath.sqrt(2)) / 2)


def chi2_upper_p(x: float, df: float) -> float:
    return float(mpmath.gammainc(df / 2.0, x / 2.0, mpmath.inf, regularized=True))


def welch_t(left: np.ndarray, right: np.ndarray) -> tuple[float, float]:
    """Welch statistic and Welch-Satterthwaite df, two-pass formulas."""
    n1, n2 = len(left), len(right)
    m1, m2 = float(np.mean(left)), float(np.mean(right))
    v1 = float(np.var(left, ddof=1))
    v2 = float(np.var(right, ddof=1))
    se2 = v1 / n1 + v2 / n2
    if se2 <= 0.0:
        t = 0.0 if m1 == m2 else math.copysign(math.inf, m1 - m2)
        return t, float(n1 + n2 - 2)
    t = (m1 - m2) / math.sqrt(se2)
    df = se2 * se2 / ((v1 / n1) ** 2 / (n1 - 1) + (v2 / n2) ** 2 / (n2 - 1))
    return t, df


def changepoint_exhaustive(values: np.ndarray) -> tuple[int, float, float]:
    """Argmax |Welch t| over every split, computed split by split."""
    n = len(values)
    best = None
    for k in range(2, n - 1):
        t, df = welch_t(values[:k], values[k:])
        if best is None or abs(t) > best[1]:
            best = (k, abs(t), t, df)
    return best[0], best[2], best[3]


def changepoint_significance(values: np.ndarray) -> float:
    _, t, df = changepoint_exhaustive(np.asarray(values, dtype=float))
    return 1.0 - t_two_sided_p(t, df)


def powerlaw_leader_significance(values, leaders: int = 1) -> float:
    """Long-tail leader test via numpy.polyfit and the mpmath normal tail."""
    v = np.sort(np.asarray(values, dtype=float))[::-1]
    tail = v[leaders:]
    ranks = np.arange(leaders + 1, len(v) + 1, dtype=float)
    slope, intercept = np.polyfit(np.log(ranks), np.log(tail), 1)
    resid = np.log(tail) - (intercept + slope * np.log(ranks))
    sigma = math.sqrt(float(np.mean(resid ** 2)))
    worst = 0.0
    for j in range(leaders):
        pred = intercept + slope * math.log(j + 1.0)
        r = math.log(v[j]) - pred
        if sigma > 0:
            p = normal_upper_p(r / sigma)
        else:
            p = 0.0 if r > 0 else (1.0 if r < 0 else 0.5)
        worst = max(worst, p)
    return 1.0 - min(1.0, worst)


def trend_direction(values: np.ndarray, alpha: float = 0.05) -> int:
    """Significance-gated OLS slope sign via a from-scratch regression."""
    y = np.asarray(values, dtype=float)
    n = len(y)
    x = np.arange(n, dtype=float)
    slope, intercept = np.polyfit(x, y, 1)
    fitted = intercept + slope * x
    ssr = float(np.sum((y - fitted) ** 2))
    sxx = float(np.sum((x - x.mean()) ** 2))
    if ssr <= 0.0:
        return int(np.sign(slope)) if slope != 0 else 0
    se = math.sqrt(ssr / (n - 2) / sxx)
    p = t_two_sided_p(slope / se, n - 2)
    return int(np.sign(slope)) if p < alpha else 0


def acf_values(values: np.ndarray, kmin: int = 2) -> dict[int, float]:
    """Biased autocorrelation per lag, accumulated with math.fsum."""
    v = np.asarray(values, dtype=float)
    n = len(v)
    mean = math.fsum(v) / n
    x = [vi - mean for vi in v]
    denom = math.fsum(xi * xi for xi in x)
    out = {}
    for k in range(kmin, n // 2 + 1):
        out[k] = math.fsum(x[i] * x[i + k] for i in range(n - k)) / denom
    return out


def attribution_significance(values) -> float:
    v = np.asarray(values, dtype=float)
    total = float(v.sum())
    n = len(v)
    share = float(v.max()) / total
    p0 = 1.0 / n
    z = (share - p0) / math.sqrt(p0 * (1 - p0) / total)
    return 1.0 - min(1.0, n * normal_upper_p(z))


def evenness_significance(values) -> float:
    v = np.asarray(values, dtype=float)
    expected = v.sum() / len(v)
    x2 = float(((v - expected) ** 2 / expected).sum())
    return chi2_upper_p(x2, len(v) - 1)


def outlier_flags(values) -> list[int]:
    """Deleted-point z-scores with the n-fold correction, naive loops."""
    v = np.asarray(values, dtype=float)
    n = len(v)
    flagged = []
    for i in range(n):
        rest = np.delete(v, i)
        sd = float(np.std(rest, ddof=1))
        if sd > 0:
            z = abs(float(v[i]) - float(rest.mean())) / sd
            p = min(1.0, 2 * normal_upper_p(z) * n)
        else:
            p = 0.0 if v[i] != rest.mean() else 1.0
        if p < 0.05:
            flagged.append(i)
    return flagged


def pearson_significance(a, b) -> float:
    x = np.asarray(a, dtype=float)
    y = np.asarray(b, dtype=float)
    r = float(np.corrcoef(x, y)[0, 1])
    n = len(x)
    if abs(r) >= 1.0:
        return 1.0
    t = r * math.sqrt((n - 2) / (1 - r * r))
    return 1.0 - t_two_sided_p(t, n - 2)
