"""Pure NumPy implementations of the hot numeric kernels.

These are the fallback twins of the compiled extension in ``_native.pyx``.
Both backends share the exact formulas below; the dispatch in
``insightloop.kernels`` picks whichever is importable.
"""

from __future__ import annotations

import numpy as np

BACKEND = "pure"


def changepoint_scan(values: np.ndarray) -> tuple[int, float, float]:
    """Best two-sample split of a series by Welch's t statistic.

    Scans every split index k in [2, n-2] (k is the first index of the
    suffix), keeping both segments at length >= 2, and returns
    ``(k, t, df)`` for the split maximizing |t| (ties: lowest k).
    A segment pair with zero pooled variance yields t = +/-inf when the
    means differ and t = 0 when they agree.
    """
    v = np.ascontiguousarray(values, dtype=np.float64)
    n = v.shape[0]
    if n < 4:
        raise ValueError("changepoint_scan needs at least 4 points")
    ks = np.arange(2, n - 1)
    c1 = np.cumsum(v)
    c2 = np.cumsum(v * v)
    n1 = ks.astype(np.float64)
    n2 = np.float64(n) - n1
    s1 = c1[ks - 1]
    q1 = c2[ks - 1]
    s2 = c1[-1] - s1
    q2 = c2[-1] - q1
    m1 = s1 / n1
    m2 = s2 / n2
    var1 = np.maximum((q1 - s1 * m1) / (n1 - 1.0), 0.0)
    var2 = np.maximum((q2 - s2 * m2) / (n2 - 1.0), 0.0)
    a1 = var1 / n1
    a2 = var2 / n2
    se2 = a1 + a2
    diff = m1 - m2
    with np.errstate(divide="ignore", invalid="ignore"):
        t = np.where(se2 > 0.0, diff / np.sqrt(se2),
                     np.where(diff == 0.0, 0.0, np.where(diff > 0.0, np.inf, -np.inf)))
        dfden = a1 * a1 / (n1 - 1.0) + a2 * a2 / (n2 - 1.0)
        df = np.where(dfden > 0.0, se2 * se2 / dfden, np.float64(n - 2))
    i = int(np.argmax(np.abs(t)))
    return int(ks[i]), float(t[i]), float(df[i])


def acf_max(values: np.ndarray, kmin: int = 2) -> tuple[int, float]:
    """Strongest autocorrelation lag in [kmin, n // 2].

    Uses the biased estimator r_k = sum((x_i - m)(x_{i+k} - m)) / sum((x_i - m)^2).
    Returns ``(k, r)``; ties resolved to the lowest lag. A constant series
    returns ``(kmin, nan)``.
    """
    v = np.ascontiguousarray(values, dtype=np.float64)
    n = v.shape[0]
    kmax = n // 2
    if kmax < kmin:
        raise ValueError("series too short for the lag window")
    x = v - (v.sum() / n)
    denom = float(np.dot(x, x))
    if denom <= 0.0:
        return kmin, float("nan")
    best_k = kmin
    best_r = -np.inf
    for k in range(kmin, kmax + 1):
        r = float(np.dot(x[: n - k], x[k:])) / denom
        if r > best_r:
            best_r = r
            best_k = k
    return best_k, float(best_r)


def ols_line(values: np.ndarray) -> tuple[float, float, float]:
    """Least-squares line over index 0..n-1; returns (slope, stderr, df).

    ``stderr`` is the standard error of the slope with df = n - 2; a perfect
    fit reports stderr 0.
    """
    v = np.ascontiguousarray(values, dtype=np.float64)
    n = v.shape[0]
    if n < 3:
        raise ValueError("ols_line needs at least 3 points")
    fn = float(n)
    mean_x = (fn - 1.0) / 2.0
    sxx = fn * (fn * fn - 1.0) / 12.0
    mean_y = v.sum() / fn
    idx = np.arange(n, dtype=np.float64)
    sxy = float(np.dot(idx, v)) - fn * mean_x * mean_y
    syy = float(np.dot(v, v)) - fn * mean_y * mean_y
    slope = sxy / sxx
    ssr = syy - slope * sxy
    if ssr < 0.0:
        ssr = 0.0
    df = fn - 2.0
    stderr = np.sqrt(ssr / df / sxx)
    return float(slope), float(stderr), float(df)


def pearson_r(a: np.ndarray, b: np.ndarray) -> float:
    """Pearson correlation of two equal-length arrays.

    Returns nan when either side has zero variance.
    """
    x = np.ascontiguousarray(a, dtype=np.float64)
    y = np.ascontiguousarray(b, dtype=np.float64)
    n = x.shape[0]
    if n != y.shape[0]:
        raise ValueError("length mismatch")
    if n < 2:
        raise ValueError("pearson_r needs at least 2 points")
    fn = float(n)
    mx = x.sum() / fn
    my = y.sum() / fn
    dx = x - mx
    dy = y - my
    sxx = float(np.dot(dx, dx))
    syy = float(np.dot(dy, dy))
    if sxx <= 0.0 or syy <= 0.0:
        return float("nan")
    r = float(np.dot(dx, dy)) / np.sqrt(sxx * syy)
    if r > 1.0:
        r = 1.0
    elif r < -1.0:
        r = -1.0
    return float(r)
