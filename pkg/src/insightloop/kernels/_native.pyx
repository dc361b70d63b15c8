# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled twins of the kernels in ``_pure``; same formulas, same edge cases."""

from libc.math cimport INFINITY, NAN, sqrt

import numpy as np

cimport numpy as cnp

cnp.import_array()

BACKEND = "native"


def changepoint_scan(values):
    """Best two-sample split of a series by Welch's t statistic.

    Mirrors ``_pure.changepoint_scan``: splits k in [2, n-2], ties to the
    lowest k, zero pooled variance maps to t of 0 or +/-inf.
    """
    cdef cnp.ndarray[cnp.float64_t, ndim=1] v = np.ascontiguousarray(values, dtype=np.float64)
    cdef Py_ssize_t n = v.shape[0]
    if n < 4:
        raise ValueError("changepoint_scan needs at least 4 points")
    cdef double tot1 = 0.0, tot2 = 0.0
    cdef Py_ssize_t i
    for i in range(n):
        tot1 += v[i]
        tot2 += v[i] * v[i]
    cdef double s1 = v[0] + v[1]
    cdef double q1 = v[0] * v[0] + v[1] * v[1]
    cdef double n1, n2, s2, q2, m1, m2, var1, var2, a1, a2, se2, diff, t, df, dfden
    cdef double best_abs = -1.0, best_t = 0.0, best_df = 0.0
    cdef Py_ssize_t k, best_k = 2
    for k in range(2, n - 1):
        if k > 2:
            s1 += v[k - 1]
            q1 += v[k - 1] * v[k - 1]
        n1 = <double> k
        n2 = <double> (n - k)
        s2 = tot1 - s1
        q2 = tot2 - q1
        m1 = s1 / n1
        m2 = s2 / n2
        var1 = (q1 - s1 * m1) / (n1 - 1.0)
        var2 = (q2 - s2 * m2) / (n2 - 1.0)
        if var1 < 0.0:
            var1 = 0.0
        if var2 < 0.0:
            var2 = 0.0
        a1 = var1 / n1
        a2 = var2 / n2
        se2 = a1 + a2
        diff = m1 - m2
        if se2 > 0.0:
            t = diff / sqrt(se2)
            dfden = a1 * a1 / (n1 - 1.0) + a2 * a2 / (n2 - 1.0)
            if dfden > 0.0:
                df = se2 * se2 / dfden
            else:
                df = <double> (n - 2)
        else:
            df = <double> (n - 2)
            if diff == 0.0:
                t = 0.0
            elif diff > 0.0:
                t = INFINITY
            else:
                t = -INFINITY
        if (t if t >= 0.0 else -t) > best_abs:
            best_abs = t if t >= 0.0 else -t
            best_t = t
            best_df = df
            best_k = k
    return best_k, best_t, best_df


def acf_max(values, int kmin=2):
    """Strongest autocorrelation lag in [kmin, n // 2]; ties to the lowest lag."""
    cdef cnp.ndarray[cnp.float64_t, ndim=1] v = np.ascontiguousarray(values, dtype=np.float64)
    cdef Py_ssize_t n = v.shape[0]
    cdef Py_ssize_t kmax = n // 2
    if kmax < kmin:
        raise ValueError("series too short for the lag window")
    cdef double total = 0.0
    cdef Py_ssize_t i
    for i in range(n):
        total += v[i]
    cdef double mean = total / (<double> n)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] x = np.empty(n, dtype=np.float64)
    cdef double denom = 0.0
    for i in range(n):
        x[i] = v[i] - mean
        denom += x[i] * x[i]
    if denom <= 0.0:
        return kmin, NAN
    cdef double best_r = -INFINITY, acc, r
    cdef Py_ssize_t k, best_k = kmin
    for k in range(kmin, kmax + 1):
        acc = 0.0
        for i in range(n - k):
            acc += x[i] * x[i + k]
        r = acc / denom
        if r > best_r:
            best_r = r
            best_k = k
    return best_k, best_r


def ols_line(values):
    """Least-squares line over index 0..n-1; returns (slope, stderr, df)."""
    cdef cnp.ndarray[cnp.float64_t, ndim=1] v = np.ascontiguousarray(values, dtype=np.float64)
    cdef Py_ssize_t n = v.shape[0]
    if n < 3:
        raise ValueError("ols_line needs at least 3 points")
    cdef double fn = <double> n
    cdef double mean_x = (fn - 1.0) / 2.0
    cdef double sxx = fn * (fn * fn - 1.0) / 12.0
    cdef double sy = 0.0, sxy_raw = 0.0, syy_raw = 0.0
    cdef Py_ssize_t i
    for i in range(n):
        sy += v[i]
        sxy_raw += (<double> i) * v[i]
        syy_raw += v[i] * v[i]
    cdef double mean_y = sy / fn
    cdef double sxy = sxy_raw - fn * mean_x * mean_y
    cdef double syy = syy_raw - fn * mean_y * mean_y
    cdef double slope = sxy / sxx
    cdef double ssr = syy - slope * sxy
    if ssr < 0.0:
        ssr = 0.0
    cdef double df = fn - 2.0
    cdef double stderr = sqrt(ssr / df / sxx)
    return slope, stderr, df


def pearson_r(a, b):
    """Pearson correlation; nan when either side has zero variance."""
    cdef cnp.ndarray[cnp.float64_t, ndim=1] x = np.ascontiguousarray(a, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] y = np.ascontiguousarray(b, dtype=np.float64)
    cdef Py_ssize_t n = x.shape[0]
    if n != y.shape[0]:
        raise ValueError("length mismatch")
    if n < 2:
        raise ValueError("pearson_r needs at least 2 points")
    cdef double fn = <double> n
    cdef double sx = 0.0, sy = 0.0
    cdef Py_ssize_t i
    for i in range(n):
        sx += x[i]
        sy += y[i]
    cdef double mx = sx / fn, my = sy / fn
    cdef double sxx = 0.0, syy = 0.0, sxy = 0.0, dx, dy
    for i in range(n):
        dx = x[i] - mx
        dy = y[i] - my
        sxx += dx * dx
        syy += dy * dy
        sxy += dx * dy
    if sxx <= 0.0 or syy <= 0.0:
        return NAN
    cdef double r = sxy / sqrt(sxx * syy)
    if r > 1.0:
        r = 1.0
    elif r < -1.0:
        r = -1.0
    return r
