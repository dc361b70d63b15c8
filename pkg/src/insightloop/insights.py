"""Native insight functions and their hypothesis-test significance scores.

Every function returns an :class:`Insight` whose ``significance`` is
``1 - p`` for the test named in ``detail.method``; the single documented
exception is :func:`evenness`, where high significance means the data is
consistent with uniformity (``significance = p``).

The outstanding-* family tests the leaders against a long-tail null: a power
law fitted by least squares on (log rank, log value) over the non-leader
values, with a Gaussian tail on the log-residual of each leader. Non-positive
values break that null, so the family falls back to a z-score tail test and
reports ``method = "zscore-fallback"``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from insightloop import kernels, stats
from insightloop.errors import (
    KeyNotFound,
    MisalignedSeries,
    TooFewPoints,
    ZeroTotal,
    ZeroVariance,
)
from insightloop.tabular import Series, SubspaceFilter, Table, apply_subspace, group_aggregate


class InsightType(str, enum.Enum):
    OUTSTANDING_NO1 = "outstanding_no1"
    OUTSTANDING_TOP2 = "outstanding_top2"
    OUTSTANDING_LAST = "outstanding_last"
    OUTLIER = "outlier"
    CHANGE_POINT = "change_point"
    TREND = "trend"
    SEASONALITY = "seasonality"
    CORRELATION = "correlation"
    ATTRIBUTION = "attribution"
    EVENNESS = "evenness"
    CROSS_VIEW_CORRELATION = "cross_view_correlation"
    VALUE_RETRIEVAL = "value_retrieval"
    TEXT_SUMMARY = "text_summary"
    KEY_NODES = "key_nodes"
    KEY_LINKS = "key_links"


#: Types with no native statistic; they are answered through the provider.
PROVIDER_ROUTED = frozenset(
    {InsightType.TEXT_SUMMARY, InsightType.KEY_NODES, InsightType.KEY_LINKS}
)

#: Default significance when a provider-routed insight asserts no score.
PROVIDER_DEFAULT_SIGNIFICANCE = 0.5


@dataclass
class Subject:
    """Data scope an insight is computed over."""

    subspace: SubspaceFilter = SubspaceFilter()
    dimension: str | None = None
    measure: str | None = None
    context: list | None = None

    def to_payload(self) -> dict:
        return {
            "subspace": self.subspace.to_payload(),
            "dimension": self.dimension,
            "measure": self.measure,
            "context": self.context,
        }


@dataclass(frozen=True)
class SignificanceDetail:
    p_value: float
    statistic: float
    method: str

    def to_payload(self) -> dict:
        return {"pValue": self.p_value, "statistic": self.statistic, "method": self.method}


@dataclass
class Insight:
    type: InsightType
    parameters: dict
    subject: Subject | None
    significance: float
    description: str
    views: list[str]
    detail: SignificanceDetail = field(
        default_factory=lambda: SignificanceDetail(0.0, 0.0, "unspecified")
    )

    def to_payload(self) -> dict:
        return {
            "type": self.type.value,
            "parameters": self.parameters,
            "subject": self.subject.to_payload() if self.subject else None,
            "significance": self.significance,
            "description": self.description,
            "views": list(self.views),
            "detail": self.detail.to_payload(),
        }


def _finish(itype, params, s: Series, significance, description, detail,
            subject=None, views=None) -> Insight:
    views = list(views) if views else [s.measure]
    return Insight(itype, params, subject, float(significance), description, views, detail)


def _clean(s: Series, minimum: int) -> Series:
    clean = s.dropna()
    if clean.n < minimum:
        raise TooFewPoints(minimum, clean.n)
    return clean


def _fmt(value: float) -> str:
    return f"{value:,.2f}" if abs(value) >= 100 else f"{value:g}"


# --- outstanding family -------------------------------------------------------

def _powerlaw_leader_p(sorted_desc: np.ndarray, leaders: int) -> tuple[float, float]:
    """Max upper-tail p over the leaders under the fitted long-tail null.

    Fits log(value) = a + b * log(rank) over ranks leaders+1..n, takes the
    residual sigma of that fit, and scores each leader's log-residual at its
    own rank against N(0, sigma). Returns (p, z-like statistic).
    """
    n = sorted_desc.shape[0]
    tail = sorted_desc[leaders:]
    ranks = np.arange(leaders + 1, n + 1, dtype=np.float64)
    lx = np.log(ranks)
    ly = np.log(tail)
    mx = lx.mean()
    my = ly.mean()
    sxx = float(np.dot(lx - mx, lx - mx))
    if sxx > 0.0:
        b = float(np.dot(lx - mx, ly - my)) / sxx
    else:
        b = 0.0
    a = my - b * mx
    resid = ly - (a + b * lx)
    sigma = math.sqrt(float(np.dot(resid, resid)) / resid.shape[0])

    worst_p = 0.0
    worst_z = math.inf
    for j in range(leaders):
        pred = a + b * math.log(j + 1.0)
        r = math.log(sorted_desc[j]) - pred
        if sigma > 0.0:
            z = r / sigma
            p = stats.normal_upper_p(z)
        else:
            # Exact law on the tail: a leader above it is infinitely surprising.
            z = math.inf if r > 0 else (-math.inf if r < 0 else 0.0)
            p = 0.0 if r > 0 else (1.0 if r < 0 else 0.5)
        if p > worst_p or j == 0:
            worst_p = p
            worst_z = z
    return stats.clip01(worst_p), worst_z


def _zscore_leader_p(values: np.ndarray, leader_idx: np.ndarray) -> tuple[float, float]:
    """Fallback leader test: each leader against mean/sd of the non-leaders."""
    rest = np.delete(values, leader_idx)
    mean = float(rest.mean())
    sd = float(rest.std(ddof=1)) if rest.shape[0] > 1 else 0.0
    worst_p = 0.0
    worst_z = math.inf
    for j, i in enumerate(leader_idx):
        v = float(values[i])
        if sd > 0.0:
            z = (v - mean) / sd
            p = stats.normal_upper_p(z)
        else:
            z = math.inf if v > mean else (-math.inf if v < mean else 0.0)
            p = 0.0 if v > mean else (1.0 if v < mean else 0.5)
        if p > worst_p or j == 0:
            worst_p = p
            worst_z = z
    return stats.clip01(worst_p), worst_z


def _outstanding(s: Series, leaders: int, minimum: int, itype: InsightType,
                 subject=None, views=None) -> Insight:
    clean = _clean(s, minimum)
    v = clean.values
    order = np.argsort(-v, kind="stable")  # ties keep the lowest index first
    lead = order[:leaders]
    keys = [clean.key(int(i)) for i in lead]
    vals = [float(v[int(i)]) for i in lead]

    if float(v.max()) == float(v.min()):
        detail = SignificanceDetail(1.0, 0.0, "degenerate")
        params = _lead_params(keys, vals, lead, leaders)
        return _finish(itype, params, clean, 0.0,
                       f"No outstanding {clean.measure} value; the group is flat.",
                       detail, subject, views)

    if np.all(v > 0.0):
        sorted_desc = np.sort(v)[::-1]
        p, z = _powerlaw_leader_p(sorted_desc, leaders)
        method = "powerlaw-tail"
    else:
        p, z = _zscore_leader_p(v, lead)
        method = "zscore-fallback"

    detail = SignificanceDetail(p, z, method)
    params = _lead_params(keys, vals, lead, leaders)
    if leaders == 1:
        desc = (f"{keys[0]} is the outstanding No.1 {clean.measure}"
                f"{_by(clean)} at {_fmt(vals[0])}.")
    else:
        desc = (f"{keys[0]} and {keys[1]} are the outstanding top 2 {clean.measure}"
                f"{_by(clean)} at {_fmt(vals[0])} and {_fmt(vals[1])}.")
    return _finish(itype, params, clean, 1.0 - p, desc, detail, subject, views)


def _lead_params(keys, vals, lead, leaders) -> dict:
    if leaders == 1:
        return {"key": keys[0], "value": vals[0], "index": int(lead[0])}
    return {"keys": keys, "values": vals, "indices": [int(i) for i in lead]}


def _by(s: Series) -> str:
    return f" by {s.dimension}" if s.dimension else ""


def outstanding_no1(s: Series, *, subject=None, views=None) -> Insight:
    """Is the maximum significantly above the long-tail expectation?"""
    return _outstanding(s, 1, 5, InsightType.OUTSTANDING_NO1, subject, views)


def outstanding_top2(s: Series, *, subject=None, views=None) -> Insight:
    """Are the two largest values jointly above the long-tail expectation?

    The power law is fitted with both leaders excluded and the reported p is
    the worse of the two per-leader tails.
    """
    return _outstanding(s, 2, 6, InsightType.OUTSTANDING_TOP2, subject, views)


def outstanding_last(s: Series, *, subject=None, views=None) -> Insight:
    """Mirror of outstanding_no1 on max+min-v, reporting the argmin."""
    clean = _clean(s, 5)
    v = clean.values
    vmax, vmin = float(v.max()), float(v.min())
    reflected = Series(clean.measure, vmax + vmin - v, clean.keys, clean.dimension)
    mirrored = _outstanding(reflected, 1, 5, InsightType.OUTSTANDING_LAST, subject, views)
    idx = int(mirrored.parameters["index"])
    mirrored.parameters = {"key": clean.key(idx), "value": float(v[idx]), "index": idx}
    if mirrored.significance > 0.0:
        mirrored.description = (f"{clean.key(idx)} is the outstanding last {clean.measure}"
                                f"{_by(clean)} at {_fmt(float(v[idx]))}.")
    return mirrored


# --- point and shape tests ----------------------------------------------------

def outlier(s: Series, *, subject=None, views=None) -> Insight:
    """Bonferroni-corrected normal tail test on per-point z-scores.

    Each point is scored against the mean and sd of the *remaining* points
    (the deleted variant; a same-sample z is bounded by (n-1)/sqrt(n) and
    could never flag a lone extreme after the n-fold correction).
    """
    clean = _clean(s, 8)
    v = clean.values
    n = clean.n
    if float(v.std(ddof=1)) == 0.0:
        detail = SignificanceDetail(1.0, 0.0, "zscore-loo-bonferroni (zero variance)")
        return _finish(InsightType.OUTLIER, {"indices": [], "keys": [], "count": 0},
                       clean, 0.0, f"No outliers in {clean.measure}; the series is flat.",
                       detail, subject, views)
    total = float(v.sum())
    total_sq = float(np.dot(v, v))
    m = n - 1
    rest_mean = (total - v) / m
    rest_var = (total_sq - v * v - m * rest_mean * rest_mean) / (m - 1)
    rest_sd = np.sqrt(np.maximum(rest_var, 0.0))
    z = np.empty(n, dtype=np.float64)
    for i in range(n):
        dev = float(v[i]) - float(rest_mean[i])
        if rest_sd[i] > 0.0:
            z[i] = abs(dev) / float(rest_sd[i])
        else:
            z[i] = math.inf if dev != 0.0 else 0.0
    p_each = np.minimum(1.0, np.array([stats.normal_two_sided_p(float(zi)) for zi in z]) * n)
    flagged = [int(i) for i in np.nonzero(p_each < 0.05)[0]]
    p_min = float(p_each.min())
    detail = SignificanceDetail(p_min, float(z.max()), "zscore-loo-bonferroni")
    params = {
        "indices": flagged,
        "keys": [clean.key(i) for i in flagged],
        "count": len(flagged),
    }
    if flagged:
        desc = (f"{len(flagged)} outlier value(s) in {clean.measure}"
                f"{_by(clean)}: {', '.join(str(clean.key(i)) for i in flagged)}.")
    else:
        desc = f"No significant outliers in {clean.measure}{_by(clean)}."
    return _finish(InsightType.OUTLIER, params, clean, 1.0 - p_min, desc, detail,
                   subject, views)


def change_point(s: Series, *, subject=None, views=None) -> Insight:
    """Largest-|t| Welch split over every prefix/suffix cut of an ordered series."""
    clean = _clean(s, 6)
    k, t, df = kernels.changepoint_scan(clean.values)
    p = stats.t_two_sided_p(t, df)
    detail = SignificanceDetail(p, t, "welch-t-best-split")
    key = clean.key(k)
    params = {"index": int(k), "key": key}
    before = float(clean.values[:k].mean())
    after = float(clean.values[k:].mean())
    direction = "rises" if after > before else ("drops" if after < before else "holds")
    desc = (f"{clean.measure} {direction} at {key}: mean {_fmt(before)} before "
            f"vs {_fmt(after)} after.")
    return _finish(InsightType.CHANGE_POINT, params, clean, 1.0 - p, desc, detail,
                   subject, views)


def trend(s: Series, *, subject=None, views=None) -> Insight:
    """OLS slope over the index with an exact-t two-sided significance.

    ``direction`` is the slope sign only when p < 0.05, else 0.
    """
    clean = _clean(s, 4)
    slope, stderr, df = kernels.ols_line(clean.values)
    if stderr > 0.0:
        t = slope / stderr
    else:
        t = math.inf if slope > 0 else (-math.inf if slope < 0 else 0.0)
    p = stats.t_two_sided_p(t, df)
    direction = int(np.sign(slope)) if p < 0.05 else 0
    detail = SignificanceDetail(p, t, "ols-slope-t")
    params = {"slope": float(slope), "direction": direction,
              "extent": [clean.key(0), clean.key(clean.n - 1)]}
    word = {1: "an increasing", -1: "a decreasing", 0: "no distinct"}[direction]
    desc = f"{clean.measure} shows {word} trend over {clean.dimension or 'the index'}."
    return _finish(InsightType.TREND, params, clean, 1.0 - p, desc, detail, subject, views)


def seasonality(s: Series, *, subject=None, views=None) -> Insight:
    """Strongest autocorrelation lag in [2, n/2] with a sqrt(n) normal tail.

    The peak is selected across the whole lag window, so the per-lag tail is
    Bonferroni-scaled by the number of lags scanned; without it, white noise
    reads as seasonal in roughly a quarter of runs.
    """
    clean = _clean(s, 12)
    k, r = kernels.acf_max(clean.values, 2)
    if math.isnan(r):
        detail = SignificanceDetail(1.0, 0.0, "acf-peak (zero variance)")
        return _finish(InsightType.SEASONALITY, {"period": None, "autocorrelation": 0.0},
                       clean, 0.0, f"No seasonality in {clean.measure}; the series is flat.",
                       detail, subject, views)
    lags = clean.n // 2 - 1
    p = stats.clip01(lags * 2.0 * (1.0 - float(_phi(r * math.sqrt(clean.n)))))
    detail = SignificanceDetail(p, r, "acf-peak-bonferroni")
    params = {"period": int(k), "autocorrelation": float(r),
              "extent": [clean.key(0), clean.key(clean.n - 1)]}
    desc = f"{clean.measure} repeats with period {k} along {clean.dimension or 'the index'}."
    return _finish(InsightType.SEASONALITY, params, clean, 1.0 - p, desc, detail,
                   subject, views)


def _phi(z: float) -> float:
    return 1.0 - stats.normal_upper_p(z)


def correlation(a: Series, b: Series, *, subject=None, views=None) -> Insight:
    """Pearson correlation of two key-aligned series (a cross-view insight)."""
    ca, cb = a.dropna(), b.dropna()
    if ca.n != cb.n or (ca.keys is not None and cb.keys is not None and ca.keys != cb.keys):
        raise MisalignedSeries(
            f"series are not aligned: {ca.measure} has {ca.n} keys, {cb.measure} has {cb.n}")
    if ca.n < 4:
        raise TooFewPoints(4, ca.n)
    r = kernels.pearson_r(ca.values, cb.values)
    if math.isnan(r):
        raise ZeroVariance("one of the correlated series is constant")
    n = ca.n
    if abs(r) >= 1.0:
        t = math.inf if r > 0 else -math.inf
    else:
        t = r * math.sqrt((n - 2) / (1.0 - r * r))
    p = stats.t_two_sided_p(t, n - 2)
    direction = int(np.sign(r))
    detail = SignificanceDetail(p, t, "pearson-t")
    params = {"r": float(r), "direction": direction,
              "extent": [ca.key(0), ca.key(ca.n - 1)]}
    strength = "strong " if abs(r) > 0.7 else ""
    sign = "positive" if r > 0 else ("negative" if r < 0 else "flat")
    desc = (f"A {strength}{sign} correlation (r={r:+.2f}) between {ca.measure} "
            f"and {cb.measure}.")
    views = list(views) if views else [ca.measure, cb.measure]
    return Insight(InsightType.CORRELATION, params, subject, 1.0 - p, desc, views, detail)


# --- composition tests ----------------------------------------------------------

def attribution(s: Series, *, subject=None, views=None) -> Insight:
    """Leader share against the uniform expectation 1/n.

    z-test with multinomial variance p(1-p)/T over the T observed counts,
    Bonferroni-scaled by the n cells the maximum was picked from, so an
    exactly uniform composition scores p = 1.
    """
    clean = _clean(s, 2)
    v = clean.values
    if np.any(v < 0.0):
        raise ZeroTotal("attribution needs non-negative values")
    total = float(v.sum())
    if total <= 0.0:
        raise ZeroTotal("attribution needs a positive total")
    n = clean.n
    i = int(np.argmax(v))
    share = float(v[i]) / total
    p0 = 1.0 / n
    var = p0 * (1.0 - p0) / total
    z = (share - p0) / math.sqrt(var)
    p = stats.clip01(n * stats.normal_upper_p(z))
    detail = SignificanceDetail(p, z, "share-z-bonferroni")
    params = {"key": clean.key(i), "index": i, "share": share, "value": float(v[i])}
    desc = (f"{clean.key(i)} accounts for {share:.0%} of {clean.measure}"
            f"{_by(clean)}.")
    return _finish(InsightType.ATTRIBUTION, params, clean, 1.0 - p, desc, detail,
                   subject, views)


def evenness(s: Series, *, subject=None, views=None) -> Insight:
    """Chi-square goodness of fit against uniform.

    Inverted convention: significance is the p-value itself, so high
    significance means the composition is consistent with evenness.
    """
    clean = _clean(s, 3)
    v = clean.values
    if np.any(v < 0.0):
        raise ZeroTotal("evenness needs non-negative values")
    total = float(v.sum())
    if total <= 0.0:
        raise ZeroTotal("evenness needs a positive total")
    n = clean.n
    expected = total / n
    x2 = float(((v - expected) ** 2 / expected).sum())
    p = stats.chi2_upper_p(x2, n - 1)
    detail = SignificanceDetail(p, x2, "chi2-evenness (significance = p, inverted)")
    level = "evenly" if p > 0.5 else "unevenly"
    desc = f"{clean.measure} is distributed {level}{_by(clean)} (chi2={x2:.2f})."
    params = {"statistic": x2, "groups": n,
              "extent": [clean.key(0), clean.key(clean.n - 1)]}
    return _finish(InsightType.EVENNESS, params, clean, p,
                   desc, detail, subject, views)


def value_retrieval(table: Table, subject: Subject, key, agg: str = "sum", *,
                    views=None) -> Insight:
    """Look up the aggregated measure at one dimension key; significance 1."""
    sliced = apply_subspace(table, subject.subspace)
    series = group_aggregate(sliced, subject.dimension, subject.measure, agg)
    wanted = str(key)
    for i, k in enumerate(series.keys or ()):
        if str(k) == wanted:
            value = float(series.values[i])
            detail = SignificanceDetail(0.0, value, "lookup")
            desc = f"{subject.measure} at {subject.dimension}={key} is {_fmt(value)}."
            params = {"key": k, "value": value, "aggregate": agg}
            return Insight(InsightType.VALUE_RETRIEVAL, params, subject, 1.0, desc,
                           list(views) if views else [subject.measure], detail)
    raise KeyNotFound(f"{key!r} not present in {subject.dimension!r} after filtering")


#: Dispatch table for series-valued native functions.
SERIES_FUNCTIONS = {
    InsightType.OUTSTANDING_NO1.value: outstanding_no1,
    InsightType.OUTSTANDING_TOP2.value: outstanding_top2,
    InsightType.OUTSTANDING_LAST.value: outstanding_last,
    InsightType.OUTLIER.value: outlier,
    InsightType.CHANGE_POINT.value: change_point,
    InsightType.TREND.value: trend,
    InsightType.SEASONALITY.value: seasonality,
    InsightType.ATTRIBUTION.value: attribution,
    InsightType.EVENNESS.value: evenness,
}
