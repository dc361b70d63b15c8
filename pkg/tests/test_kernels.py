from __future__ import annotations

import math

import numpy as np
import pytest

import oracles
from insightloop.kernels import _pure

try:
    from insightloop.kernels import _native
except ImportError:
    _native = None

BACKENDS = [_pure] + ([_native] if _native is not None else [])


@pytest.fixture(params=BACKENDS, ids=lambda m: m.BACKEND)
def backend(request):
    return request.param


class TestChangepointScan:
    def test_perfect_step(self, backend):
        k, t, df = backend.changepoint_scan(
            np.array([0, 0, 0, 0, 10, 10, 10, 10], dtype=float))
        assert k == 4 and math.isinf(t)

    def test_constant(self, backend):
        k, t, _ = backend.changepoint_scan(np.full(8, 3.0))
        assert t == 0.0 and k == 2  # ties resolve to the lowest split

    def test_matches_exhaustive_oracle(self, backend):
        rng = np.random.default_rng(4)
        for _ in range(200):
            v = rng.normal(size=int(rng.integers(6, 30)))
            k, t, df = backend.changepoint_scan(v)
            ok, ot, odf = oracles.changepoint_exhaustive(v)
            assert k == ok
            assert t == pytest.approx(ot, rel=1e-9)
            assert df == pytest.approx(odf, rel=1e-9)


class TestAcfMax:
    def test_sine_period(self, backend):
        v = np.sin(2 * np.pi * np.arange(48) / 12)
        k, r = backend.acf_max(v, 2)
        assert k == 12 and r > 0.5

    def test_constant_is_nan(self, backend):
        _, r = backend.acf_max(np.full(12, 2.0), 2)
        assert math.isnan(r)

    def test_matches_reference_formula(self, backend):
        rng = np.random.default_rng(9)
        for _ in range(50):
            v = rng.normal(size=int(rng.integers(12, 40)))
            k, r = backend.acf_max(v, 2)
            ref = oracles.acf_values(v)
            best = max(ref, key=lambda kk: ref[kk])
            assert k == best
            assert r == pytest.approx(ref[best], rel=1e-9)


class TestOlsLine:
    def test_exact_line(self, backend):
        slope, stderr, df = backend.ols_line(np.array([1.0, 2.0, 3.0, 4.0, 5.0]))
        assert slope == pytest.approx(1.0)
        assert stderr == 0.0
        assert df == 3.0

    def test_matches_polyfit(self, backend):
        rng = np.random.default_rng(10)
        for _ in range(50):
            v = rng.normal(size=int(rng.integers(4, 40)))
            slope, stderr, df = backend.ols_line(v)
            ref_slope, _ = np.polyfit(np.arange(len(v), dtype=float), v, 1)
            assert slope == pytest.approx(float(ref_slope), rel=1e-9, abs=1e-12)


class TestPearson:
    def test_perfect(self, backend):
        assert backend.pearson_r(np.array([1.0, 2, 3]), np.array([2.0, 4, 6])) == 1.0

    def test_matches_corrcoef(self, backend):
        rng = np.random.default_rng(11)
        for _ in range(50):
            a = rng.normal(size=20)
            b = rng.normal(size=20)
            assert backend.pearson_r(a, b) == pytest.approx(
                float(np.corrcoef(a, b)[0, 1]), rel=1e-9, abs=1e-12)

    def test_zero_variance_nan(self, backend):
        assert math.isnan(backend.pearson_r(np.full(5, 1.0), np.arange(5.0)))


@pytest.mark.skipif(_native is None, reason="compiled kernels unavailable")
class TestBackendAgreement:
    """The compiled and pure twins must agree bit-for-bit in the chosen index
    and to tight tolerance in the statistics."""

    def test_changepoint(self):
        rng = np.random.default_rng(21)
        for _ in range(300):
            v = rng.normal(size=int(rng.integers(4, 60)))
            kp, tp, dp = _pure.changepoint_scan(v)
            kn, tn, dn = _native.changepoint_scan(v)
            assert kp == kn
            assert tp == pytest.approx(tn, rel=1e-12, abs=1e-12)
            assert dp == pytest.approx(dn, rel=1e-12, abs=1e-12)

    def test_acf(self):
        rng = np.random.default_rng(22)
        for _ in range(200):
            v = rng.normal(size=int(rng.integers(6, 80)))
            kp, rp = _pure.acf_max(v)
            kn, rn = _native.acf_max(v)
            assert kp == kn
            if not (math.isnan(rp) and math.isnan(rn)):
                assert rp == pytest.approx(rn, rel=1e-12, abs=1e-12)

    def test_ols_and_pearson(self):
        rng = np.random.default_rng(23)
        for _ in range(200):
            v = rng.normal(size=int(rng.integers(3, 50)))
            assert _pure.ols_line(v) == pytest.approx(_native.ols_line(v),
                                                      rel=1e-12, abs=1e-12)
            a, b = rng.normal(size=10), rng.normal(size=10)
            assert _pure.pearson_r(a, b) == pytest.approx(
                _native.pearson_r(a, b), rel=1e-12, abs=1e-12)


class TestStatsHelpers:
    def test_t_cdf_against_published_critical_values(self):
        # Two-sided p at the alpha = 0.05 critical values; table precision 1e-3
        # in t maps to ~1e-4 in p, the mpmath oracle pins 1e-6.
        from insightloop.stats import t_two_sided_p
        for df, t_crit in ((1, 12.7062047362), (5, 2.5705818356),
                           (10, 2.2281388520), (29, 2.0452296421)):
            assert t_two_sided_p(t_crit, df) == pytest.approx(0.05, abs=1e-6)
            assert t_two_sided_p(t_crit, df) == pytest.approx(
                oracles.t_two_sided_p(t_crit, df), abs=1e-6)

    def test_tails_against_mpmath(self):
        from insightloop.stats import chi2_upper_p, normal_upper_p, t_two_sided_p
        rng = np.random.default_rng(30)
        for _ in range(100):
            z = float(rng.uniform(-6, 6))
            assert normal_upper_p(z) == pytest.approx(
                oracles.normal_upper_p(z), abs=1e-12)
            t = float(rng.uniform(-8, 8))
            df = float(rng.uniform(1, 60))
            assert t_two_sided_p(t, df) == pytest.approx(
                oracles.t_two_sided_p(t, df), abs=1e-9)
            x = float(rng.uniform(0.01, 40))
            k = float(rng.integers(1, 30))
            assert chi2_upper_p(x, k) == pytest.approx(
                oracles.chi2_upper_p(x, k), abs=1e-9)
