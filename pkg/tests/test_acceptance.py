"""Acceptance criteria, one test per criterion, each printing a PASS line.

Run with ``pytest tests/test_acceptance.py -v -s``. Every tolerance and bound
is pinned here; the suite needs no network and is fully deterministic.
"""

from __future__ import annotations

import json
import time

import numpy as np
import pytest
from fastapi.testclient import TestClient
from scipy.stats import binom

import oracles
from insightloop import superstore
from insightloop.bench import BenchConfig, OracleProvider, run_suite
from insightloop.errors import PlanParseError
from insightloop.insights import (
    Insight,
    InsightType,
    SignificanceDetail,
    Subject,
    attribution,
    change_point,
    correlation,
    evenness,
    outlier,
    outstanding_last,
    outstanding_no1,
    outstanding_top2,
    seasonality,
    trend,
    value_retrieval,
)
from insightloop.provider import (
    MockProvider,
    parse_assessment_reply,
    parse_braced_answers,
    parse_plan_reply,
)
from insightloop.recommend import ScoreWeights, assess
from insightloop.report import check_latex, frame_count
from insightloop.service import EngineState, create_app
from insightloop.session import load as load_session
from insightloop.tabular import Series, SubspaceFilter, group_aggregate

SERIES_FUNCTIONS = (outstanding_no1, outstanding_top2, outstanding_last, outlier,
                    change_point, trend, seasonality, attribution, evenness)


def _series(values):
    return Series("value", values)


def _ok(name: str):
    print(f"[acceptance] {name}: PASS")


class TestAcceptance:
    def test_significance_bounds(self):
        """10,000 seeded series: significance in [0,1] and equal to 1 - p."""
        started = time.monotonic()
        rng = np.random.default_rng(2024_01)
        previous = None
        for i in range(10_000):
            n = int(rng.integers(12, 31))
            values = rng.uniform(1.0, 1000.0, size=n)
            series = _series(values)
            for fn in SERIES_FUNCTIONS:
                insight = fn(series)
                assert 0.0 <= insight.significance <= 1.0
                if fn is evenness:
                    assert insight.significance == insight.detail.p_value
                else:
                    assert abs(insight.significance
                               - (1.0 - insight.detail.p_value)) <= 1e-12
            if previous is not None and previous.n == series.n:
                pair = correlation(previous, series)
                assert 0.0 <= pair.significance <= 1.0
                assert abs(pair.significance - (1.0 - pair.detail.p_value)) <= 1e-12
            previous = series
        elapsed = time.monotonic() - started
        assert elapsed < 60.0, f"criterion overran its budget: {elapsed:.1f}s"
        _ok(f"significance bounds (10k series, {elapsed:.1f}s)")

    def test_oracle_equivalence(self):
        """1,000 arrays, n <= 10: keys match argmax/argmin, split matches scan."""
        rng = np.random.default_rng(2024_02)
        for _ in range(1_000):
            n = int(rng.integers(6, 11))
            values = rng.uniform(1.0, 1000.0, size=n)
            assert outstanding_no1(_series(values)).parameters["index"] == \
                int(np.argmax(values))
            assert outstanding_last(_series(values)).parameters["index"] == \
                int(np.argmin(values))
            ours = change_point(_series(values)).parameters["index"]
            assert ours == oracles.changepoint_exhaustive(values)[0]
        _ok("oracle equivalence (1,000 arrays, 100% agreement)")

    def test_scale_and_shift_invariance(self):
        """1,000 cases: chosen indices invariant; scale-free significances to 1e-9."""
        rng = np.random.default_rng(2024_03)
        index_key = {
            "outstanding_no1": "index", "outstanding_top2": "indices",
            "outstanding_last": "index", "outlier": "indices",
            "change_point": "index", "trend": "direction",
            "seasonality": "period", "attribution": "index",
        }
        scale_free = (outstanding_no1, outstanding_top2, outstanding_last, outlier,
                      change_point, trend, seasonality)
        for _ in range(1_000):
            n = int(rng.integers(12, 21))
            values = rng.uniform(1.0, 500.0, size=n)
            c = float(rng.uniform(0.2, 8.0))
            b = float(rng.uniform(-40.0, 40.0))
            for fn in SERIES_FUNCTIONS:
                base = fn(_series(values))
                scaled = fn(_series(values * c))
                key = index_key.get(base.type.value)
                if key is not None:
                    assert base.parameters[key] == scaled.parameters[key]
                if fn in scale_free:
                    assert abs(base.significance - scaled.significance) <= 1e-9
            # Shift invariance holds for the location-free statistics.
            cp0, cp1 = change_point(_series(values)), change_point(_series(values + b))
            assert cp0.parameters["index"] == cp1.parameters["index"]
            assert abs(cp0.significance - cp1.significance) <= 1e-9
            assert abs(trend(_series(values)).significance
                       - trend(_series(values + b)).significance) <= 1e-9
            other = rng.uniform(1.0, 500.0, size=n)
            assert abs(correlation(_series(values), _series(other)).significance
                       - correlation(_series(values + b),
                                     _series(other)).significance) <= 1e-9
            pair0 = correlation(_series(values), _series(other))
            pair1 = correlation(_series(values * c), _series(other))
            assert abs(pair0.significance - pair1.significance) <= 1e-9
        _ok("scale/shift invariance (1,000 cases, 1e-9)")

    def test_combined_score(self, superstore_table):
        """Defaults reproduce 0.5/0.2/0.3 to 1e-12; (1,0,0) ranks by significance."""
        rng = np.random.default_rng(2024_04)
        insights, scores = [], []
        for i in range(50):
            sig = float(rng.uniform(0, 1))
            insights.append(Insight(
                InsightType.TREND, {"direction": 1, "extent": ["a", "b"]},
                Subject(SubspaceFilter(), "Month", f"m{i}"), sig, "d",
                ["Sales Trend"], SignificanceDetail(1 - sig, 0.0, "t")))
            scores.append((float(rng.uniform(0, 1)), float(rng.uniform(0, 1))))

        class Fixed:
            def complete(self, prompt, **kwargs):
                return json.dumps([
                    {"insightRef": i, "impact": imp, "relevance": rel}
                    for i, (imp, rel) in enumerate(scores)])

        scored = assess(insights, "t", superstore_table, Fixed(), cap=50)
        by_measure = {s.insight.subject.measure: s for s in scored}
        for i, insight in enumerate(insights):
            s = by_measure[f"m{i}"]
            expected = (0.5 * insight.significance + 0.2 * scores[i][0]
                        + 0.3 * scores[i][1])
            assert abs(s.combined - expected) <= 1e-12

        ranked = assess(insights, "t", superstore_table, Fixed(),
                        ScoreWeights(1.0, 0.0, 0.0), cap=50)
        significances = [s.insight.significance for s in ranked]
        assert significances == sorted(significances, reverse=True)
        _ok("combined score (weighted sum to 1e-12; (1,0,0) = significance order)")

    def test_superstore_reproduction(self, superstore_table):
        """Monthly level shift at 2022-03, profit tracks sales, CA/NY lead."""
        started = time.monotonic()
        monthly_sales = group_aggregate(superstore_table, "Month", "Sales", "sum")
        monthly_profit = group_aggregate(superstore_table, "Month", "Profit", "sum")
        cp = change_point(monthly_sales)
        assert cp.parameters["key"] == "2022-03"
        corr = correlation(monthly_sales, monthly_profit)
        assert corr.parameters["direction"] == 1
        assert corr.significance > 0.95
        states = group_aggregate(superstore_table, "State/Province", "Sales", "sum")
        assert states.keys[0] == "California" and states.keys[1] == "New York"
        top2 = outstanding_top2(states)
        assert top2.parameters["keys"] == ["California", "New York"]
        lookup = value_retrieval(
            superstore_table, Subject(SubspaceFilter(), "State/Province", "Sales"),
            "California")
        assert lookup.parameters["value"] == pytest.approx(float(states.values[0]))
        elapsed = time.monotonic() - started
        assert elapsed < 5.0
        _ok(f"superstore fixture reproduction ({elapsed:.2f}s)")

    def test_bench_self_validation(self):
        """Oracle provider 50/50 in every cell; noisy 0.2 inside binomial 99%."""
        started = time.monotonic()
        config = BenchConfig(trials=50, seed=11)
        perfect = run_suite(config, OracleProvider())
        assert len(perfect.cells) == len(config.tasks) * 8
        for cell in perfect.cells:
            assert cell.trials == 50 and cell.correct_count == 50, \
                f"{cell.task}@{cell.row_count}: {cell.correct_count}/50"
        noisy = run_suite(config, OracleProvider(error_rate=0.2, seed=99))
        low = int(binom.ppf(0.005, 50, 0.8))
        high = int(binom.ppf(0.995, 50, 0.8))
        for cell in noisy.cells:
            assert low <= cell.correct_count <= high, \
                f"{cell.task}@{cell.row_count}: {cell.correct_count} not in " \
                f"[{low}, {high}]"
        elapsed = time.monotonic() - started
        assert elapsed < 120.0
        _ok(f"benchmark self-validation (rows {list(config.row_counts)}, "
            f"{elapsed:.1f}s)")

    def test_end_to_end_mock_session(self, tmp_path):
        """select -> questions -> answer -> adopt x4 -> end -> 6-frame report."""
        started = time.monotonic()
        state = EngineState(tmp_path, provider=MockProvider())
        client = TestClient(create_app(state))
        spec_id = client.post("/specs",
                              json=superstore.spec_document()).json()["specId"]
        data_id = client.post("/datasets", json={
            "name": "superstore", "csv": superstore.csv_text(),
            "schema": superstore.schema_hints()}).json()["datasetId"]
        sid = client.post("/sessions", json={
            "specId": spec_id, "datasetId": data_id,
            "task": "analyze sales"}).json()["sessionId"]
        selection = client.post(f"/sessions/{sid}/selections", json={"triples": [
            {"viewName": "Sales|By Segment", "dimName": "Segment",
             "value": ["Consumer"]}]})
        assert selection.json()["questions"]
        for index in (0, 1, 3, 6):
            insights = client.post(
                f"/sessions/{sid}/questions/{index}/answer").json()["insights"]
            assert insights
            assert client.post(f"/sessions/{sid}/adopt", json={
                "insightId": insights[0]["insightId"]}).status_code == 201
        assert client.post(f"/sessions/{sid}/rounds/end").json()["steps"] == 4
        report = client.post(f"/sessions/{sid}/rounds/1/report").json()
        tex = client.get(f"/reports/{report['name']}.tex").text
        assert frame_count(tex) == 6
        snapshot_dir = tmp_path / "sessions" / sid / "snapshots"
        assert check_latex(tex, snapshot_dir=snapshot_dir) == []
        reloaded = load_session(tmp_path / "sessions", sid)
        assert reloaded.structural_equal(state.sessions[sid].matrix)
        elapsed = time.monotonic() - started
        assert elapsed < 10.0
        _ok(f"end-to-end mock session (6 frames, 0 findings, {elapsed:.1f}s)")

    def test_parser_totality(self):
        """10,000 random byte strings never crash the three reply parsers."""
        rng = np.random.default_rng(2024_08)
        for _ in range(10_000):
            blob = rng.integers(0, 256,
                                size=int(rng.integers(0, 80))).astype(np.uint8)
            text = blob.tobytes().decode("utf-8", errors="replace")
            parse_braced_answers(text)
            for parser in (parse_plan_reply, parse_assessment_reply):
                try:
                    parser(text)
                except PlanParseError:
                    pass
        assert parse_braced_answers(
            "The outstanding top 2 values are {998}, {993}.") == [998, 993]
        assert parse_braced_answers(
            "The trend of the data in the time series over time is decreased. "
            "{-1}.") == [-1]
        _ok("parser totality (10,000 fuzz inputs + the two quoted literals)")

    def test_tutorial_contract(self, superstore_spec, mock_provider):
        """Fixture spec gives 1 + 9 steps and step titles equal view names."""
        from insightloop.spec import render_tutorial
        steps = render_tutorial(superstore_spec, mock_provider)
        assert len(steps) == 1 + superstore_spec.view_count == 10
        for k, view in enumerate(superstore_spec.views_info):
            assert steps[k + 1].title == view.view_name
        _ok("tutorial contract (1 + 9 steps, titles = view names)")
