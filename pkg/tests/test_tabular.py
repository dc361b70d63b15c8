from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from insightloop.errors import (
    EmptyBase,
    EmptyFile,
    RaggedRow,
    TypeMismatch,
    UnknownDim,
    UnknownMeasure,
)
from insightloop.tabular import (
    SubspaceFilter,
    apply_subspace,
    coverage,
    group_aggregate,
    load_csv,
    table_from_rows,
)


def _write(tmp_path, text, name="data.csv"):
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return path


class TestLoadCsv:
    def test_superstore_inference(self, fixtures_dir, tmp_path):
        # Copy without the schema sidecar so kinds come from inference alone.
        raw = (fixtures_dir / "superstore.csv").read_text(encoding="utf-8")
        table = load_csv(_write(tmp_path, raw))
        kinds = table.schema()
        assert kinds["Sales"] == "number"
        assert kinds["Profit"] == "number"
        assert kinds["Order Date"] == "temporal"
        assert kinds["Month"] == "temporal"
        assert kinds["State/Province"] == "category"

    def test_sidecar_hints_win(self, fixtures_dir):
        table = load_csv(fixtures_dir / "superstore.csv")
        assert table.schema() == {
            "Month": "temporal", "Order Date": "temporal",
            "State/Province": "category", "Segment": "category",
            "Category": "category", "Sub-Category": "category",
            "Manufacturer": "category", "Customer Name": "category",
            "Sales": "number", "Profit": "number", "Orders": "number",
        }

    def test_header_only(self, tmp_path):
        table = load_csv(_write(tmp_path, "a,b,c\n"))
        assert table.row_count == 0

    def test_ragged_row(self, tmp_path):
        with pytest.raises(RaggedRow) as err:
            load_csv(_write(tmp_path, "a,b\n1,2\n3\n"))
        assert err.value.row_index == 2

    def test_empty_file(self, tmp_path):
        with pytest.raises(EmptyFile):
            load_csv(_write(tmp_path, ""))


class TestApplySubspace:
    def test_state_filter(self, superstore_table):
        f = SubspaceFilter.from_pairs(
            [("State/Province", ["California", "New York"])])
        sub = apply_subspace(superstore_table, f)
        assert 0 < sub.row_count < superstore_table.row_count
        assert set(sub.column("State/Province").values) == {"California", "New York"}

    def test_identity_filter(self, superstore_table):
        sub = apply_subspace(superstore_table, SubspaceFilter())
        assert sub.row_count == superstore_table.row_count

    def test_absent_value(self, superstore_table):
        f = SubspaceFilter.from_pairs([("Segment", ["Wholesale"])])
        assert apply_subspace(superstore_table, f).row_count == 0

    def test_unknown_dim(self, superstore_table):
        f = SubspaceFilter.from_pairs([("Nope", ["x"])])
        with pytest.raises(UnknownDim):
            apply_subspace(superstore_table, f)

    @given(st.lists(st.sampled_from(["Consumer", "Corporate", "Home Office"]),
                    min_size=1, max_size=3, unique=True),
           st.lists(st.sampled_from(["California", "Texas", "Ohio"]),
                    min_size=1, max_size=2, unique=True))
    @settings(max_examples=20, deadline=None)
    def test_conjunction_is_monotone(self, segs, states):
        table = _small_table()
        f_seg = SubspaceFilter.from_pairs([("Segment", segs)])
        f_both = SubspaceFilter.from_pairs(
            [("Segment", segs), ("State/Province", states)])
        both = apply_subspace(table, f_both).row_count
        assert both <= apply_subspace(table, f_seg).row_count
        assert both <= apply_subspace(
            table, SubspaceFilter.from_pairs([("State/Province", states)])).row_count


def _small_table():
    rows = []
    for month in ("2022-01", "2022-02"):
        for seg in ("Consumer", "Corporate", "Home Office"):
            for state in ("California", "Texas", "Ohio"):
                rows.append([month, seg, state, "10.0"])
    return table_from_rows("small", ["Month", "Segment", "State/Province", "Sales"],
                           rows)


class TestCoverage:
    def test_half(self, superstore_table):
        f = SubspaceFilter.from_pairs([("Segment", ["Consumer"])])
        sub = apply_subspace(superstore_table, f)
        ratio = coverage(sub, superstore_table)
        assert 0.0 < ratio < 1.0
        assert ratio * superstore_table.row_count == sub.row_count

    def test_self_is_one(self, superstore_table):
        assert coverage(superstore_table, superstore_table) == 1.0

    def test_empty_sub_is_zero(self, superstore_table):
        sub = apply_subspace(
            superstore_table, SubspaceFilter.from_pairs([("Segment", ["Nope"])]))
        assert coverage(sub, superstore_table) == 0.0

    def test_empty_base(self):
        empty = table_from_rows("e", ["a"], [])
        with pytest.raises(EmptyBase):
            coverage(empty, empty)


class TestGroupAggregate:
    def test_states_led_by_california(self, superstore_table):
        series = group_aggregate(superstore_table, "State/Province", "Sales", "sum")
        assert series.keys[0] == "California"
        assert series.keys[1] == "New York"
        assert all(series.values[i] >= series.values[i + 1]
                   for i in range(series.n - 1))

    def test_temporal_sorted_ascending(self, superstore_table):
        series = group_aggregate(superstore_table, "Month", "Sales", "sum")
        assert list(series.keys) == [f"2022-{m:02d}" for m in range(1, 13)]

    def test_single_valued_dim(self):
        table = table_from_rows("t", ["k", "v"], [["a", "1"], ["a", "2"]],
                                hints={"k": "category"})
        series = group_aggregate(table, "k", "v", "sum")
        assert series.n == 1 and series.values[0] == 3.0

    def test_count_conservation(self, superstore_table):
        series = group_aggregate(superstore_table, "Segment", "Sales", "count")
        assert series.values.sum() == superstore_table.row_count

    def test_sum_conservation(self, superstore_table):
        series = group_aggregate(superstore_table, "Segment", "Sales", "sum")
        total = np.nansum(superstore_table.column("Sales").values)
        assert abs(series.values.sum() - total) <= 1e-9 * abs(total)

    def test_unknown_names(self, superstore_table):
        with pytest.raises(UnknownDim):
            group_aggregate(superstore_table, "Nope", "Sales", "sum")
        with pytest.raises(UnknownMeasure):
            group_aggregate(superstore_table, "Segment", "Nope", "sum")

    def test_type_mismatch(self, superstore_table):
        with pytest.raises(TypeMismatch):
            group_aggregate(superstore_table, "Sales", "Profit", "sum")
        with pytest.raises(TypeMismatch):
            group_aggregate(superstore_table, "Segment", "Manufacturer", "sum")

    def test_missing_cells_dropped(self):
        table = table_from_rows("t", ["k", "v"],
                                [["a", "1"], ["a", ""], ["b", "2"], ["c", ""]],
                                hints={"k": "category"})
        series = group_aggregate(table, "k", "v", "sum")
        assert dict(zip(series.keys, series.values)) == {"a": 1.0, "b": 2.0}

    def test_text_dim_rejected(self):
        table = table_from_rows("t", ["k", "v"], [["a", "1"], ["b", "2"]],
                                hints={"k": "text"})
        with pytest.raises(TypeMismatch):
            group_aggregate(table, "k", "v", "sum")
