"""Deterministic superstore fixture: a 9-view dashboard spec plus sales data.

The data is constructed so the headline findings are forced: monthly sales
step up entering 2022-03, profit tracks 0.2 * sales with small noise, and
California then New York lead state sales in every segment slice.
``write_fixtures`` regenerates the committed files under ``fixtures/``.
"""

from __future__ import annotations

import csv
import io
import json
from pathlib import Path

import numpy as np

from insightloop.recommend import FunctionDescriptor
from insightloop.tabular import Table, table_from_rows

DEFAULT_SEED = 7

MONTHS = [f"2022-{m:02d}" for m in range(1, 13)]
MONTH_BASE_LOW = 100.0    # January, February
MONTH_BASE_HIGH = 300.0   # the level shift entering March

STATE_WEIGHTS = [
    ("California", 3.0),
    ("New York", 2.4),
    ("Texas", 1.2),
    ("Washington", 1.1),
    ("Pennsylvania", 1.0),
    ("Ohio", 0.95),
    ("Illinois", 0.9),
    ("Florida", 0.85),
    ("Michigan", 0.8),
    ("Delaware", 0.75),
]

SEGMENT_WEIGHTS = [("Consumer", 1.2), ("Corporate", 1.0), ("Home Office", 0.8)]

CATEGORIES = {
    "Furniture": ["Chairs", "Tables", "Bookcases"],
    "Office Supplies": ["Binders", "Paper", "Storage"],
    "Technology": ["Phones", "Accessories", "Machines"],
}

MANUFACTURERS = ["Other", "GBC", "Canon", "HP", "Logitech", "3M", "Epson"]

CUSTOMERS = [
    "Aaron Hawkins", "Becky Martin", "Carlos Meador", "Dana Teague",
    "Erica Hernandez", "Frank Olsen", "Gary Mitchum", "Helen Wasserman",
    "Ivan Liston", "Joni Sundaresam", "Karen Carlisle", "Liz Thompson",
    "Marc Harrigan", "Nora Preis", "Olga Nichols",
]

HEADER = ["Month", "Order Date", "State/Province", "Segment", "Category",
          "Sub-Category", "Manufacturer", "Customer Name", "Sales", "Profit",
          "Orders"]

ROWS_PER_CELL = 5


def _manufacturer_weights(state: str) -> list[float]:
    # "Other" dominates everywhere; GBC is strong in CA/NY, Canon in WA/DE.
    weights = {"Other": 3.0, "GBC": 0.5, "Canon": 1.0, "HP": 0.8,
               "Logitech": 0.7, "3M": 0.6, "Epson": 0.5}
    if state in ("California", "New York"):
        weights["GBC"] = 2.2
        weights["Canon"] = 0.4
    if state in ("Washington", "Delaware"):
        weights["Canon"] = 2.5
    total = sum(weights[m] for m in MANUFACTURERS)
    return [weights[m] / total for m in MANUFACTURERS]


def generate_rows(seed: int = DEFAULT_SEED) -> list[list[str]]:
    """All data rows as CSV-ready strings; deterministic per seed."""
    rng = np.random.default_rng(seed)
    category_names = list(CATEGORIES)
    rows: list[list[str]] = []
    for mi, month in enumerate(MONTHS):
        base = MONTH_BASE_LOW if mi < 2 else MONTH_BASE_HIGH
        for state, sw in STATE_WEIGHTS:
            man_p = _manufacturer_weights(state)
            for segment, gw in SEGMENT_WEIGHTS:
                for _ in range(ROWS_PER_CELL):
                    sales = base * sw * gw * rng.uniform(0.7, 1.3) / ROWS_PER_CELL
                    profit = 0.2 * sales + rng.normal(0.0, 0.01 * base)
                    day = int(rng.integers(1, 29))
                    category = category_names[int(rng.choice(3, p=[0.3, 0.45, 0.25]))]
                    sub = CATEGORIES[category][int(rng.integers(0, 3))]
                    manufacturer = MANUFACTURERS[int(rng.choice(len(MANUFACTURERS),
                                                                p=man_p))]
                    customer = CUSTOMERS[int(rng.integers(0, len(CUSTOMERS)))]
                    orders = int(rng.integers(1, 5))
                    rows.append([
                        month, f"{month}-{day:02d}", state, segment, category, sub,
                        manufacturer, customer, f"{sales:.2f}", f"{profit:.2f}",
                        str(orders),
                    ])
    return rows


def csv_text(seed: int = DEFAULT_SEED) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(HEADER)
    writer.writerows(generate_rows(seed))
    return buffer.getvalue()


def build_table(seed: int = DEFAULT_SEED) -> Table:
    return table_from_rows("superstore", HEADER, generate_rows(seed),
                           hints=schema_hints())


def schema_hints() -> dict[str, str]:
    return {
        "Month": "temporal",
        "Order Date": "temporal",
        "State/Province": "category",
        "Segment": "category",
        "Category": "category",
        "Sub-Category": "category",
        "Manufacturer": "category",
        "Customer Name": "category",
        "Sales": "number",
        "Profit": "number",
        "Orders": "number",
    }


def _bar_view(name: str, dim: str, measure: str = "Sales") -> dict:
    return {
        "viewName": name,
        "layers": [{
            "mark": "bar",
            "encoding": {
                "y": {"field": dim, "fieldType": "nominal"},
                "x": {"field": measure, "fieldType": "quantitative",
                      "aggregate": "sum"},
            },
        }],
        "tooltip": [dim, measure],
    }


def _line_view(name: str, measure: str) -> dict:
    return {
        "viewName": name,
        "layers": [{
            "mark": "line",
            "encoding": {
                "x": {"field": "Month", "fieldType": "temporal"},
                "y": {"field": measure, "fieldType": "quantitative",
                      "aggregate": "sum"},
            },
        }],
    }


def spec_document() -> dict:
    views = [
        {
            "viewName": "Sales|By State",
            "layers": [{
                "mark": "geoshape",
                "encoding": {
                    "geography": {"field": "State/Province", "fieldType": "nominal"},
                    "color": {"field": "Sales", "fieldType": "quantitative",
                              "aggregate": "sum"},
                },
            }],
            "tooltip": ["State/Province", "Sales"],
        },
        _bar_view("Sales|By Segment", "Segment"),
        _bar_view("Sales|By Category", "Category"),
        _bar_view("Sales|By Sub-Category", "Sub-Category"),
        _bar_view("Sales|Top 10 Manufacturers", "Manufacturer"),
        _bar_view("Sales|Top 10 Customers", "Customer Name"),
        _line_view("Sales Trend", "Sales"),
        _line_view("Profit Trend", "Profit"),
        _line_view("Orders Trend", "Orders"),
    ]
    sources = [v["viewName"] for v in views[:6]]
    all_names = [v["viewName"] for v in views]
    coordinations = []
    for source in sources:
        for target in all_names:
            if target == source:
                continue
            coordinations.append({
                "sourceViewName": source,
                "targetViewName": target,
                "coordinationType": "filter",
                "interaction": [{"trigger": "click", "effect": "filter"}],
            })
    return {
        "systemInfo": {"name": "Superstore Dashboard", "viewCount": len(views)},
        "viewsInfo": views,
        "coordinations": coordinations,
    }


def function_registry() -> list[FunctionDescriptor]:
    entries = [
        ("outstanding_no1",
         "Check whether the leading value of a grouped measure stands significantly "
         "above all remaining values."),
        ("outstanding_top2",
         "Check whether the two largest values of a grouped measure stand "
         "significantly above the rest."),
        ("outstanding_last",
         "Check whether the smallest value of a grouped measure falls significantly "
         "below the rest."),
        ("outlier", "Flag values that deviate abnormally from the rest of a series."),
        ("change_point",
         "Locate the time point where the level of an ordered measure shifts "
         "significantly."),
        ("trend",
         "Test whether an ordered measure moves with a distinct increasing or "
         "decreasing trend."),
        ("seasonality", "Detect a repeating period in an ordered measure."),
        ("correlation",
         "Measure the linear relationship between two measures across coordinated "
         "views."),
        ("attribution",
         "Find the category contributing a dominant share of the total."),
        ("evenness",
         "Test whether a measure is distributed evenly across categories."),
        ("value_retrieval",
         "Retrieve the aggregated measure value for one chosen dimension member."),
        ("text_summary", "Summarize free-text records through the language model."),
        ("key_nodes",
         "Identify the most important nodes in graph-shaped data through the "
         "language model."),
        ("key_links",
         "Identify the most important links in graph-shaped data through the "
         "language model."),
    ]
    return [FunctionDescriptor(name, desc) for name, desc in entries]


def write_fixtures(directory) -> list[Path]:
    """Write the committed fixture files; returns the paths written."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    written = []

    spec_path = directory / "superstore.vaspec.json"
    spec_path.write_text(json.dumps(spec_document(), indent=2, ensure_ascii=False) + "\n",
                         encoding="utf-8")
    written.append(spec_path)

    csv_path = directory / "superstore.csv"
    csv_path.write_text(csv_text(), encoding="utf-8")
    written.append(csv_path)

    schema_path = directory / "superstore.schema.json"
    schema_path.write_text(json.dumps(schema_hints(), indent=2) + "\n", encoding="utf-8")
    written.append(schema_path)

    functions_path = directory / "functions.json"
    functions_path.write_text(
        json.dumps([f.to_payload() for f in function_registry()], indent=2) + "\n",
        encoding="utf-8")
    written.append(functions_path)
    return written
