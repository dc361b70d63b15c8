"""Dataset ingestion and the slicing/grouping substrate for insight computation.

Tables are columnar and immutable after load. Temporal columns keep their
display strings and an internal integer ordinal (epoch months for ``YYYY-MM``,
epoch days for full dates) so time-ordered computations have a total order.
"""

from __future__ import annotations

import csv
import json
import re
from dataclasses import dataclass, field
from datetime import date
from pathlib import Path

import numpy as np

from insightloop.errors import (
    EmptyBase,
    EmptyFile,
    IoError,
    RaggedRow,
    TypeMismatch,
    UnknownDim,
    UnknownMeasure,
)

COLUMN_KINDS = ("number", "temporal", "category", "text")

_MONTH_RE = re.compile(r"^\d{4}-\d{2}$")
_DATE_RE = re.compile(r"^\d{4}-\d{2}-\d{2}([T ].*)?$")

_EPOCH = date(1970, 1, 1).toordinal()


def _temporal_ordinal(text: str) -> int:
    """Epoch-month index for YYYY-MM, epoch-day index for full dates."""
    if _MONTH_RE.match(text):
        year, month = int(text[:4]), int(text[5:7])
        return (year - 1970) * 12 + (month - 1)
    return date(int(text[:4]), int(text[5:7]), int(text[8:10])).toordinal() - _EPOCH


def _parses_number(text: str) -> bool:
    try:
        float(text)
    except ValueError:
        return False
    # Reject the textual specials float() accepts.
    return not any(ch.isalpha() for ch in text)


def _infer_kind(raw: list[str]) -> str:
    present = [v for v in raw if v != ""]
    if not present:
        return "text"
    if all(_parses_number(v) for v in present):
        return "number"
    if all(_MONTH_RE.match(v) or _DATE_RE.match(v) for v in present):
        return "temporal"
    distinct_ratio = len(set(present)) / len(present)
    return "category" if distinct_ratio < 0.5 else "text"


@dataclass
class Column:
    name: str
    kind: str
    values: object            # ndarray[float64] for number, list[str] otherwise
    ordinals: object = None   # ndarray[float64] for temporal (NaN = missing)

    def take(self, indices: np.ndarray) -> "Column":
        if self.kind == "number":
            return Column(self.name, self.kind, self.values[indices])
        vals = [self.values[i] for i in indices]
        ords = self.ordinals[indices] if self.ordinals is not None else None
        return Column(self.name, self.kind, vals, ords)


@dataclass
class Table:
    name: str
    columns: list[Column]
    row_count: int
    _by_name: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        self._by_name = {c.name: c for c in self.columns}
        if len(self._by_name) != len(self.columns):
            raise TypeMismatch("duplicate column names")

    def column(self, name: str) -> Column:
        try:
            return self._by_name[name]
        except KeyError:
            raise UnknownDim(f"no column named {name!r}") from None

    @property
    def column_names(self) -> list[str]:
        return [c.name for c in self.columns]

    def schema(self) -> dict[str, str]:
        return {c.name: c.kind for c in self.columns}

    def take(self, indices: np.ndarray) -> "Table":
        return Table(self.name, [c.take(indices) for c in self.columns], int(len(indices)))


@dataclass(frozen=True)
class SubspaceFilter:
    """Conjunction of set-membership predicates, one per dimension."""

    predicates: tuple = ()

    @classmethod
    def from_pairs(cls, pairs) -> "SubspaceFilter":
        merged: dict[str, tuple] = {}
        for dim, values in pairs:
            vals = tuple(values)
            if not vals:
                raise TypeMismatch(f"empty value set for dimension {dim!r}")
            if dim in merged:
                extra = tuple(v for v in vals if v not in merged[dim])
                merged[dim] = merged[dim] + extra
            else:
                merged[dim] = vals
        return cls(tuple(merged.items()))

    def is_empty(self) -> bool:
        return not self.predicates

    def to_payload(self) -> list[dict]:
        return [{"dimName": d, "values": list(v)} for d, v in self.predicates]

    @classmethod
    def from_payload(cls, payload) -> "SubspaceFilter":
        return cls.from_pairs((p["dimName"], p["values"]) for p in payload)

    def describe(self) -> str:
        if not self.predicates:
            return "all data"
        parts = [f"{d} in {{{', '.join(str(x) for x in v)}}}" for d, v in self.predicates]
        return " and ".join(parts)


class Series:
    """An ordered measure vector, optionally keyed by dimension values."""

    def __init__(self, measure: str, values, keys=None, dimension: str | None = None):
        self.measure = measure
        self.values = np.asarray(values, dtype=np.float64)
        self.keys = tuple(keys) if keys is not None else None
        self.dimension = dimension
        if self.keys is not None and len(self.keys) != self.values.shape[0]:
            raise TypeMismatch("dimension key list must match value count")

    @property
    def n(self) -> int:
        return int(self.values.shape[0])

    def key(self, i: int):
        return self.keys[i] if self.keys is not None else int(i)

    def dropna(self) -> "Series":
        mask = np.isfinite(self.values)
        if mask.all():
            return self
        keys = tuple(k for k, m in zip(self.keys, mask) if m) if self.keys is not None else None
        return Series(self.measure, self.values[mask], keys, self.dimension)

    def to_payload(self) -> dict:
        return {
            "measure": self.measure,
            "dimension": self.dimension,
            "keys": list(self.keys) if self.keys is not None else None,
            "values": [float(v) for v in self.values],
        }


def load_csv(path, type_hints: dict[str, str] | None = None, name: str | None = None) -> Table:
    """Load an RFC-4180 CSV with a header row into a typed Table.

    Column kinds come from ``type_hints`` when given, then from the sidecar
    ``<stem>.schema.json`` if present, then from inference.
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise IoError(f"cannot read {path}: {exc}") from exc

    if type_hints is not None:
        hints = dict(type_hints)
    else:
        hints = {}
        sidecar = path.with_suffix(".schema.json")
        if sidecar.exists():
            try:
                hints = json.loads(sidecar.read_text(encoding="utf-8"))
            except (OSError, json.JSONDecodeError) as exc:
                raise IoError(f"bad schema sidecar {sidecar}: {exc}") from exc

    rows = list(csv.reader(text.splitlines()))
    if not rows:
        raise EmptyFile(f"{path} has no header row")
    header = rows[0]
    width = len(header)
    data = rows[1:]
    for i, row in enumerate(data, start=1):
        if len(row) != width:
            raise RaggedRow(i, width, len(row))

    raw_columns = [[row[j] for row in data] for j in range(width)]
    columns = []
    for col_name, raw in zip(header, raw_columns):
        kind = hints.get(col_name) or _infer_kind(raw)
        if kind not in COLUMN_KINDS:
            raise TypeMismatch(f"unknown column kind {kind!r} for {col_name!r}")
        columns.append(_build_column(col_name, kind, raw))
    return Table(name or path.stem, columns, len(data))


def _build_column(name: str, kind: str, raw: list[str]) -> Column:
    if kind == "number":
        vals = np.array([float(v) if v != "" and _parses_number(v) else np.nan for v in raw],
                        dtype=np.float64)
        return Column(name, kind, vals)
    if kind == "temporal":
        ords = np.array(
            [float(_temporal_ordinal(v)) if v != "" and (_MONTH_RE.match(v) or _DATE_RE.match(v))
             else np.nan for v in raw],
            dtype=np.float64,
        )
        return Column(name, kind, list(raw), ords)
    return Column(name, kind, list(raw))


def table_from_rows(name: str, header: list[str], rows: list[list], hints=None) -> Table:
    """Build a Table from in-memory rows using the same typing rules as load_csv."""
    raw = [[("" if cell is None else str(cell)) for cell in row] for row in rows]
    for i, row in enumerate(raw, start=1):
        if len(row) != len(header):
            raise RaggedRow(i, len(header), len(row))
    hints = hints or {}
    columns = []
    for j, col_name in enumerate(header):
        col_raw = [row[j] for row in raw]
        kind = hints.get(col_name) or _infer_kind(col_raw)
        columns.append(_build_column(col_name, kind, col_raw))
    return Table(name, columns, len(raw))


def apply_subspace(table: Table, subspace: SubspaceFilter) -> Table:
    """Rows satisfying every predicate; column structure preserved."""
    if subspace.is_empty():
        return table
    mask = np.ones(table.row_count, dtype=bool)
    for dim, values in subspace.predicates:
        col = table.column(dim)
        if col.kind == "number":
            wanted = set()
            for v in values:
                try:
                    wanted.add(float(v))
                except (TypeError, ValueError):
                    continue
            mask &= np.isin(col.values, sorted(wanted)) if wanted else False
        else:
            wanted = {str(v) for v in values}
            mask &= np.array([v in wanted for v in col.values], dtype=bool)
    return table.take(np.nonzero(mask)[0])


def coverage(sub: Table, full: Table) -> float:
    """Row-count ratio of a subspace over its base table."""
    if full.row_count == 0:
        raise EmptyBase("base table has no rows")
    return sub.row_count / full.row_count


def group_aggregate(table: Table, dim: str, measure: str, agg: str = "sum") -> Series:
    """Aggregate a measure per distinct dimension value.

    Temporal dimensions sort ascending; categorical sort by aggregate
    descending (stable on ties). Missing measure cells are dropped from
    sum/mean; groups with no present values are dropped too. ``count``
    counts rows regardless of the measure.
    """
    if agg not in ("sum", "mean", "count"):
        raise TypeMismatch(f"unsupported aggregation {agg!r}")
    dim_col = table.column(dim)
    if dim_col.kind not in ("category", "temporal"):
        raise TypeMismatch(f"{dim!r} is a {dim_col.kind} column; group by category or temporal")
    try:
        measure_col = table.column(measure)
    except UnknownDim:
        raise UnknownMeasure(f"no column named {measure!r}") from None
    if agg != "count" and measure_col.kind != "number":
        raise TypeMismatch(f"{measure!r} is {measure_col.kind}, not number")

    groups: dict[str, list[int]] = {}
    for i in range(table.row_count):
        groups.setdefault(dim_col.values[i], []).append(i)

    keys: list[str] = []
    values: list[float] = []
    for key, idx in groups.items():
        if agg == "count":
            keys.append(key)
            values.append(float(len(idx)))
            continue
        cells = measure_col.values[np.array(idx)]
        cells = cells[np.isfinite(cells)]
        if cells.shape[0] == 0:
            continue
        keys.append(key)
        values.append(float(cells.sum()) if agg == "sum" else float(cells.mean()))

    if dim_col.kind == "temporal":
        order = sorted(range(len(keys)),
                       key=lambda i: _temporal_ordinal(keys[i]) if keys[i] else -(10 ** 9))
    else:
        order = sorted(range(len(keys)), key=lambda i: -values[i])
    return Series(measure, [values[i] for i in order], [keys[i] for i in order], dimension=dim)
