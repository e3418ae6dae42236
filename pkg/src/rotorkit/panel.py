"""Multi-index GMV panels: parsing, validation, aggregation and serialization.

Values are total market value (GMV) in RMB 100-million units. A panel is a
set of index series sharing one date vector, optionally carrying the
published aggregate column so it can be checked against the row sums.
"""

from __future__ import annotations

import csv
import io
import json
import math
import warnings
from dataclasses import dataclass
from datetime import date, datetime
from importlib import resources
from typing import Mapping, Optional, Sequence

import numpy as np

from .errors import (
    ColumnMissing,
    DateNotFound,
    DuplicateDate,
    InputUnreadable,
    MalformedRow,
    UnknownMember,
)

AGGREGATE_TOLERANCE = 1e-4
STALE_RTOL = 1e-6

FIXTURE_NAME = "fixture:table2"
TABLE2_COLUMNS = ("SSE", "STAR50", "GEM", "SZI")


@dataclass(frozen=True)
class IndexSeries:
    name: str
    dates: tuple[date, ...]
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        values.setflags(write=False)
        object.__setattr__(self, "dates", tuple(self.dates))
        object.__setattr__(self, "values", values)
        if values.ndim != 1 or len(values) != len(self.dates):
            raise ValueError(
                f"series {self.name!r}: {len(values)} values for {len(self.dates)} dates"
            )

    def __len__(self):
        return len(self.dates)

    def value_at(self, day: date) -> float:
        try:
            return float(self.values[self.dates.index(day)])
        except ValueError:
            raise DateNotFound(f"{day.isoformat()} not in series {self.name!r}") from None


@dataclass(frozen=True)
class Panel:
    """Date-aligned collection of index series.

    ``aggregate`` holds the published per-date totals when the source file had
    them; it is never recomputed silently, so :func:`validate_panel` can
    compare it with the row sums.
    """

    series: tuple[IndexSeries, ...]
    aggregate: Optional[np.ndarray] = None

    def __post_init__(self):
        object.__setattr__(self, "series", tuple(self.series))
        if not self.series:
            raise ValueError("panel needs at least one series")
        if self.aggregate is not None:
            agg = np.asarray(self.aggregate, dtype=np.float64)
            agg.setflags(write=False)
            object.__setattr__(self, "aggregate", agg)
            if len(agg) != len(self.series[0]):
                raise ValueError("aggregate length differs from the date vector")

    @classmethod
    def from_arrays(cls, dates, columns: Mapping[str, Sequence[float]], aggregate=None) -> "Panel":
        dates = tuple(dates)
        return cls(
            tuple(IndexSeries(name, dates, vals) for name, vals in columns.items()),
            aggregate,
        )

    @property
    def dates(self) -> tuple[date, ...]:
        return self.series[0].dates

    @property
    def names(self) -> list[str]:
        return [s.name for s in self.series]

    @property
    def matrix(self) -> np.ndarray:
        """Values as a (dates x series) array."""
        return np.column_stack([s.values for s in self.series])

    def __len__(self):
        return len(self.dates)

    def __getitem__(self, name: str) -> IndexSeries:
        for s in self.series:
            if s.name == name:
                return s
        raise UnknownMember(f"no series named {name!r}; have {self.names}")

    def select(self, names: Sequence[str]) -> "Panel":
        """Sub-panel with the named series, in the given order (aggregate dropped)."""
        return Panel(tuple(self[n] for n in names))

    def take(self, rows: Sequence[int]) -> "Panel":
        rows = list(rows)
        dates = [self.dates[i] for i in rows]
        series = tuple(IndexSeries(s.name, dates, s.values[rows]) for s in self.series)
        agg = None if self.aggregate is None else self.aggregate[rows]
        return Panel(series, agg)

    def between(self, start: date, end: date) -> "Panel":
        """Rows with ``start <= date <= end``."""
        return self.take([i for i, d in enumerate(self.dates) if start <= d <= end])


@dataclass(frozen=True)
class PanelSchema:
    """How CSV headers map onto a panel.

    ``columns`` maps CSV header -> series name (a plain sequence keeps the
    header as the name). ``None`` takes every column that is neither the date
    nor the aggregate column.
    """

    date_column: str = "date"
    columns: Optional[Mapping[str, str] | Sequence[str]] = None
    aggregate_column: Optional[str] = None


TABLE2_SCHEMA = PanelSchema(columns=TABLE2_COLUMNS, aggregate_column="aggregate")


@dataclass(frozen=True)
class Violation:
    kind: str
    column: Optional[str]
    date: Optional[date]
    observed: Optional[float] = None
    expected: Optional[float] = None
    detail: str = ""

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "date": self.date.isoformat() if self.date else None,
            "column": self.column,
            "observed": self.observed,
            "expected": self.expected,
            "detail": self.detail,
        }


def parse_date(text: str) -> date:
    text = text.strip()
    for fmt in ("%Y-%m-%d", "%Y/%m/%d"):
        try:
            return datetime.strptime(text, fmt).date()
        except ValueError:
            pass
    raise ValueError(f"unrecognised date {text!r} (want YYYY/M/D or YYYY-MM-DD)")


def _parse_number(text: str) -> float:
    value = float(text)
    if not math.isfinite(value):
        raise ValueError(f"non-finite value {text!r}")
    return value


def parse_panel(csv_text: str, schema: PanelSchema = PanelSchema()) -> Panel:
    """Parse CSV text into a :class:`Panel`.

    Rows may arrive in any order; they are sorted by date. Columns present in
    the file but absent from an explicit schema are ignored with a warning.

    Raises:
        ColumnMissing: a schema column (or the date column) is not in the header.
        MalformedRow: a date or number fails to parse, or a row is short.
        DuplicateDate: the same date appears twice.
    """
    reader = csv.reader(io.StringIO(csv_text.lstrip("\ufeff")))
    try:
        header = [h.strip() for h in next(reader)]
    except StopIteration:
        raise ColumnMissing("empty input: no header row") from None

    if schema.date_column not in header:
        raise ColumnMissing(f"date column {schema.date_column!r} not in header {header}")
    if schema.aggregate_column is not None and schema.aggregate_column not in header:
        raise ColumnMissing(f"aggregate column {schema.aggregate_column!r} not in header")

    if schema.columns is None:
        mapping = {
            h: h for h in header if h not in (schema.date_column, schema.aggregate_column) and h
        }
    elif isinstance(schema.columns, Mapping):
        mapping = dict(schema.columns)
    else:
        mapping = {c: c for c in schema.columns}

    missing = [c for c in mapping if c not in header]
    if missing:
        raise ColumnMissing(f"columns {missing} not in header {header}")
    if len(mapping) < 2:
        raise ColumnMissing(f"need at least 2 value columns, got {list(mapping)}")

    used = set(mapping) | {schema.date_column, schema.aggregate_column}
    extra = [h for h in header if h and h not in used]
    if extra:
        warnings.warn(f"ignoring extra columns: {', '.join(extra)}", stacklevel=2)

    date_pos = header.index(schema.date_column)
    value_pos = [header.index(c) for c in mapping]
    agg_pos = header.index(schema.aggregate_column) if schema.aggregate_column else None

    rows = []
    seen: dict[date, int] = {}
    for lineno, row in enumerate(reader, start=2):
        if not row or all(not cell.strip() for cell in row):
            continue
        try:
            day = parse_date(row[date_pos])
            values = [_parse_number(row[p]) for p in value_pos]
            agg = _parse_number(row[agg_pos]) if agg_pos is not None else None
        except (ValueError, IndexError) as exc:
            raise MalformedRow(f"line {lineno}: {exc}") from None
        if day in seen:
            raise DuplicateDate(f"line {lineno}: {day.isoformat()} already on line {seen[day]}")
        seen[day] = lineno
        rows.append((day, values, agg))

    if not rows:
        raise MalformedRow("no data rows")
    rows.sort(key=lambda r: r[0])
    dates = [r[0] for r in rows]
    matrix = np.array([r[1] for r in rows], dtype=np.float64)
    aggregate = np.array([r[2] for r in rows]) if agg_pos is not None else None
    series = tuple(
        IndexSeries(name, dates, matrix[:, j]) for j, name in enumerate(mapping.values())
    )
    return Panel(series, aggregate)


def fixture_text() -> str:
    """Raw CSV text of the embedded ``fixture:table2`` panel."""
    return resources.files("rotorkit").joinpath("data/table2.csv").read_text(encoding="utf-8")


def load_fixture() -> Panel:
    return parse_panel(fixture_text(), TABLE2_SCHEMA)


def load_panel(
    source: str, schema: Optional[PanelSchema] = None, columns: Optional[Sequence[str]] = None
) -> Panel:
    """Load ``fixture:table2`` or a CSV file path.

    Without a schema the header is sniffed: a ``date`` column (else the first
    column), an optional ``aggregate`` column, and either ``columns`` or every
    remaining column as values.
    """
    if source == FIXTURE_NAME:
        panel = load_fixture()
        return panel if columns is None else Panel(panel.select(columns).series)
    try:
        with open(source, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise InputUnreadable(f"{source}: {exc.strerror or exc}") from None
    except UnicodeDecodeError as exc:
        raise InputUnreadable(f"{source}: not UTF-8 ({exc.reason})") from None
    if schema is None:
        header = next(csv.reader(io.StringIO(text.lstrip("\ufeff"))), [])
        header = [h.strip() for h in header]
        agg = next((h for h in header if h.lower() == "aggregate"), None)
        date_col = next((h for h in header if h.lower() == "date"), header[0] if header else "date")
        schema = PanelSchema(date_column=date_col, columns=columns, aggregate_column=agg)
    return parse_panel(text, schema)


def validate_panel(panel: Panel) -> list[Violation]:
    """Check every panel invariant; violations are returned, never raised."""
    out: list[Violation] = []
    if len(panel.series) < 2:
        out.append(Violation("TooFewSeries", None, None, len(panel.series), 2))
    ref = panel.dates
    for s in panel.series:
        if s.dates != ref:
            out.append(Violation("DateMismatch", s.name, None, detail="date vector differs"))
        for prev, cur in zip(s.dates, s.dates[1:]):
            if cur <= prev:
                out.append(Violation("DatesNotIncreasing", s.name, cur, detail=f"after {prev}"))
        for day, v in zip(s.dates, s.values):
            if not math.isfinite(v):
                out.append(Violation("NonFiniteValue", s.name, day, float(v)))
            elif v <= 0:
                out.append(Violation("NonPositiveValue", s.name, day, float(v)))
    if panel.aggregate is not None:
        sums = compute_aggregate(panel)
        for day, obs, exp in zip(ref, panel.aggregate, sums):
            if not abs(obs - exp) <= AGGREGATE_TOLERANCE:
                out.append(
                    Violation("AggregateMismatch", "aggregate", day, float(obs), float(exp))
                )
    return out


def compute_aggregate(panel: Panel) -> np.ndarray:
    return panel.matrix.sum(axis=1)


def dedupe_stale_dates(panel: Panel, rtol: float = STALE_RTOL) -> Panel:
    """Drop rows that merely repeat the previous kept row.

    A row is stale when every series value is within ``rtol`` (relative) of
    the last row that was kept. Comparing against the last *kept* row makes
    the operation idempotent.
    """
    m = panel.matrix
    keep = [0]
    for i in range(1, len(m)):
        last = m[keep[-1]]
        if not np.all(np.abs(m[i] - last) <= rtol * np.abs(last)):
            keep.append(i)
    if len(keep) == len(m):
        return panel
    return panel.take(keep)


def panel_to_csv(panel: Panel, precision: Optional[int] = None) -> str:
    """Canonical CSV: ISO dates, series in panel order, aggregate last if present.

    With ``precision=None`` floats use ``repr`` so a parse round-trip is exact.
    """
    fmt = repr if precision is None else (lambda v: f"{v:.{precision}f}")
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    header = ["date", *panel.names] + (["aggregate"] if panel.aggregate is not None else [])
    w.writerow(header)
    m = panel.matrix
    for i, day in enumerate(panel.dates):
        row = [day.isoformat(), *(fmt(float(v)) for v in m[i])]
        if panel.aggregate is not None:
            row.append(fmt(float(panel.aggregate[i])))
        w.writerow(row)
    return buf.getvalue()


def panel_schema_for(panel: Panel) -> PanelSchema:
    """Schema that re-reads :func:`panel_to_csv` output."""
    return PanelSchema(
        columns=panel.names,
        aggregate_column="aggregate" if panel.aggregate is not None else None,
    )


def panel_to_dict(panel: Panel) -> dict:
    out = {
        "dates": [d.isoformat() for d in panel.dates],
        "series": {s.name: [float(v) for v in s.values] for s in panel.series},
    }
    if panel.aggregate is not None:
        out["aggregate"] = [float(v) for v in panel.aggregate]
    return out


def panel_to_json(panel: Panel) -> str:
    return json.dumps(panel_to_dict(panel), indent=2)


def panel_from_dict(data: dict) -> Panel:
    dates = [parse_date(d) for d in data["dates"]]
    return Panel.from_arrays(dates, data["series"], data.get("aggregate"))
