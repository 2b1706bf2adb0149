"""Ingestion, cleaning, normalization and summary statistics for
period-indexed project cost data.

Column semantics: `estimate_cost` and `actual_cost` are per-period
amounts; `planned_value`, `earned_value` and `actual_cost_cum` are
cumulative-to-date curves (so the latter three must be non-decreasing).
Missing cells are carried as NaN until `clean` resolves them.
"""
from __future__ import annotations

import csv
import math
import re
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    AllMissingColumn,
    DataError,
    EmptyInput,
    FailedInvariant,
    LengthMismatch,
    MissingColumn,
    NonFiniteInput,
    ParseError,
    ZeroVariance,
)

REQUIRED_COLUMNS = (
    "period",
    "wbs",
    "estimate_cost",
    "actual_cost",
    "planned_value",
    "earned_value",
)
OPTIONAL_COLUMNS = (
    "actual_cost_cum",
    "weather_pattern",
    "resource_availability",
    "cost_variance",
)
NUMERIC_FIELDS = (
    "estimate_cost",
    "actual_cost",
    "planned_value",
    "earned_value",
    "actual_cost_cum",
)
CUMULATIVE_FIELDS = ("planned_value", "earned_value", "actual_cost_cum")
PER_PERIOD_FIELDS = ("estimate_cost", "actual_cost")

_PERIOD_RE = re.compile(r"^\d{4}-(0[1-9]|1[0-2])$")


@dataclass(frozen=True)
class PeriodRecord:
    """One reporting period of one WBS category."""

    period: str  # "YYYY-MM"
    wbs: str
    estimate_cost: float
    actual_cost: float
    planned_value: float
    earned_value: float
    actual_cost_cum: float
    weather_pattern: float = math.nan
    resource_availability: float = math.nan
    cost_variance: float = math.nan  # optional pass-through column


@dataclass(frozen=True)
class ProjectSeries:
    records: tuple[PeriodRecord, ...]

    def __len__(self) -> int:
        return len(self.records)

    @property
    def span(self) -> tuple[str, str]:
        if not self.records:
            raise EmptyInput("empty series has no span")
        return self.records[0].period, self.records[-1].period

    def wbs_labels(self) -> tuple[str, ...]:
        seen: dict[str, None] = {}
        for r in self.records:
            seen.setdefault(r.wbs, None)
        return tuple(sorted(seen))

    def filter_wbs(self, label: str) -> "ProjectSeries":
        return ProjectSeries(tuple(r for r in self.records if r.wbs == label))

    def aggregate(self) -> "ProjectSeries":
        """Collapse WBS categories into one series per period: monetary
        fields summed, exogenous fields averaged over observed values."""
        by_period: dict[str, list[PeriodRecord]] = {}
        for r in self.records:
            by_period.setdefault(r.period, []).append(r)
        out = []
        for period in sorted(by_period):
            rows = by_period[period]
            kwargs = {"period": period, "wbs": "ALL"}
            for name in NUMERIC_FIELDS + ("cost_variance",):
                kwargs[name] = float(sum(getattr(r, name) for r in rows))
            for name in ("weather_pattern", "resource_availability"):
                vals = [getattr(r, name) for r in rows if not math.isnan(getattr(r, name))]
                kwargs[name] = float(np.mean(vals)) if vals else math.nan
            out.append(PeriodRecord(**kwargs))
        return ProjectSeries(tuple(out))

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(r, name) for r in self.records], dtype=float)

    def periods(self) -> tuple[str, ...]:
        return tuple(r.period for r in self.records)


@dataclass(frozen=True)
class SummaryStats:
    min: float
    q1: float
    median: float
    mean: float
    q3: float
    max: float


@dataclass(frozen=True)
class CleanPolicy:
    missing: str = "linear-interpolate"  # or "drop-period" / "fail"
    outlier: str = "flag-only"  # or "winsorize"
    iqr_multiplier: float = 1.5

    def __post_init__(self):
        if self.missing not in ("linear-interpolate", "drop-period", "fail"):
            raise ValueError(f"unknown missing policy {self.missing!r}")
        if self.outlier not in ("flag-only", "winsorize"):
            raise ValueError(f"unknown outlier policy {self.outlier!r}")
        if not self.iqr_multiplier > 0:
            raise ValueError("iqr_multiplier must be > 0")


@dataclass(frozen=True)
class NormParams:
    min: float
    max: float


@dataclass(frozen=True)
class CleanLogEntry:
    period: str
    column: str
    action: str
    old: str
    new: str

    def line(self) -> str:
        return f"{self.period},{self.column},{self.action},{self.old},{self.new}"


@dataclass
class CleanLog:
    entries: list[CleanLogEntry] = field(default_factory=list)

    def add(self, period: str, column: str, action: str, old, new) -> None:
        def fmt(v):
            if v is None or (isinstance(v, float) and math.isnan(v)):
                return ""
            return repr(float(v))

        self.entries.append(CleanLogEntry(period, column, action, fmt(old), fmt(new)))

    def lines(self) -> list[str]:
        return [e.line() for e in self.entries]

    def __str__(self) -> str:
        return "\n".join(self.lines())


# --- ingestion ------------------------------------------------------------

def _parse_cell(text: str, row: int, column: str) -> float:
    text = text.strip()
    if text == "":
        return math.nan
    try:
        return float(text)
    except ValueError:
        raise ParseError(f"row {row}, column {column!r}: cannot parse {text!r}") from None


def ingest_csv(path, schema: dict[str, str] | None = None) -> ProjectSeries:
    """Read a project CSV into a ProjectSeries sorted by (period, wbs).

    `schema` maps logical column names to the CSV's header names; omitted
    entries default to the logical name itself. Cumulative actual cost is
    derived as the running sum of `actual_cost` when no cumulative column
    is mapped or present. Empty cells become NaN for `clean` to resolve.
    """
    schema = dict(schema or {})
    colmap = {name: schema.get(name, name) for name in REQUIRED_COLUMNS + OPTIONAL_COLUMNS}

    try:
        fh = open(path, newline="", encoding="utf-8")
    except FileNotFoundError:
        raise DataError(f"file not found: {path}") from None
    with fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise EmptyInput(f"{path}: no header row") from None
        header = [h.strip() for h in header]
        index = {h: i for i, h in enumerate(header)}

        missing = [colmap[name] for name in REQUIRED_COLUMNS if colmap[name] not in index]
        if missing:
            raise MissingColumn(f"{path}: missing required column(s): {', '.join(missing)}")
        present_optional = [n for n in OPTIONAL_COLUMNS if colmap[n] in index]

        rows = []
        for lineno, cells in enumerate(reader, start=2):
            if not cells or all(c.strip() == "" for c in cells):
                continue
            period = cells[index[colmap["period"]]].strip()
            if not _PERIOD_RE.match(period):
                raise ParseError(f"row {lineno}, column {colmap['period']!r}: bad period {period!r} (expected YYYY-MM)")
            wbs = cells[index[colmap["wbs"]]].strip()
            values = {}
            for name in ("estimate_cost", "actual_cost", "planned_value", "earned_value"):
                values[name] = _parse_cell(cells[index[colmap[name]]], lineno, colmap[name])
            for name in present_optional:
                values[name] = _parse_cell(cells[index[colmap[name]]], lineno, colmap[name])
            rows.append((period, wbs, values))

    if not rows:
        raise EmptyInput(f"{path}: no data rows")

    rows.sort(key=lambda r: (r[0], r[1]))
    seen = set()
    for period, wbs, _ in rows:
        if (period, wbs) in seen:
            raise ParseError(f"duplicate period {period} for WBS {wbs!r}")
        seen.add((period, wbs))

    has_cum = "actual_cost_cum" in present_optional
    running: dict[str, float] = {}
    records = []
    for period, wbs, values in rows:
        if has_cum:
            cum = values.get("actual_cost_cum", math.nan)
        else:
            cum = running.get(wbs, 0.0) + values["actual_cost"]
            running[wbs] = cum
        records.append(
            PeriodRecord(
                period=period,
                wbs=wbs,
                estimate_cost=values["estimate_cost"],
                actual_cost=values["actual_cost"],
                planned_value=values["planned_value"],
                earned_value=values["earned_value"],
                actual_cost_cum=cum,
                weather_pattern=values.get("weather_pattern", math.nan),
                resource_availability=values.get("resource_availability", math.nan),
                cost_variance=values.get("cost_variance", math.nan),
            )
        )
    return ProjectSeries(tuple(records))


# --- cleaning ---------------------------------------------------------------

def _month_index(period: str) -> int:
    year, month = period.split("-")
    return int(year) * 12 + int(month) - 1

def _month_label(index: int) -> str:
    return f"{index // 12:04d}-{index % 12 + 1:02d}"

def next_period(period: str, steps: int = 1) -> str:
    """Calendar month `steps` months after the given YYYY-MM label."""
    return _month_label(_month_index(period) + steps)


def _fill_missing(values: np.ndarray, periods, column: str, log: CleanLog) -> np.ndarray:
    """Resolve NaNs by linear interpolation between observed anchors;
    leading/trailing gaps take the nearest observed value."""
    out = values.copy()
    observed = np.flatnonzero(~np.isnan(out))
    if observed.size == 0:
        raise AllMissingColumn(f"column {column!r} has no observed values")
    if observed.size == out.size:
        return out
    first, last = observed[0], observed[-1]
    for t in np.flatnonzero(np.isnan(out)):
        if t < first:
            out[t] = out[first]
            log.add(periods[t], column, "backfill", None, out[t])
        elif t > last:
            out[t] = out[last]
            log.add(periods[t], column, "forwardfill", None, out[t])
        else:
            lo = observed[observed < t][-1]
            hi = observed[observed > t][0]
            frac = (t - lo) / (hi - lo)
            out[t] = out[lo] + frac * (out[hi] - out[lo])
            log.add(periods[t], column, "interpolate", None, out[t])
    return out


def _outlier_pass(values: np.ndarray, periods, column: str, policy: CleanPolicy, log: CleanLog) -> np.ndarray:
    stats = summary(values)
    iqr = stats.q3 - stats.q1
    lo = stats.q1 - policy.iqr_multiplier * iqr
    hi = stats.q3 + policy.iqr_multiplier * iqr
    out = values.copy()
    for t in range(out.size):
        if out[t] < lo or out[t] > hi:
            if policy.outlier == "winsorize":
                new = lo if out[t] < lo else hi
                log.add(periods[t], column, "winsorize", out[t], new)
                out[t] = new
            else:
                log.add(periods[t], column, "flag", out[t], out[t])
    return out


def _monotone_pass(values: np.ndarray, periods, column: str, policy: CleanPolicy, log: CleanLog) -> np.ndarray:
    out = values.copy()
    high = -math.inf
    for t in range(out.size):
        if out[t] < high:
            if policy.missing == "fail":
                raise FailedInvariant(
                    f"cumulative column {column!r} decreases at period {periods[t]}"
                )
            log.add(periods[t], column, "clamp", out[t], high)
            out[t] = high
        else:
            high = out[t]
    return out


def _clean_group(records: list[PeriodRecord], policy: CleanPolicy, log: CleanLog) -> list[PeriodRecord]:
    wbs = records[0].wbs
    # month gaps: insert all-missing rows so the period axis is contiguous
    idx = [_month_index(r.period) for r in records]
    if idx != list(range(idx[0], idx[0] + len(idx))):
        if policy.missing == "fail":
            raise FailedInvariant(f"WBS {wbs!r}: non-contiguous monthly periods")
        if policy.missing == "linear-interpolate":
            by_idx = {i: r for i, r in zip(idx, records)}
            filled = []
            for i in range(idx[0], idx[-1] + 1):
                if i in by_idx:
                    filled.append(by_idx[i])
                else:
                    period = _month_label(i)
                    log.add(period, "*", "insert", None, None)
                    filled.append(
                        PeriodRecord(period, wbs, math.nan, math.nan, math.nan, math.nan, math.nan)
                    )
            records = filled
        # drop-period leaves the gap: incomplete periods are not fabricated

    periods = [r.period for r in records]
    columns = {name: np.array([getattr(r, name) for r in records]) for name in NUMERIC_FIELDS}
    optional = {}
    for name in ("weather_pattern", "resource_availability", "cost_variance"):
        vals = np.array([getattr(r, name) for r in records])
        if not np.all(np.isnan(vals)):
            optional[name] = vals

    if policy.missing == "fail":
        for name, vals in {**columns, **optional}.items():
            bad = np.flatnonzero(np.isnan(vals))
            if bad.size:
                raise FailedInvariant(
                    f"missing value in column {name!r} at period {periods[bad[0]]} (policy=fail)"
                )
    elif policy.missing == "drop-period":
        keep = np.ones(len(records), dtype=bool)
        for vals in list(columns.values()) + list(optional.values()):
            keep &= ~np.isnan(vals)
        for t in np.flatnonzero(~keep):
            log.add(periods[t], "*", "drop", None, None)
        records = [r for r, k in zip(records, keep) if k]
        periods = [r.period for r in records]
        columns = {n: v[keep] for n, v in columns.items()}
        optional = {n: v[keep] for n, v in optional.items()}
        if not records:
            raise EmptyInput(f"WBS {wbs!r}: all periods dropped")
    else:
        for name in columns:
            columns[name] = _fill_missing(columns[name], periods, name, log)
        for name in optional:
            optional[name] = _fill_missing(optional[name], periods, name, log)

    for name in PER_PERIOD_FIELDS:
        columns[name] = _outlier_pass(columns[name], periods, name, policy, log)
    for name in CUMULATIVE_FIELDS:
        columns[name] = _monotone_pass(columns[name], periods, name, policy, log)

    out = []
    for t, r in enumerate(records):
        kwargs = {name: float(columns[name][t]) for name in columns}
        for name in ("weather_pattern", "resource_availability", "cost_variance"):
            kwargs[name] = float(optional[name][t]) if name in optional else math.nan
        out.append(PeriodRecord(period=r.period, wbs=r.wbs, **kwargs))
    return out


def clean(series: ProjectSeries, policy: CleanPolicy | None = None) -> tuple[ProjectSeries, CleanLog]:
    """Apply the missing-value, outlier and monotone-cumulative policies.

    Every imputation, flag, clamp or drop is logged with its period and
    column. Untouched cells pass through bit-identical. WBS categories
    are cleaned independently.
    """
    if not series.records:
        raise EmptyInput("cannot clean an empty series")
    policy = policy or CleanPolicy()
    log = CleanLog()
    groups: dict[str, list[PeriodRecord]] = {}
    for r in series.records:
        groups.setdefault(r.wbs, []).append(r)
    cleaned: list[PeriodRecord] = []
    for wbs in sorted(groups):
        cleaned.extend(_clean_group(groups[wbs], policy, log))
    cleaned.sort(key=lambda r: (r.period, r.wbs))
    return ProjectSeries(tuple(cleaned)), log


# --- normalization ----------------------------------------------------------

def normalize_minmax(column) -> tuple[np.ndarray, NormParams]:
    """Scale to [0, 1] by (x - min) / (max - min).

    A constant column maps every value to 0.5 (the centre of the target
    range) so downstream feature matrices stay well-defined.
    """
    x = np.asarray(column, dtype=float)
    if x.size == 0:
        raise EmptyInput("cannot normalize an empty column")
    if not np.all(np.isfinite(x)):
        raise NonFiniteInput("normalize_minmax requires finite input")
    lo, hi = float(np.min(x)), float(np.max(x))
    if hi == lo:
        return np.full(x.shape, 0.5), NormParams(lo, hi)
    return (x - lo) / (hi - lo), NormParams(lo, hi)


def denormalize(scaled, params: NormParams) -> np.ndarray:
    """Inverse of normalize_minmax; degenerate params return `min`."""
    s = np.asarray(scaled, dtype=float)
    if params.max == params.min:
        return np.full(s.shape, params.min)
    return s * (params.max - params.min) + params.min


# --- statistics -------------------------------------------------------------

def quantile_type7(sorted_values: np.ndarray, p: float) -> float:
    """Linear-interpolation quantile: h = (n-1)p + 1 on 1-indexed data."""
    n = sorted_values.size
    h = (n - 1) * p + 1.0
    lo = int(math.floor(h))
    if lo >= n:
        return float(sorted_values[-1])
    frac = h - lo
    return float(sorted_values[lo - 1] + frac * (sorted_values[lo] - sorted_values[lo - 1]))


def summary(column) -> SummaryStats:
    """Min / quartiles / mean / max with type-7 quantiles."""
    x = np.asarray(column, dtype=float)
    if x.size == 0:
        raise EmptyInput("summary of empty column")
    s = np.sort(x)
    return SummaryStats(
        min=float(s[0]),
        q1=quantile_type7(s, 0.25),
        median=quantile_type7(s, 0.5),
        mean=float(np.mean(x)),
        q3=quantile_type7(s, 0.75),
        max=float(s[-1]),
    )


def pearson_corr(x, y) -> float:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.size != y.size:
        raise LengthMismatch(f"pearson_corr: {x.size} vs {y.size}")
    if x.size < 2:
        raise LengthMismatch("pearson_corr needs length >= 2")
    dx = x - np.mean(x)
    dy = y - np.mean(y)
    sxx = float(np.dot(dx, dx))
    syy = float(np.dot(dy, dy))
    if sxx == 0.0 or syy == 0.0:
        raise ZeroVariance("pearson_corr undefined for a constant series")
    return float(np.dot(dx, dy) / math.sqrt(sxx * syy))


def corr_matrix(table, columns) -> np.ndarray:
    """Symmetric Pearson matrix over named columns of a feature table
    (anything exposing .column(name), or a plain mapping)."""
    get = table.column if hasattr(table, "column") else lambda name: np.asarray(table[name], dtype=float)
    cols = [get(name) for name in columns]
    k = len(cols)
    mat = np.eye(k)
    for i in range(k):
        for j in range(i + 1, k):
            r = pearson_corr(cols[i], cols[j])
            mat[i, j] = mat[j, i] = r
    return mat
