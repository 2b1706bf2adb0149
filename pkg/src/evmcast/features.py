"""Feature engineering: trailing rolling averages, seeded simulation of
exogenous factors, and assembly of the model-ready feature table.

Exogenous simulation draws from the SplitMix64 reference stream
(see evmcast.rng) so any (n, seed) pair is bit-reproducible. When
weather and resource columns are simulated in one build_feature_table
call they share a single stream: weather consumes draws 1..n, resource
draws n+1..2n. Standalone simulate_* calls each start a fresh stream
at draw 1.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import ProjectSeries
from .errors import FailedInvariant, InvalidWindow, NonFiniteInput
from .rng import SplitMix64

FEATURE_COLUMNS = (
    "estimate_cost",
    "actual_cost",
    "cost_variance",
    "planned_value",
    "earned_value",
    "weather_pattern",
    "resource_availability",
    "rolling_avg_cost_variance",
    "rolling_avg_planned_value",
    "rolling_avg_earned_value",
    "rolling_avg_actual_cost",
)

# rolling averages of the cumulative AC curve, not the per-period column
ROLLING_SOURCES = {
    "rolling_avg_cost_variance": "cost_variance",
    "rolling_avg_planned_value": "planned_value",
    "rolling_avg_earned_value": "earned_value",
    "rolling_avg_actual_cost": "actual_cost_cum",
}

RAW_CORR_COLUMNS = (
    "estimate_cost",
    "actual_cost",
    "cost_variance",
    "planned_value",
    "earned_value",
    "weather_pattern",
    "resource_availability",
)


@dataclass(frozen=True)
class ExogConfig:
    seed: int = 0
    weather_range: tuple[int, int] = (1, 10)
    resource_range: tuple[float, float] = (80.0, 100.0)

    def __post_init__(self):
        if self.weather_range[1] < self.weather_range[0]:
            raise ValueError("empty weather range")
        if self.resource_range[1] < self.resource_range[0]:
            raise ValueError("empty resource range")


@dataclass(frozen=True, eq=False)
class FeatureTable:
    """Named numeric columns over a shared period axis; no missing cells."""

    periods: tuple[str, ...]
    columns: dict[str, np.ndarray]
    rolling_window: int

    def __post_init__(self):
        n = len(self.periods)
        for name, col in self.columns.items():
            if col.shape != (n,):
                raise FailedInvariant(f"column {name!r} has length {col.shape}, expected {n}")

    def __len__(self) -> int:
        return len(self.periods)

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(self.columns)

    def column(self, name: str) -> np.ndarray:
        return self.columns[name]

    def slice(self, start: int, stop: int) -> "FeatureTable":
        return FeatureTable(
            periods=self.periods[start:stop],
            columns={k: v[start:stop] for k, v in self.columns.items()},
            rolling_window=self.rolling_window,
        )


def rolling_average(column, window: int) -> np.ndarray:
    """Trailing mean over `window` periods; partial windows at the start
    average over the points available, so length is preserved."""
    if window < 1:
        raise InvalidWindow(f"window must be >= 1, got {window}")
    x = np.asarray(column, dtype=float)
    out = np.empty(x.shape)
    for t in range(x.size):
        lo = max(0, t - window + 1)
        out[t] = np.mean(x[lo : t + 1])
    return out


def simulate_weather(n: int, cfg: ExogConfig, stream: SplitMix64 | None = None) -> np.ndarray:
    """Uniform integers over the configured weather range (default 1..10):
    value = lo + floor(u * span) clamped to hi."""
    gen = stream if stream is not None else SplitMix64(cfg.seed)
    lo, hi = cfg.weather_range
    span = hi - lo + 1
    out = np.empty(n)
    for i in range(n):
        out[i] = min(lo + int(gen.next_float() * span), hi)
    return out


def simulate_resource_availability(n: int, cfg: ExogConfig, stream: SplitMix64 | None = None) -> np.ndarray:
    """Uniform percentages over the configured range (default [80, 100))."""
    gen = stream if stream is not None else SplitMix64(cfg.seed)
    lo, hi = cfg.resource_range
    out = np.empty(n)
    for i in range(n):
        out[i] = lo + (hi - lo) * gen.next_float()
    return out


def build_feature_table(
    series: ProjectSeries,
    exog: ExogConfig | None = None,
    window: int = 3,
    cv_source: str = "evm",
) -> FeatureTable:
    """Assemble the 11-column feature table from a cleaned single-track
    series (one row per period: pre-filter by WBS or aggregate first).

    cost_variance is EV - AC per period unless cv_source="supplied", in
    which case a pre-existing cost_variance column is passed through
    verbatim. Exogenous columns present on the series are passed through;
    absent ones are simulated from the seeded reference stream.
    """
    if window < 1:
        raise InvalidWindow(f"window must be >= 1, got {window}")
    if cv_source not in ("evm", "supplied"):
        raise ValueError(f"cv_source must be 'evm' or 'supplied', got {cv_source!r}")
    exog = exog or ExogConfig()

    periods = series.periods()
    n = len(periods)
    if len(set(periods)) != n:
        raise FailedInvariant("feature table needs one row per period; filter or aggregate WBS first")

    cols: dict[str, np.ndarray] = {}
    cols["estimate_cost"] = series.column("estimate_cost")
    cols["actual_cost"] = series.column("actual_cost")
    ev = series.column("earned_value")
    ac_cum = series.column("actual_cost_cum")
    if cv_source == "supplied":
        supplied = series.column("cost_variance")
        if np.any(np.isnan(supplied)):
            raise NonFiniteInput("cv_source='supplied' requires a complete cost_variance column")
        cols["cost_variance"] = supplied
    else:
        cols["cost_variance"] = ev - ac_cum
    cols["planned_value"] = series.column("planned_value")
    cols["earned_value"] = ev

    stream = SplitMix64(exog.seed)
    weather = series.column("weather_pattern")
    if np.any(np.isnan(weather)):
        weather = simulate_weather(n, exog, stream)
    resource = series.column("resource_availability")
    if np.any(np.isnan(resource)):
        resource = simulate_resource_availability(n, exog, stream)
    cols["weather_pattern"] = weather
    cols["resource_availability"] = resource

    rolling_inputs = {**cols, "actual_cost_cum": ac_cum}
    for name, source in ROLLING_SOURCES.items():
        cols[name] = rolling_average(rolling_inputs[source], window)

    for name, col in cols.items():
        if not np.all(np.isfinite(col)):
            raise NonFiniteInput(f"feature column {name!r} contains non-finite values; clean first")

    return FeatureTable(periods=periods, columns=cols, rolling_window=window)
