"""Seeded synthetic project generator for demos and end-to-end checks.

Produces a plausible single-WBS road-reconstruction project: an S-curve
cumulative planned value, earned value driven by a mean-reverting AR(1)
productivity process modulated by weather and resource availability, and
actual cost as earned value deflated by a drifting cost-efficiency
process. All randomness comes from one SplitMix64 stream, so a (periods,
seed) pair is fully reproducible.
"""
from __future__ import annotations

import csv
import math

from .data import PeriodRecord, ProjectSeries, next_period
from .features import ExogConfig, simulate_resource_availability, simulate_weather
from .rng import SplitMix64


def _box_muller(gen: SplitMix64) -> float:
    u1 = 1.0 - gen.next_float()  # (0, 1]
    u2 = gen.next_float()
    return math.sqrt(-2.0 * math.log(u1)) * math.cos(2.0 * math.pi * u2)


def generate_project(
    periods: int = 60,
    seed: int = 0,
    budget: float = 3_000_000.0,
    start_period: str = "2011-01",
    wbs: str = "ROAD",
) -> ProjectSeries:
    """Generate `periods` months of project data.

    Planned value follows a logistic S-curve to `budget`. Monthly earned
    value is the planned increment times a productivity factor:

        prod_t = 1 + a_t + 0.04*(resource_t - 90)/10 - 0.05*(weather_t - 5.5)/4.5
        a_t    = 0.6 * a_{t-1} + 0.08 * eps_t        (eps ~ N(0,1))

    so productivity is autocorrelated and exogenous-driven. Cost variance
    (EV - AC) is a transient, exogenous-correlated gap: adverse weather
    and thin resource availability push costs over earnings for a while,
    and overruns mean-revert as the project corrects course. Most of the
    exogenous impact lands with a one-month invoicing lag:

        x_t  = -1.3*(weather_t - 5.5)/4.5 + 0.9*(resource_t - 90)/10
        cv_t = s * (0.3*x_t + 0.7*x_{t-1} + g_t)
        g_t  = 0.6 * g_{t-1} + 0.33 * eps_t,   s = 0.018 * budget

    with actual cost following as AC = EV - cv (increments floored at
    zero). A cumulative-index extrapolation smooths these transients
    away, while models that read the exogenous drivers can track them.
    """
    gen = SplitMix64(seed)
    exog = ExogConfig(seed=seed + 1)
    weather = simulate_weather(periods, exog)
    resource = simulate_resource_availability(periods, exog)

    pv = []
    for t in range(periods):
        z = 8.0 * (t + 1) / periods - 4.0
        pv.append(budget / (1.0 + math.exp(-z)))

    records = []
    prod_state = 0.0
    gap_state = 0.0
    cv_scale = 0.018 * budget
    ev_cum = 0.0
    ac_cum = 0.0
    period = start_period
    for t in range(periods):
        pv_inc = pv[t] - (pv[t - 1] if t else 0.0)
        prod_state = 0.6 * prod_state + 0.08 * _box_muller(gen)
        productivity = (
            1.0
            + prod_state
            + 0.04 * (resource[t] - 90.0) / 10.0
            - 0.05 * (weather[t] - 5.5) / 4.5
        )
        ev_inc = max(0.0, pv_inc * productivity)
        ev_cum += ev_inc

        gap_state = 0.6 * gap_state + 0.33 * _box_muller(gen)
        x_cur = -1.3 * (weather[t] - 5.5) / 4.5 + 0.9 * (resource[t] - 90.0) / 10.0
        x_prev = x_cur if t == 0 else (
            -1.3 * (weather[t - 1] - 5.5) / 4.5 + 0.9 * (resource[t - 1] - 90.0) / 10.0
        )
        cv_target = cv_scale * (0.3 * x_cur + 0.7 * x_prev + gap_state)
        ac_inc = max(0.0, ev_cum - cv_target - ac_cum)
        ac_cum += ac_inc

        records.append(
            PeriodRecord(
                period=period,
                wbs=wbs,
                estimate_cost=pv_inc,
                actual_cost=ac_inc,
                planned_value=pv[t],
                earned_value=ev_cum,
                actual_cost_cum=ac_cum,
                weather_pattern=float(weather[t]),
                resource_availability=float(resource[t]),
            )
        )
        period = next_period(period)
    return ProjectSeries(tuple(records))


def write_csv(series: ProjectSeries, path, include_exog: bool = True) -> None:
    """Write a series in the toolkit's CSV contract."""
    header = ["period", "wbs", "estimate_cost", "actual_cost", "planned_value", "earned_value", "actual_cost_cum"]
    if include_exog:
        header += ["weather_pattern", "resource_availability"]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for r in series.records:
            row = [
                r.period,
                r.wbs,
                repr(float(r.estimate_cost)),
                repr(float(r.actual_cost)),
                repr(float(r.planned_value)),
                repr(float(r.earned_value)),
                repr(float(r.actual_cost_cum)),
            ]
            if include_exog:
                row += [repr(float(r.weather_pattern)), repr(float(r.resource_availability))]
            writer.writerow(row)
