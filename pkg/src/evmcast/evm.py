"""Earned-value indicators and the index-extrapolation baseline forecaster.

All indicators work on cumulative-to-date values. Undefined ratios
(CPI with AC=0, SPI with PV=0) are represented as None, never NaN, so
callers must handle them explicitly.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateIndices, EmptyInput, LengthMismatch, NonFiniteInput


@dataclass(frozen=True)
class EvmSnapshot:
    """Cumulative PV/EV/AC observed at one period."""

    index: int
    pv: float
    ev: float
    ac: float

    def __post_init__(self):
        for name in ("pv", "ev", "ac"):
            v = getattr(self, name)
            if not math.isfinite(v) or v < 0:
                raise NonFiniteInput(f"EvmSnapshot.{name} must be finite and >= 0, got {v}")


@dataclass(frozen=True)
class EvmIndices:
    cv: float
    sv: float
    cpi: float | None
    spi: float | None


@dataclass(frozen=True, eq=False)
class EvmForecast:
    """Index-extrapolated paths for h = 1..horizon (cumulative units)."""

    ev: np.ndarray
    ac: np.ndarray
    cv: np.ndarray


def compute_indices(snapshot: EvmSnapshot) -> EvmIndices:
    """CV = EV - AC, SV = EV - PV, CPI = EV/AC, SPI = EV/PV."""
    cpi = snapshot.ev / snapshot.ac if snapshot.ac != 0 else None
    spi = snapshot.ev / snapshot.pv if snapshot.pv != 0 else None
    return EvmIndices(
        cv=snapshot.ev - snapshot.ac,
        sv=snapshot.ev - snapshot.pv,
        cpi=cpi,
        spi=spi,
    )


def evm_forecast(history, pv_future, horizon: int) -> EvmForecast:
    """Traditional EVM extrapolation from the latest snapshot.

    Future work is assumed earned at the current cumulative SPI and paid
    at the current cumulative CPI:

        EV(t+h) = EV(t) + (PV(t+h) - PV(t)) * SPI(t)
        AC(t+h) = AC(t) + (EV(t+h) - EV(t)) / CPI(t)
        CV(t+h) = EV(t+h) - AC(t+h)

    `pv_future` supplies the cumulative planned value at t+1, t+2, ...
    and must cover the horizon.
    """
    if not history:
        raise EmptyInput("evm_forecast needs at least one snapshot")
    if horizon < 0:
        raise LengthMismatch("horizon must be >= 0")
    pv_future = np.asarray(pv_future, dtype=float)
    if pv_future.size < horizon:
        raise LengthMismatch(f"pv_future has {pv_future.size} values for horizon {horizon}")

    last = history[-1]
    indices = compute_indices(last)
    if indices.cpi is None or indices.spi is None:
        raise DegenerateIndices("CPI or SPI undefined at the last snapshot")

    ev = np.empty(horizon)
    ac = np.empty(horizon)
    for h in range(horizon):
        ev[h] = last.ev + (pv_future[h] - last.pv) * indices.spi
        ac[h] = last.ac + (ev[h] - last.ev) / indices.cpi
    return EvmForecast(ev=ev, ac=ac, cv=ev - ac)


def snapshots_from_columns(pv, ev, ac) -> list[EvmSnapshot]:
    """Build the snapshot history from aligned cumulative columns."""
    pv = np.asarray(pv, dtype=float)
    ev = np.asarray(ev, dtype=float)
    ac = np.asarray(ac, dtype=float)
    if not (pv.size == ev.size == ac.size):
        raise LengthMismatch("pv/ev/ac columns must be aligned")
    return [EvmSnapshot(i, float(pv[i]), float(ev[i]), float(ac[i])) for i in range(pv.size)]
