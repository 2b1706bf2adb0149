"""ARIMA(p,d,q) engine: differencing, conditional-sum-of-squares
estimation via the in-repo Nelder-Mead optimizer, AIC order selection,
multi-step forecasting, and a two-stage exogenous-regression variant.

Estimation minimizes the conditional sum of squares

    e_t = z_t - c - sum_i phi_i z_{t-i} - sum_j theta_j e_{t-j},
    e_s = 0 for s <= p,   sse = sum_{t>p} e_t^2,   n_eff = n - p

over (phi, theta, c). Residuals at s <= p are pinned to zero
(conditioning), so the recursion needs no backcasting. The MA part is an
IIR filter, evaluated with scipy.signal.lfilter; the tests carry an
independent brute-force recursion as the oracle.

Stationarity/invertibility are checked after fitting (AR and MA
polynomial root moduli must exceed 1) and reported as warnings, not
enforced via reparameterization.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np
from scipy.signal import lfilter

from .errors import (
    AnchorMismatch,
    Diverged,
    MissingFutureExog,
    NotConverged,
    SingularDesign,
    TooShort,
)
from .optimize import OptResult, nelder_mead


@dataclass(frozen=True)
class ArimaOrder:
    p: int
    d: int
    q: int

    def __post_init__(self):
        if min(self.p, self.d, self.q) < 0:
            raise ValueError(f"order components must be >= 0: {self}")

    def label(self) -> str:
        return f"({self.p},{self.d},{self.q})"


@dataclass(frozen=True)
class OptConfig:
    tol: float = 1e-8
    max_iter: int = 2000
    step: float = 0.1


@dataclass(frozen=True)
class ArimaFitReport:
    aic: float
    converged: bool
    iterations: int
    ar_root_moduli: tuple[float, ...]
    ma_root_moduli: tuple[float, ...]
    stationary: bool
    invertible: bool
    warnings: tuple[str, ...] = ()


@dataclass(frozen=True, eq=False)
class ArimaModel:
    order: ArimaOrder
    phi: np.ndarray
    theta: np.ndarray
    c: float
    sigma2: float
    sse: float
    n_eff: int
    anchors: np.ndarray  # last value of each differencing level, length d
    last_values: np.ndarray  # trailing p observations of the differenced series
    residual_tail: np.ndarray  # trailing q fitted residuals
    fit_report: ArimaFitReport


# --- differencing -----------------------------------------------------------

def difference(series, d: int):
    """d-fold first differences. Returns (differenced, anchors) where
    anchors[k] is the first value of the k-times-differenced series,
    enough to invert exactly."""
    x = np.asarray(series, dtype=float)
    if d < 0:
        raise ValueError("d must be >= 0")
    if x.size <= d:
        raise TooShort(f"need length > d={d}, got {x.size}")
    anchors = np.empty(d)
    z = x
    for k in range(d):
        anchors[k] = z[0]
        z = np.diff(z)
    return z, anchors


def undifference(diffed, anchors, d: int | None = None) -> np.ndarray:
    """Invert `difference`: returns the values after the anchor-determined
    prefix, so undifference(difference(x, d)) recovers x[d:] exactly.
    The first d values of x are implied by the anchors themselves."""
    z = np.asarray(diffed, dtype=float)
    anchors = np.asarray(anchors, dtype=float)
    if d is not None and anchors.size != d:
        raise AnchorMismatch(f"got {anchors.size} anchors for d={d}")
    depth = anchors.size
    cur = z
    for k in range(depth - 1, -1, -1):
        cur = np.concatenate(([anchors[k]], anchors[k] + np.cumsum(cur)))
    return cur[depth:]


def _continue_cumsum(future_diffed: np.ndarray, last_anchors: np.ndarray) -> np.ndarray:
    # forecast-side inversion: last_anchors[k] = latest value of the
    # k-times-differenced history
    cur = future_diffed
    for k in range(last_anchors.size - 1, -1, -1):
        cur = last_anchors[k] + np.cumsum(cur)
    return cur


def _last_anchors(series: np.ndarray, d: int) -> np.ndarray:
    out = np.empty(d)
    z = series
    for k in range(d):
        out[k] = z[-1]
        z = np.diff(z)
    return out


# --- conditional sum of squares ----------------------------------------------

def css_residuals(series, order: ArimaOrder, phi, theta, c: float):
    """Residuals and SSE of the CSS recursion on an already-differenced
    series (order.d is ignored here; differencing happens in fit)."""
    z = np.asarray(series, dtype=float)
    p, q = order.p, order.q
    if z.size <= p:
        raise TooShort(f"need length > p={p}, got {z.size}")
    phi = np.asarray(phi, dtype=float)
    theta = np.asarray(theta, dtype=float)
    n = z.size
    w = z[p:] - c
    for i in range(1, p + 1):
        w = w - phi[i - 1] * z[p - i : n - i]
    if q:
        e = lfilter([1.0], np.concatenate(([1.0], theta)), w)
    else:
        e = w
    return e, float(np.dot(e, e))


def _poly_root_moduli(coeffs: np.ndarray, sign: float) -> tuple[float, ...]:
    # characteristic polynomial 1 + sign*(c1 x + ... + ck x^k)
    if coeffs.size == 0:
        return ()
    poly = np.concatenate(([1.0], sign * coeffs))
    roots = np.roots(poly[::-1])
    return tuple(sorted(float(abs(r)) for r in roots))


def _yule_walker(z: np.ndarray, p: int) -> np.ndarray:
    """Method-of-moments AR start values; zeros if degenerate."""
    if p == 0:
        return np.empty(0)
    zc = z - z.mean()
    denom = float(np.dot(zc, zc))
    if denom == 0.0 or z.size <= p:
        return np.zeros(p)
    gamma = np.array([float(np.dot(zc[: z.size - k], zc[k:])) / z.size for k in range(p + 1)])
    r_mat = np.array([[gamma[abs(i - j)] for j in range(p)] for i in range(p)])
    try:
        phi = np.linalg.solve(r_mat, gamma[1 : p + 1])
    except np.linalg.LinAlgError:
        return np.zeros(p)
    if not np.all(np.isfinite(phi)):
        return np.zeros(p)
    return phi


def fit(series, order: ArimaOrder, opt: OptConfig | None = None) -> tuple[ArimaModel, ArimaFitReport]:
    """Estimate coefficients by CSS / Nelder-Mead.

    Initialization: phi from Yule-Walker on the differenced series,
    theta = 0, c = differenced-series mean. Deterministic given
    (series, order, opt).
    """
    opt = opt or OptConfig()
    x = np.asarray(series, dtype=float)
    p, d, q = order.p, order.d, order.q
    if x.size < p + q + d + 10:
        raise TooShort(f"need length >= p+q+d+10 = {p + q + d + 10}, got {x.size}")

    z, _ = difference(x, d)
    phi0 = _yule_walker(z, p)
    theta0 = np.zeros(q)
    c0 = float(z.mean())
    x0 = np.concatenate((phi0, theta0, [c0]))

    def objective(params):
        e, sse = css_residuals(z, order, params[:p], params[p : p + q], params[p + q])
        return sse

    result: OptResult = nelder_mead(objective, x0, step=opt.step, tol=opt.tol, max_iter=opt.max_iter)
    if not np.isfinite(result.fx):
        raise Diverged(f"CSS objective non-finite for order {order.label()}")

    phi = result.x[:p].copy()
    theta = result.x[p : p + q].copy()
    c = float(result.x[p + q])
    resid, sse = css_residuals(z, order, phi, theta, c)
    n_eff = z.size - p
    sigma2 = sse / n_eff

    ar_moduli = _poly_root_moduli(phi, -1.0)
    ma_moduli = _poly_root_moduli(theta, +1.0)
    stationary = all(m > 1.0 for m in ar_moduli)
    invertible = all(m > 1.0 for m in ma_moduli)
    warnings = []
    if not stationary:
        warnings.append("AR polynomial has a root on or inside the unit circle")
    if not invertible:
        warnings.append("MA polynomial has a root on or inside the unit circle")
    if sigma2 == 0.0:
        warnings.append("zero-variance residuals (degenerate input)")

    # Gaussian-CSS AIC with k = p + q + 1; floor keeps it finite for
    # degenerate zero-residual fits
    aic_value = n_eff * math.log(max(sigma2, 1e-300)) + 2.0 * (p + q + 1)

    report = ArimaFitReport(
        aic=aic_value,
        converged=result.converged,
        iterations=result.iterations,
        ar_root_moduli=ar_moduli,
        ma_root_moduli=ma_moduli,
        stationary=stationary,
        invertible=invertible,
        warnings=tuple(warnings),
    )
    model = ArimaModel(
        order=order,
        phi=phi,
        theta=theta,
        c=c,
        sigma2=sigma2,
        sse=sse,
        n_eff=n_eff,
        anchors=_last_anchors(x, d),
        last_values=z[z.size - p :].copy() if p else np.empty(0),
        residual_tail=resid[resid.size - q :].copy() if q else np.empty(0),
        fit_report=report,
    )
    return model, report


def aic(model: ArimaModel) -> float:
    """n_eff * ln(sse/n_eff) + 2 (p + q + 1); requires a converged fit."""
    if not model.fit_report.converged:
        raise NotConverged("AIC requires a converged model")
    k = model.order.p + model.order.q + 1
    return model.n_eff * math.log(max(model.sse / model.n_eff, 1e-300)) + 2.0 * k


@dataclass(frozen=True)
class GridEntry:
    order: ArimaOrder
    aic: float
    converged: bool
    min_root_modulus: float = math.inf
    error: str = ""


def _lag1_autocorr(z: np.ndarray) -> float:
    zc = z - z.mean()
    denom = float(np.dot(zc, zc))
    if denom == 0.0:
        return 0.0
    return float(np.dot(zc[:-1], zc[1:]) / denom)


def select_order(
    series,
    caps: ArimaOrder | None = None,
    opt: OptConfig | None = None,
    acf_threshold: float = 0.9,
    root_margin: float = 1.05,
    tie_window: float = 2.0,
    parallel: bool = False,
) -> tuple[ArimaOrder, list[GridEntry]]:
    """Pick d as the smallest value in 0..min(2, caps.d) whose differenced
    series has lag-1 autocorrelation below `acf_threshold`, then grid-search
    (p, q) up to the caps by AIC.

    Two guards keep the unpenalized CSS grid honest. Fits with any AR/MA
    root modulus below `root_margin` are deprioritized: near-unit nearly
    cancelling root pairs are a common-factor degeneracy that buys
    spurious fit (genuinely persistent series take the d route instead).
    Candidates within `tie_window` AIC units of the best are treated as
    equivalent and resolved toward smaller p+q, then smaller p, so near
    ties go to the parsimonious model. Deterministic for identical input.
    """
    caps = caps or ArimaOrder(3, 2, 3)
    x = np.asarray(series, dtype=float)

    d = min(2, caps.d)
    for cand in range(0, min(2, caps.d) + 1):
        if x.size <= cand + 1:
            break
        z, _ = difference(x, cand) if cand else (x, np.empty(0))
        if _lag1_autocorr(z) < acf_threshold:
            d = cand
            break

    if x.size < caps.p + caps.q + d + 10:
        raise TooShort(
            f"need length >= {caps.p + caps.q + d + 10} for grid caps {caps.label()}, got {x.size}"
        )

    grid = [(p, q) for p in range(caps.p + 1) for q in range(caps.q + 1)]

    def evaluate(pq):
        p, q = pq
        order = ArimaOrder(p, d, q)
        try:
            model, report = fit(x, order, opt)
        except (Diverged, TooShort) as exc:
            return GridEntry(order, math.inf, False, error=str(exc))
        value = report.aic if report.converged else math.inf
        moduli = report.ar_root_moduli + report.ma_root_moduli
        return GridEntry(order, value, report.converged,
                         min_root_modulus=min(moduli) if moduli else math.inf)

    if parallel:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor() as pool:
            entries = list(pool.map(evaluate, grid))
    else:
        entries = [evaluate(pq) for pq in grid]

    finite = [e for e in entries if math.isfinite(e.aic)]
    if not finite:
        raise Diverged("no grid member produced a finite AIC")
    clean = [e for e in finite if e.min_root_modulus >= root_margin]
    pool_entries = clean if clean else finite
    best_aic = min(e.aic for e in pool_entries)
    candidates = [e for e in pool_entries if e.aic <= best_aic + tie_window]
    best = min(candidates, key=lambda e: (e.order.p + e.order.q, e.order.p, e.aic))
    return best.order, entries


def forecast(model: ArimaModel, horizon: int) -> np.ndarray:
    """Multi-step forecast in original units. Future residuals are zero;
    known trailing values and residuals seed the recursion; differencing
    is inverted from the stored anchors."""
    if horizon < 0:
        raise ValueError("horizon must be >= 0")
    if horizon == 0:
        return np.empty(0)
    p, q = model.order.p, model.order.q
    hist = list(model.last_values)
    resid = list(model.residual_tail)
    out = np.empty(horizon)
    for h in range(horizon):
        value = model.c
        for i in range(1, p + 1):
            value += model.phi[i - 1] * hist[-i]
        for j in range(1, q + 1):
            if j <= len(resid):
                value += model.theta[j - 1] * resid[-j]
        out[h] = value
        hist.append(value)
        resid.append(0.0)
    return _continue_cumsum(out, model.anchors)


# --- serialization ------------------------------------------------------------

def model_to_json(model: ArimaModel) -> str:
    doc = {
        "order": {"p": model.order.p, "d": model.order.d, "q": model.order.q},
        "phi": list(model.phi),
        "theta": list(model.theta),
        "c": model.c,
        "sigma2": model.sigma2,
        "sse": model.sse,
        "n_eff": model.n_eff,
        "anchors": list(model.anchors),
        "last_values": list(model.last_values),
        "residual_tail": list(model.residual_tail),
        "fit_report": {
            "aic": model.fit_report.aic,
            "converged": model.fit_report.converged,
            "iterations": model.fit_report.iterations,
            "ar_root_moduli": list(model.fit_report.ar_root_moduli),
            "ma_root_moduli": list(model.fit_report.ma_root_moduli),
            "stationary": model.fit_report.stationary,
            "invertible": model.fit_report.invertible,
            "warnings": list(model.fit_report.warnings),
        },
    }
    return json.dumps(doc, indent=2)


def model_from_json(text: str) -> ArimaModel:
    doc = json.loads(text)
    rep = doc["fit_report"]
    report = ArimaFitReport(
        aic=rep["aic"],
        converged=rep["converged"],
        iterations=rep["iterations"],
        ar_root_moduli=tuple(rep["ar_root_moduli"]),
        ma_root_moduli=tuple(rep["ma_root_moduli"]),
        stationary=rep["stationary"],
        invertible=rep["invertible"],
        warnings=tuple(rep["warnings"]),
    )
    return ArimaModel(
        order=ArimaOrder(**doc["order"]),
        phi=np.array(doc["phi"], dtype=float),
        theta=np.array(doc["theta"], dtype=float),
        c=doc["c"],
        sigma2=doc["sigma2"],
        sse=doc["sse"],
        n_eff=doc["n_eff"],
        anchors=np.array(doc["anchors"], dtype=float),
        last_values=np.array(doc["last_values"], dtype=float),
        residual_tail=np.array(doc["residual_tail"], dtype=float),
        fit_report=report,
    )


# --- exogenous two-stage variant ----------------------------------------------

@dataclass(frozen=True, eq=False)
class ArimaExogModel:
    """Stage 1: OLS of the target on exogenous columns (with intercept).
    Stage 2: ARIMA on the OLS residuals. An explicit approximation to
    joint regression-with-ARIMA-errors estimation."""

    beta: np.ndarray  # [intercept, slopes...]; empty when no exog columns
    arima: ArimaModel
    exog_names: tuple[str, ...] = ()


def fit_with_exog(
    series,
    exog,
    order: ArimaOrder,
    opt: OptConfig | None = None,
    exog_names: tuple[str, ...] = (),
) -> tuple[np.ndarray, ArimaExogModel]:
    """Two-stage fit; returns (beta, model). With zero exogenous columns
    this reduces to a plain `fit` (no OLS stage at all)."""
    y = np.asarray(series, dtype=float)
    x_mat = np.asarray(exog, dtype=float)
    if x_mat.size == 0:
        x_mat = x_mat.reshape(y.size, 0)
    if x_mat.ndim == 1:
        x_mat = x_mat[:, None]
    if x_mat.shape[0] != y.size:
        raise SingularDesign(f"exog rows {x_mat.shape[0]} != series length {y.size}")

    if x_mat.shape[1] == 0:
        model, _ = fit(y, order, opt)
        return np.empty(0), ArimaExogModel(beta=np.empty(0), arima=model, exog_names=())

    design = np.column_stack([np.ones(y.size), x_mat])
    if np.linalg.matrix_rank(design) < design.shape[1]:
        raise SingularDesign("exogenous columns are collinear")
    beta, *_ = np.linalg.lstsq(design, y, rcond=None)
    residuals = y - design @ beta
    model, _ = fit(residuals, order, opt)
    return beta, ArimaExogModel(beta=beta, arima=model, exog_names=tuple(exog_names))


def forecast_with_exog(model: ArimaExogModel, future_exog, horizon: int) -> np.ndarray:
    """OLS prediction on future exogenous values plus the ARIMA residual
    forecast. future_exog must supply `horizon` rows (ignored when the
    model was fitted without exogenous columns)."""
    if model.beta.size == 0:
        return forecast(model.arima, horizon)
    x_mat = np.asarray(future_exog, dtype=float)
    if x_mat.ndim == 1:
        x_mat = x_mat[:, None]
    if x_mat.shape[0] < horizon:
        raise MissingFutureExog(f"need {horizon} future exog rows, got {x_mat.shape[0]}")
    if x_mat.shape[1] != model.beta.size - 1:
        raise MissingFutureExog(
            f"need {model.beta.size - 1} exog columns, got {x_mat.shape[1]}"
        )
    design = np.column_stack([np.ones(horizon), x_mat[:horizon]])
    return design @ model.beta + forecast(model.arima, horizon)
