"""Error metrics, cross-validation splits, per-model fold evaluation and
multi-model comparison.

Both protocols fit on the past only: for a fold with test indices
[a, b) the model sees rows [0, a). Blocked k-fold keeps the paper's
contiguous-subset shape (its first block therefore fails for lack of
history and is recorded as a fold failure, never dropped silently);
expanding-window walk-forward is the leakage-safe default. Exogenous
and planned-value columns at test indices are treated as known scenario
inputs when predicting.
"""
from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import arima as arima_mod
from . import lstm as lstm_mod
from .errors import (
    ConfigError,
    EmptyInput,
    EvmcastError,
    IncomparableReports,
    LengthMismatch,
    TooShort,
)
from .evm import evm_forecast, snapshots_from_columns
from .features import ROLLING_SOURCES, FeatureTable
from .rng import derive_seed


@dataclass(frozen=True)
class Metrics:
    mae: float
    mse: float
    rmse: float


def metrics(actual, predicted) -> Metrics:
    """MAE / MSE / RMSE of a forecast against actuals."""
    a = np.asarray(actual, dtype=float)
    p = np.asarray(predicted, dtype=float)
    if a.size != p.size:
        raise LengthMismatch(f"metrics: {a.size} actuals vs {p.size} predictions")
    if a.size == 0:
        raise EmptyInput("metrics of empty series")
    err = a - p
    mse = float(np.mean(err * err))
    return Metrics(mae=float(np.mean(np.abs(err))), mse=mse, rmse=math.sqrt(mse))


@dataclass(frozen=True)
class CvConfig:
    k: int = 5
    mode: str = "expanding-window"  # or "blocked-kfold"
    min_train: int = 8
    horizon: int = 1

    def __post_init__(self):
        if self.mode not in ("expanding-window", "blocked-kfold"):
            raise ConfigError(f"unknown CV mode {self.mode!r}")
        if self.mode == "blocked-kfold" and self.k < 2:
            raise ConfigError("blocked k-fold needs k >= 2")
        if self.min_train < 1:
            raise ConfigError("min_train must be >= 1")
        if self.horizon < 1:
            raise ConfigError("horizon must be >= 1")


def split(n: int, cfg: CvConfig) -> list[tuple[np.ndarray, np.ndarray]]:
    """Index splits for a series of length n.

    blocked-kfold: k contiguous disjoint test blocks covering 0..n-1,
    the first n % k blocks one element longer; train is the complement.
    expanding-window: split s trains on [0, min_train + (s-1)*horizon)
    and tests the next `horizon` indices, until the series is exhausted.
    """
    if cfg.mode == "blocked-kfold":
        if n < cfg.k:
            raise TooShort(f"n={n} < k={cfg.k}")
        base, extra = divmod(n, cfg.k)
        splits = []
        start = 0
        for i in range(cfg.k):
            size = base + (1 if i < extra else 0)
            test = np.arange(start, start + size)
            train = np.concatenate([np.arange(0, start), np.arange(start + size, n)])
            splits.append((train, test))
            start += size
        return splits
    splits = []
    train_end = cfg.min_train
    while train_end + cfg.horizon <= n:
        splits.append((np.arange(0, train_end), np.arange(train_end, train_end + cfg.horizon)))
        train_end += cfg.horizon
    if not splits:
        raise TooShort(f"n={n} too short for min_train={cfg.min_train}, horizon={cfg.horizon}")
    return splits


def _splits_signature(splits) -> str:
    payload = json.dumps([[list(map(int, tr)), list(map(int, te))] for tr, te in splits])
    return hashlib.sha256(payload.encode()).hexdigest()


# --- model adapters -----------------------------------------------------------

def _future_exog_from_table(table: FeatureTable, features, target, start: int, stop: int):
    """Known-future values for every non-target-derived source column."""
    out = {}
    for name in features:
        source = ROLLING_SOURCES.get(name, name)
        if source == target or source in out:
            continue
        if source in table.columns:
            out[source] = table.column(source)[start:stop]
        elif source == "actual_cost_cum":
            col = table.column("earned_value") - table.column("cost_variance")
            out[source] = col[start:stop]
    return out


class _EvmAdapter:
    """Index-extrapolation baseline; reads the cumulative curves and the
    known future planned value, ignores engineered features."""

    def __init__(self, **_unused):
        pass

    def predict_fold(self, table: FeatureTable, train_end: int, horizon: int, seed: int, target: str):
        if target not in ("cost_variance", "earned_value"):
            raise ConfigError(f"evm baseline cannot forecast target {target!r}")
        pv = table.column("planned_value")
        ev = table.column("earned_value")
        ac = ev - table.column("cost_variance")
        history = snapshots_from_columns(pv[:train_end], ev[:train_end], ac[:train_end])
        result = evm_forecast(history, pv[train_end : train_end + horizon], horizon)
        return result.cv if target == "cost_variance" else result.ev


class _ArimaAdapter:
    def __init__(self, order=None, caps=(3, 2, 3), exog=(), opt=None, **_unused):
        self.order = arima_mod.ArimaOrder(*order) if order else None
        self.caps = arima_mod.ArimaOrder(*caps)
        self.exog_names = tuple(exog)
        self.opt = opt

    def predict_fold(self, table: FeatureTable, train_end: int, horizon: int, seed: int, target: str):
        y = table.column(target)[:train_end]
        if not self.exog_names:
            order = self.order
            if order is None:
                order, _ = arima_mod.select_order(y, self.caps, self.opt)
            model, _ = arima_mod.fit(y, order, self.opt)
            return arima_mod.forecast(model, horizon)
        exog = np.column_stack([table.column(n)[:train_end] for n in self.exog_names])
        future = np.column_stack(
            [table.column(n)[train_end : train_end + horizon] for n in self.exog_names]
        )
        order = self.order
        if order is None:
            # order describes the residual stage, so select on OLS residuals
            design = np.column_stack([np.ones(y.size), exog])
            beta, *_ = np.linalg.lstsq(design, y, rcond=None)
            order, _ = arima_mod.select_order(y - design @ beta, self.caps, self.opt)
        _, model = arima_mod.fit_with_exog(y, exog, order, self.opt, self.exog_names)
        return arima_mod.forecast_with_exog(model, future, horizon)


class _LstmAdapter:
    def __init__(self, window=4, hidden=16, layers=1, features=None, train_config=None, **_unused):
        self.window = window
        self.hidden = hidden
        self.layers = layers
        self.features = tuple(features) if features else None
        self.train_config = train_config or lstm_mod.TrainConfig()

    def default_features(self, target: str) -> tuple[str, ...]:
        feats = [target, "weather_pattern", "resource_availability"]
        rolled = f"rolling_avg_{target}"
        if rolled in ROLLING_SOURCES:
            feats.append(rolled)
        return tuple(feats)

    def predict_fold(self, table: FeatureTable, train_end: int, horizon: int, seed: int, target: str):
        features = self.features or self.default_features(target)
        spec = lstm_mod.WindowSpec(window=self.window, features=features, target=target, horizon=horizon)
        config = lstm_mod.TrainConfig(
            epochs=self.train_config.epochs,
            learning_rate=self.train_config.learning_rate,
            optimizer=self.train_config.optimizer,
            seed=seed,
            validation_fraction=self.train_config.validation_fraction,
            patience=self.train_config.patience,
            clip_norm=self.train_config.clip_norm,
        )
        train_table = table.slice(0, train_end)
        dataset = lstm_mod.make_windows(train_table, spec, config.validation_fraction)
        model = lstm_mod.train(dataset, config, hidden=self.hidden, layers=self.layers)
        future = _future_exog_from_table(table, features, target, train_end, train_end + horizon)
        return lstm_mod.forecast(model, train_table, horizon, future)


class _OracleAdapter:
    """Memorizes the true series; the harness-correctness canary."""

    def __init__(self, **_unused):
        pass

    def predict_fold(self, table: FeatureTable, train_end: int, horizon: int, seed: int, target: str):
        return table.column(target)[train_end : train_end + horizon]


class _ConstantAdapter:
    def __init__(self, value=0.0, **_unused):
        self.value = float(value)

    def predict_fold(self, table: FeatureTable, train_end: int, horizon: int, seed: int, target: str):
        return np.full(horizon, self.value)


MODEL_ADAPTERS = {
    "evm": _EvmAdapter,
    "arima": _ArimaAdapter,
    "lstm": _LstmAdapter,
    "oracle": _OracleAdapter,
    "constant": _ConstantAdapter,
}


@dataclass(frozen=True)
class ModelSpec:
    name: str
    hyperparams: dict = field(default_factory=dict)

    def build(self):
        if self.name not in MODEL_ADAPTERS:
            raise ConfigError(f"unknown model {self.name!r}; choose from {sorted(MODEL_ADAPTERS)}")
        return MODEL_ADAPTERS[self.name](**self.hyperparams)


# --- cross-validation ----------------------------------------------------------

@dataclass(frozen=True)
class FoldResult:
    fold: int
    train_size: int
    test_size: int
    metrics: Metrics | None
    error: str = ""


@dataclass(frozen=True)
class EvalReport:
    model: str
    target: str
    folds: tuple[FoldResult, ...]
    mean: Metrics | None
    std: Metrics | None
    splits_signature: str

    def failed_folds(self) -> tuple[FoldResult, ...]:
        return tuple(f for f in self.folds if f.metrics is None)


def _aggregate(folds) -> tuple[Metrics | None, Metrics | None]:
    ok = [f.metrics for f in folds if f.metrics is not None]
    if not ok:
        return None, None
    arr = np.array([[m.mae, m.mse, m.rmse] for m in ok])
    mean = arr.mean(axis=0)
    std = arr.std(axis=0)  # population sd over folds
    return Metrics(*map(float, mean)), Metrics(*map(float, std))


def cross_validate(
    table: FeatureTable,
    target: str,
    model_spec: ModelSpec,
    cfg: CvConfig,
    root_seed: int = 0,
    parallel: bool = False,
) -> EvalReport:
    """Per fold: fit on rows before the test block only (normalization
    and feature statistics included), predict the block, score. Fold
    seeds derive deterministically from the root seed and fold index;
    fold failures become report entries."""
    if target not in table.columns:
        raise ConfigError(f"target column {target!r} not in table")
    splits = split(len(table), cfg)
    adapter = model_spec.build()
    actual = table.column(target)

    def run_fold(item):
        i, (train_idx, test_idx) = item
        test_start = int(test_idx[0])
        horizon = int(test_idx.size)
        train_end = test_start  # history is everything before the block
        try:
            if test_start == 0:
                raise TooShort("no training history before the first test block")
            preds = adapter.predict_fold(
                table, train_end, horizon, derive_seed(root_seed, i), target
            )
            m = metrics(actual[test_idx], preds)
            return FoldResult(i, train_end, horizon, m)
        except EvmcastError as exc:
            return FoldResult(i, train_end, horizon, None, f"{type(exc).__name__}: {exc}")

    items = list(enumerate(splits))
    if parallel:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor() as pool:
            folds = list(pool.map(run_fold, items))
    else:
        folds = [run_fold(item) for item in items]

    mean, std = _aggregate(folds)
    return EvalReport(
        model=model_spec.name,
        target=target,
        folds=tuple(folds),
        mean=mean,
        std=std,
        splits_signature=_splits_signature(splits),
    )


# --- comparison -----------------------------------------------------------------

@dataclass(frozen=True)
class Comparison:
    rows: tuple[tuple[str, Metrics | None, Metrics | None], ...]  # (model, mean, std)
    ranking: tuple[str, ...]


def compare(reports) -> Comparison:
    """Merge reports computed on identical splits into one ranked table.
    Ranking is ascending aggregate RMSE; models with no successful fold
    sort last; all ties break by model name."""
    reports = list(reports)
    if not reports:
        raise EmptyInput("no reports to compare")
    signature = reports[0].splits_signature
    for rep in reports[1:]:
        if rep.splits_signature != signature:
            raise IncomparableReports(
                f"report for {rep.model!r} was computed on different splits"
            )
    rows = tuple((rep.model, rep.mean, rep.std) for rep in reports)

    def key(rep):
        rmse = rep.mean.rmse if rep.mean is not None else math.inf
        return (rmse, rep.model)

    ranking = tuple(rep.model for rep in sorted(reports, key=key))
    return Comparison(rows=rows, ranking=ranking)


def report_to_json(report: EvalReport) -> str:
    doc = {
        "model": report.model,
        "target": report.target,
        "splits_signature": report.splits_signature,
        "folds": [
            {
                "fold": f.fold,
                "train_size": f.train_size,
                "test_size": f.test_size,
                "metrics": None
                if f.metrics is None
                else {"mae": f.metrics.mae, "mse": f.metrics.mse, "rmse": f.metrics.rmse},
                "error": f.error,
            }
            for f in report.folds
        ],
        "mean": None if report.mean is None else {"mae": report.mean.mae, "mse": report.mean.mse, "rmse": report.mean.rmse},
        "std": None if report.std is None else {"mae": report.std.mae, "mse": report.std.mse, "rmse": report.std.rmse},
    }
    return json.dumps(doc, indent=2)
