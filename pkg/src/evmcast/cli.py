"""Command-line interface: stats, forecast, evaluate, explain,
simulate-exog.

Configuration comes from an optional JSON file plus flag overrides
(flags win); unknown JSON keys are rejected so typos fail fast. Output
layout under --out: report.md, charts/*.svg, models/*.json,
forecasts/*.csv, eval/*.csv. With a fixed config and seed every run is
byte-deterministic.

Exit codes: 0 success, 2 configuration error, 3 data error, 4 model
error.
"""
from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np

from . import arima as arima_mod
from . import lstm as lstm_mod
from .charts import bar_chart, hbar_chart, line_chart
from .data import (
    CleanPolicy,
    ProjectSeries,
    clean,
    corr_matrix,
    ingest_csv,
    next_period,
    summary,
)
from .errors import (
    ConfigError,
    DataError,
    EvmcastError,
    MissingFutureExog,
    ModelError,
)
from .evaluation import CvConfig, ModelSpec, compare, cross_validate, report_to_json
from .evm import compute_indices, evm_forecast, snapshots_from_columns
from .explain import shapley_exact, summarize_attributions
from .features import (
    FEATURE_COLUMNS,
    RAW_CORR_COLUMNS,
    ROLLING_SOURCES,
    ExogConfig,
    FeatureTable,
    build_feature_table,
    simulate_resource_availability,
    simulate_weather,
)
from .report import md_table, write_csv, write_text
from .rng import SplitMix64

KNOWN_MODELS = ("evm", "arima", "lstm", "oracle", "constant")

_DEFAULTS = {
    "data": None,
    "out": None,
    "wbs": None,
    "target": "cost_variance",
    "window": 3,
    "seed": 0,
    "horizon": 6,
    "models": ["evm", "arima", "lstm"],
    "parallel": False,
    "cv_source": "evm",
    "annotations": None,
    "n": None,
    "clean": {"missing": "linear-interpolate", "outlier": "flag-only", "iqr_multiplier": 1.5},
    "cv": {"k": 5, "mode": "expanding-window", "min_train": None, "horizon": None},
    "arima": {"order": None, "caps": [3, 2, 3], "exog": []},
    "lstm": {
        "window": 4,
        "hidden": 16,
        "layers": 1,
        "epochs": 200,
        "learning_rate": 0.01,
        "optimizer": "adam",
        "validation_fraction": 0.2,
        "patience": 25,
        "clip_norm": 5.0,
        "features": None,
    },
    "constant": {"value": 0.0},
}


def _merge_config(defaults: dict, override: dict, path: str = "") -> dict:
    out = {}
    for key, value in defaults.items():
        out[key] = dict(value) if isinstance(value, dict) else value
    for key, value in override.items():
        where = f"{path}.{key}" if path else key
        if key not in defaults:
            raise ConfigError(f"unknown config key {where!r}")
        if isinstance(defaults[key], dict) and defaults[key]:
            if not isinstance(value, dict):
                raise ConfigError(f"config key {where!r} must be an object")
            out[key] = _merge_config(defaults[key], value, where)
        else:
            out[key] = value
    return out


def load_config(config_path: str | None, args: argparse.Namespace) -> dict:
    """defaults <- JSON file <- command-line flags (flags win)."""
    cfg = {k: (dict(v) if isinstance(v, dict) else v) for k, v in _DEFAULTS.items()}
    if config_path:
        try:
            with open(config_path, encoding="utf-8") as fh:
                loaded = json.load(fh)
        except FileNotFoundError:
            raise ConfigError(f"config file not found: {config_path}") from None
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config file {config_path}: {exc}") from None
        if not isinstance(loaded, dict):
            raise ConfigError("config file must hold a JSON object")
        cfg = _merge_config(cfg, loaded)

    for flag in ("data", "out", "wbs", "target", "window", "seed", "horizon", "n"):
        value = getattr(args, flag, None)
        if value is not None:
            cfg[flag] = value
    if getattr(args, "models", None):
        cfg["models"] = [m.strip() for m in args.models.split(",") if m.strip()]
    if getattr(args, "parallel", False):
        cfg["parallel"] = True
    if getattr(args, "cv_mode", None):
        cfg["cv"]["mode"] = args.cv_mode
    if getattr(args, "annotations", None):
        cfg["annotations"] = args.annotations

    _validate(cfg)
    return cfg


def _validate(cfg: dict) -> None:
    if cfg["out"] is None:
        raise ConfigError("an output directory is required (--out)")
    if cfg["window"] < 1:
        raise ConfigError("rolling window must be >= 1")
    if cfg["horizon"] < 0:
        raise ConfigError("horizon must be >= 0")
    if cfg["seed"] < 0 or cfg["seed"] > (1 << 64) - 1:
        raise ConfigError("seed must fit in 64 unsigned bits")
    for model in cfg["models"]:
        if model not in KNOWN_MODELS:
            raise ConfigError(f"unknown model {model!r}; choose from {KNOWN_MODELS}")
    if cfg["target"] not in FEATURE_COLUMNS:
        raise ConfigError(f"unknown target column {cfg['target']!r}")
    if cfg["cv_source"] not in ("evm", "supplied"):
        raise ConfigError("cv_source must be 'evm' or 'supplied'")


# --- shared pipeline -----------------------------------------------------------

def _load_table(cfg: dict) -> tuple[FeatureTable, ProjectSeries, list[str]]:
    """Ingest, WBS-select, clean, and build the feature table.

    Returns (table, cleaned series, notes for the report)."""
    if cfg["data"] is None:
        raise ConfigError("a data file is required (--data)")
    notes: list[str] = []
    series = ingest_csv(cfg["data"])
    labels = series.wbs_labels()
    if cfg["wbs"] is not None:
        if cfg["wbs"] not in labels:
            raise DataError(f"WBS label {cfg['wbs']!r} not present; found {labels}")
        series = series.filter_wbs(cfg["wbs"])
        notes.append(f"WBS filter: {cfg['wbs']}")
    elif len(labels) > 1:
        series = series.aggregate()
        notes.append(f"aggregated {len(labels)} WBS categories (sum per period)")

    policy = CleanPolicy(
        missing=cfg["clean"]["missing"],
        outlier=cfg["clean"]["outlier"],
        iqr_multiplier=cfg["clean"]["iqr_multiplier"],
    )
    cleaned, log = clean(series, policy)
    if log.entries:
        notes.append(f"cleaning actions: {len(log.entries)} (see clean_log.txt)")
        write_text(Path(cfg["out"]) / "clean_log.txt", str(log) + "\n")

    exog = ExogConfig(seed=cfg["seed"])
    table = build_feature_table(cleaned, exog, window=cfg["window"], cv_source=cfg["cv_source"])
    return table, cleaned, notes


def _read_annotations(path) -> list[tuple[str, str]]:
    try:
        fh = open(path, newline="", encoding="utf-8")
    except FileNotFoundError:
        raise DataError(f"annotations file not found: {path}") from None
    with fh:
        rows = [row for row in csv.reader(fh) if row and row[0].strip() != "period"]
    return [(row[0].strip(), row[1].strip() if len(row) > 1 else "") for row in rows]


def _exog_was_simulated(series: ProjectSeries) -> tuple[bool, bool]:
    weather = series.column("weather_pattern")
    resource = series.column("resource_availability")
    return bool(np.any(np.isnan(weather))), bool(np.any(np.isnan(resource)))


def _future_exog_for_cli(cfg: dict, series: ProjectSeries, table: FeatureTable, horizon: int) -> dict:
    """Future values for non-target feature sources.

    Simulated exogenous columns continue their SplitMix64 stream past the
    historical draws; a supplied exogenous column cannot be extended and
    raises if a model needs it. Planned value extends by repeating the
    mean of the last `window` increments (a deliberately simple plan
    extension, reported in the output).
    """
    n = len(table)
    future: dict[str, np.ndarray] = {}
    weather_sim, resource_sim = _exog_was_simulated(series)
    stream = SplitMix64(cfg["seed"])
    exog = ExogConfig(seed=cfg["seed"])
    burn = (n if weather_sim else 0) + (n if resource_sim else 0)
    for _ in range(burn):
        stream.next_float()
    if weather_sim:
        future["weather_pattern"] = simulate_weather(horizon, exog, stream)
    if resource_sim:
        future["resource_availability"] = simulate_resource_availability(horizon, exog, stream)

    pv = table.column("planned_value")
    k = min(cfg["window"], max(1, n - 1))
    increments = np.diff(pv[-(k + 1):]) if n > 1 else np.array([0.0])
    step = float(np.mean(increments)) if increments.size else 0.0
    future["planned_value"] = pv[-1] + step * np.arange(1, horizon + 1)
    return future


def _out_dirs(cfg: dict) -> Path:
    out = Path(cfg["out"])
    for sub in ("charts", "models", "forecasts", "eval"):
        (out / sub).mkdir(parents=True, exist_ok=True)
    return out


# --- commands -------------------------------------------------------------------

def cmd_stats(cfg: dict) -> int:
    table, series, notes = _load_table(cfg)
    out = _out_dirs(cfg)

    rows = []
    for name in FEATURE_COLUMNS:
        s = summary(table.column(name))
        rows.append((name, s.min, s.q1, s.median, s.mean, s.q3, s.max))
    write_csv(out / "eval" / "summary_stats.csv",
              ["metric", "min", "q1", "median", "mean", "q3", "max"], rows)

    usable = [n for n in RAW_CORR_COLUMNS if np.ptp(table.column(n)) > 0]
    dropped = [n for n in RAW_CORR_COLUMNS if n not in usable]
    corr = corr_matrix(table, usable) if len(usable) >= 2 else np.eye(len(usable))
    corr_rows = [[name] + list(corr[i]) for i, name in enumerate(usable)]
    write_csv(out / "eval" / "correlation.csv", ["metric"] + usable, corr_rows)

    line_chart(
        out / "charts" / "cumulative_curves.svg",
        "Cumulative planned value, earned value, actual cost",
        "currency",
        [
            ("planned value", range(len(table)), table.column("planned_value")),
            ("earned value", range(len(table)), table.column("earned_value")),
            ("actual cost", range(len(table)), table.column("earned_value") - table.column("cost_variance")),
        ],
        list(table.periods),
        _read_annotations(cfg["annotations"]) if cfg["annotations"] else None,
    )

    doc = ["# Project statistics", ""]
    if notes:
        doc += ["_" + "; ".join(notes) + "_", ""]
    doc += [f"Periods: {table.periods[0]} .. {table.periods[-1]} ({len(table)} rows)", ""]
    doc += ["## Summary statistics", "",
            md_table(["Metric", "Min", "1st Qu.", "Median", "Mean", "3rd Qu.", "Max"], rows)]
    doc += ["## Correlation analysis", "",
            md_table(["Metric"] + usable, corr_rows)]
    if dropped:
        doc += [f"_Constant columns excluded from correlation: {', '.join(dropped)}_", ""]
    doc += ["![cumulative curves](charts/cumulative_curves.svg)", ""]
    write_text(out / "report.md", "\n".join(doc))
    return 0


def _fit_full_lstm(cfg: dict, table: FeatureTable):
    lc = cfg["lstm"]
    target = cfg["target"]
    features = tuple(lc["features"]) if lc["features"] else _default_lstm_features(target)
    spec = lstm_mod.WindowSpec(window=lc["window"], features=features, target=target)
    config = lstm_mod.TrainConfig(
        epochs=lc["epochs"],
        learning_rate=lc["learning_rate"],
        optimizer=lc["optimizer"],
        seed=cfg["seed"],
        validation_fraction=lc["validation_fraction"],
        patience=lc["patience"],
        clip_norm=lc["clip_norm"],
    )
    dataset = lstm_mod.make_windows(table, spec, config.validation_fraction)
    model = lstm_mod.train(dataset, config, hidden=lc["hidden"], layers=lc["layers"])
    return model


def _default_lstm_features(target: str) -> tuple[str, ...]:
    feats = [target, "weather_pattern", "resource_availability"]
    rolled = f"rolling_avg_{target}"
    if rolled in ROLLING_SOURCES:
        feats.append(rolled)
    return tuple(feats)


def _forecast_one_model(name: str, cfg: dict, table: FeatureTable, series: ProjectSeries,
                        horizon: int, out: Path) -> np.ndarray:
    target = cfg["target"]
    if name == "evm":
        if target not in ("cost_variance", "earned_value"):
            raise ConfigError(f"evm baseline cannot forecast target {target!r}")
        pv = table.column("planned_value")
        ev = table.column("earned_value")
        ac = ev - table.column("cost_variance")
        history = snapshots_from_columns(pv, ev, ac)
        pv_future = _future_exog_for_cli(cfg, series, table, horizon)["planned_value"]
        result = evm_forecast(history, pv_future, horizon)
        indices = compute_indices(history[-1])
        doc = {
            "model": "evm",
            "last_snapshot": {"pv": float(pv[-1]), "ev": float(ev[-1]), "ac": float(ac[-1])},
            "cv": indices.cv, "sv": indices.sv, "cpi": indices.cpi, "spi": indices.spi,
            "pv_future": [float(v) for v in pv_future],
        }
        write_text(out / "models" / "evm.json", json.dumps(doc, indent=2))
        return result.cv if target == "cost_variance" else result.ev
    if name == "arima":
        ac_cfg = cfg["arima"]
        y = table.column(target)
        caps = arima_mod.ArimaOrder(*ac_cfg["caps"])
        order = arima_mod.ArimaOrder(*ac_cfg["order"]) if ac_cfg["order"] else None
        exog_names = tuple(ac_cfg["exog"])
        if exog_names:
            future_map = _future_exog_for_cli(cfg, series, table, horizon)
            exog = np.column_stack([table.column(n) for n in exog_names])
            try:
                future = np.column_stack([future_map[n] for n in exog_names])
            except KeyError as exc:
                raise MissingFutureExog(
                    f"no future values for exogenous column {exc.args[0]!r}; "
                    "supplied exogenous data cannot be extended"
                ) from None
            if order is None:
                # two-stage model: the order describes the residual stage
                design = np.column_stack([np.ones(y.size), exog])
                beta, *_ = np.linalg.lstsq(design, y, rcond=None)
                order, _ = arima_mod.select_order(y - design @ beta, caps,
                                                  parallel=cfg["parallel"])
            _, model = arima_mod.fit_with_exog(y, exog, order, exog_names=exog_names)
            values = arima_mod.forecast_with_exog(model, future, horizon)
            write_text(out / "models" / "arima.json", _exog_model_json(model))
            return values
        if order is None:
            order, _ = arima_mod.select_order(y, caps, parallel=cfg["parallel"])
        model, _ = arima_mod.fit(y, order)
        values = arima_mod.forecast(model, horizon)
        write_text(out / "models" / "arima.json", arima_mod.model_to_json(model))
        return values
    if name == "lstm":
        model = _fit_full_lstm(cfg, table)
        future = _future_exog_for_cli(cfg, series, table, horizon)
        values = lstm_mod.forecast(model, table, horizon, future)
        write_text(out / "models" / "lstm.json", lstm_mod.model_to_json(model))
        return values
    if name == "constant":
        return np.full(horizon, float(cfg["constant"]["value"]))
    if name == "oracle":
        raise ConfigError("the memorizing oracle has no out-of-sample forecast")
    raise ConfigError(f"unknown model {name!r}")


def _exog_model_json(model) -> str:
    doc = {
        "model": "arima+exog",
        "beta": [float(b) for b in model.beta],
        "exog_names": list(model.exog_names),
        "arima": json.loads(arima_mod.model_to_json(model.arima)),
    }
    return json.dumps(doc, indent=2)


def cmd_forecast(cfg: dict) -> int:
    table, series, notes = _load_table(cfg)
    out = _out_dirs(cfg)
    horizon = cfg["horizon"]
    target = cfg["target"]
    future_periods = [next_period(table.periods[-1], h) for h in range(1, horizon + 1)]

    results: dict[str, np.ndarray] = {}
    failures: dict[str, str] = {}
    for name in cfg["models"]:
        try:
            results[name] = _forecast_one_model(name, cfg, table, series, horizon, out)
        except EvmcastError as exc:
            failures[name] = f"{type(exc).__name__}: {exc}"
        if name in results:
            write_csv(out / "forecasts" / f"{name}.csv", ["period", "value"],
                      list(zip(future_periods, results[name])))

    n = len(table)
    chart_series = [("actual", range(n), table.column(target))]
    for name, values in results.items():
        if horizon:
            chart_series.append((f"{name} forecast", range(n - 1, n + horizon),
                                 np.concatenate(([table.column(target)[-1]], values))))
    annotations = _read_annotations(cfg["annotations"]) if cfg["annotations"] else None
    line_chart(out / "charts" / "forecast_vs_actual.svg",
               f"{target}: actuals and forecasts", target,
               chart_series, list(table.periods) + future_periods, annotations)

    doc = [f"# Forecasts: {target}", ""]
    if notes:
        doc += ["_" + "; ".join(notes) + "_", ""]
    doc += [f"Horizon: {horizon} periods from {table.periods[-1]}", ""]
    for name in cfg["models"]:
        if name in failures:
            doc += [f"## {name}", "", f"FAILED: {failures[name]}", ""]
        elif name in results:
            doc += [f"## {name}", "",
                    md_table(["period", "forecast"],
                             list(zip(future_periods, results[name])))]
    doc += ["![forecasts](charts/forecast_vs_actual.svg)", ""]
    write_text(out / "report.md", "\n".join(doc))
    return 0


def _cv_config(cfg: dict, n: int) -> CvConfig:
    cv = cfg["cv"]
    min_train = cv["min_train"]
    if min_train is None:
        min_train = max(cfg["lstm"]["window"] + 5, int(0.6 * n))
    horizon = cv["horizon"]
    if horizon is None:
        horizon = max(1, (n - min_train) // 4)
    return CvConfig(k=cv["k"], mode=cv["mode"], min_train=min_train, horizon=horizon)


def _model_spec(name: str, cfg: dict) -> ModelSpec:
    if name == "arima":
        ac = cfg["arima"]
        return ModelSpec("arima", {
            "order": tuple(ac["order"]) if ac["order"] else None,
            "caps": tuple(ac["caps"]),
            "exog": tuple(ac["exog"]),
        })
    if name == "lstm":
        lc = cfg["lstm"]
        return ModelSpec("lstm", {
            "window": lc["window"],
            "hidden": lc["hidden"],
            "layers": lc["layers"],
            "features": tuple(lc["features"]) if lc["features"] else None,
            "train_config": lstm_mod.TrainConfig(
                epochs=lc["epochs"],
                learning_rate=lc["learning_rate"],
                optimizer=lc["optimizer"],
                validation_fraction=lc["validation_fraction"],
                patience=lc["patience"],
                clip_norm=lc["clip_norm"],
            ),
        })
    if name == "constant":
        return ModelSpec("constant", {"value": cfg["constant"]["value"]})
    return ModelSpec(name, {})


def cmd_evaluate(cfg: dict) -> int:
    table, series, notes = _load_table(cfg)
    out = _out_dirs(cfg)
    target = cfg["target"]
    cv_cfg = _cv_config(cfg, len(table))

    reports = []
    failures: dict[str, str] = {}
    for name in cfg["models"]:
        try:
            rep = cross_validate(table, target, _model_spec(name, cfg), cv_cfg,
                                 root_seed=cfg["seed"], parallel=cfg["parallel"])
            reports.append(rep)
        except EvmcastError as exc:
            failures[name] = f"{type(exc).__name__}: {exc}"
            continue
        write_csv(out / "eval" / f"cv_{name}.csv",
                  ["fold", "train_size", "test_size", "mae", "mse", "rmse", "error"],
                  [(f.fold, f.train_size, f.test_size,
                    f.metrics.mae if f.metrics else "",
                    f.metrics.mse if f.metrics else "",
                    f.metrics.rmse if f.metrics else "",
                    f.error) for f in rep.folds])
        write_text(out / "eval" / f"cv_{name}.json", report_to_json(rep))

    comparison = compare(reports) if reports else None
    doc = [f"# Model evaluation: {target}", ""]
    if notes:
        doc += ["_" + "; ".join(notes) + "_", ""]
    doc += [f"CV protocol: {cv_cfg.mode}, min_train={cv_cfg.min_train}, "
            f"horizon={cv_cfg.horizon}, k={cv_cfg.k}", ""]

    if comparison is not None:
        by_name = {model: (mean, std) for model, mean, std in comparison.rows}
        ranked = comparison.ranking
        write_csv(out / "eval" / "comparison.csv",
                  ["model", "mae", "mse", "rmse", "mae_sd", "mse_sd", "rmse_sd"],
                  [(m,
                    by_name[m][0].mae if by_name[m][0] else "",
                    by_name[m][0].mse if by_name[m][0] else "",
                    by_name[m][0].rmse if by_name[m][0] else "",
                    by_name[m][1].mae if by_name[m][1] else "",
                    by_name[m][1].mse if by_name[m][1] else "",
                    by_name[m][1].rmse if by_name[m][1] else "")
                   for m in ranked])
        for metric_name in ("mae", "mse", "rmse"):
            models_ok = [m for m in ranked if by_name[m][0] is not None]
            bar_chart(out / "charts" / f"metric_{metric_name}.svg",
                      f"{metric_name.upper()} by model ({target})", metric_name.upper(),
                      models_ok,
                      [getattr(by_name[m][0], metric_name) for m in models_ok])
        doc += ["## Ranking (ascending RMSE)", "",
                md_table(["rank", "model", "MAE", "MSE", "RMSE"],
                         [(i + 1, m,
                           by_name[m][0].mae if by_name[m][0] else "no successful folds",
                           by_name[m][0].mse if by_name[m][0] else "",
                           by_name[m][0].rmse if by_name[m][0] else "")
                          for i, m in enumerate(ranked)]),
                "![mae](charts/metric_mae.svg)",
                "![mse](charts/metric_mse.svg)",
                "![rmse](charts/metric_rmse.svg)", ""]
        for rep in reports:
            failed = rep.failed_folds()
            if failed:
                doc += [f"_{rep.model}: {len(failed)} fold(s) failed: "
                        + "; ".join(f"fold {f.fold}: {f.error}" for f in failed) + "_", ""]
    for name, message in failures.items():
        doc += [f"_{name} failed: {message}_", ""]
    write_text(out / "report.md", "\n".join(doc))
    return 0


def cmd_explain(cfg: dict) -> int:
    table, series, notes = _load_table(cfg)
    out = _out_dirs(cfg)
    target = cfg["target"]
    lc = cfg["lstm"]
    if "lstm" not in cfg["models"]:
        raise ConfigError("explain requires the lstm model (feature-based predictor)")
    if len(table) <= lc["window"]:
        raise ConfigError(
            f"empty instance set: need more than {lc['window']} periods, got {len(table)}"
        )

    model = _fit_full_lstm(cfg, table)
    features = model.spec.features
    w = model.spec.window
    n_samples = len(table) - w

    raw = {name: table.column(name) for name in features}
    background = np.array([float(np.mean(raw[name][: w + n_samples])) for name in features])

    def norm_row(values):
        return [lstm_mod.normalize_value(float(v), model.norm[name])
                for v, name in zip(values, features)]

    attributions = []
    from .data import denormalize as _denorm

    for k in range(n_samples):
        prefix = np.array([norm_row([raw[name][k + t] for name in features]) for t in range(w - 1)])

        def predictor(vec):
            window = np.vstack([prefix, norm_row(vec)]) if w > 1 else np.array([norm_row(vec)])
            pred_norm, _ = lstm_mod.forward(model.params, window)
            return float(_denorm(np.array([pred_norm]), model.norm[target])[0])

        instance = np.array([raw[name][k + w - 1] for name in features])
        attributions.append(shapley_exact(predictor, instance, background, features))

    summary_report = summarize_attributions(attributions)
    order = summary_report.ranking
    by_name = dict(zip(summary_report.names, summary_report.mean_abs))
    write_csv(out / "eval" / "shap_summary.csv", ["feature", "mean_abs_shap"],
              [(name, float(by_name[name])) for name in order])
    hbar_chart(out / "charts" / "shap_summary.svg",
               f"Mean |Shapley value| per feature ({target})", "mean |shapley|",
               list(order), [float(by_name[name]) for name in order])

    doc = [f"# Feature attribution: {target}", ""]
    if notes:
        doc += ["_" + "; ".join(notes) + "_", ""]
    doc += [f"Instances: {n_samples} windows; background: training-span feature means; "
            "attribution targets the most recent period of each window.", "",
            md_table(["rank", "feature", "mean |shapley|"],
                     [(i + 1, name, float(by_name[name])) for i, name in enumerate(order)]),
            "![shap](charts/shap_summary.svg)", ""]
    write_text(out / "report.md", "\n".join(doc))
    return 0


def cmd_simulate_exog(cfg: dict) -> int:
    n = cfg["n"]
    if n is None:
        if cfg["data"] is None:
            raise ConfigError("simulate-exog needs --n or --data to size the series")
        n = len(ingest_csv(cfg["data"]).aggregate())
    if n < 0:
        raise ConfigError("n must be >= 0")
    out = Path(cfg["out"])
    out.mkdir(parents=True, exist_ok=True)
    exog = ExogConfig(seed=cfg["seed"])
    stream = SplitMix64(cfg["seed"])
    weather = simulate_weather(n, exog, stream)
    resource = simulate_resource_availability(n, exog, stream)
    write_csv(out / "exog.csv", ["index", "weather_pattern", "resource_availability"],
              [(i, float(weather[i]), float(resource[i])) for i in range(n)])
    return 0


# --- entry point ----------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="evmcast",
        description="Project performance forecasting: EVM baseline, ARIMA, LSTM, "
                    "Shapley attribution, and cross-validated comparison.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("stats", "summary statistics and correlation report"),
        ("forecast", "fit models and forecast beyond the data"),
        ("evaluate", "cross-validated model comparison"),
        ("explain", "Shapley feature attribution for the LSTM"),
        ("simulate-exog", "write the seeded exogenous simulation to CSV"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--data", help="project CSV file")
        p.add_argument("--config", help="JSON config file (flags override it)")
        p.add_argument("--out", help="output directory")
        p.add_argument("--seed", type=int, help="root seed (64-bit unsigned)")
        p.add_argument("--target", help="target column (default cost_variance)")
        p.add_argument("--wbs", help="restrict to one WBS label")
        p.add_argument("--window", type=int, help="rolling-average window (periods)")
        p.add_argument("--horizon", type=int, help="forecast horizon (periods)")
        p.add_argument("--models", help="comma list: evm,arima,lstm,oracle,constant")
        p.add_argument("--parallel", action="store_true", help="parallel CV folds / grid points")
        p.add_argument("--cv-mode", choices=["expanding-window", "blocked-kfold"],
                       help="cross-validation protocol")
        p.add_argument("--annotations", help="CSV of (period,label) markers for charts")
        p.add_argument("--n", type=int, help="length for simulate-exog")
    return parser


_COMMANDS = {
    "stats": cmd_stats,
    "forecast": cmd_forecast,
    "evaluate": cmd_evaluate,
    "explain": cmd_explain,
    "simulate-exog": cmd_simulate_exog,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = load_config(args.config, args)
        return _COMMANDS[args.command](cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 3
    except ModelError as exc:
        print(f"model error: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
