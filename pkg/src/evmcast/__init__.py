"""evmcast: earned-value project performance forecasting toolkit.

Library modules:
    data        ingestion, cleaning, normalization, summary statistics
    evm         earned-value indicators and the index-extrapolation baseline
    features    rolling averages, seeded exogenous simulation, feature table
    arima       ARIMA(p,d,q) engine with CSS estimation and AIC selection
    lstm        from-scratch LSTM regressor with BPTT training
    evaluation  metrics, CV splits, per-model evaluation, comparison
    explain     exact Shapley-value feature attribution
    cli         report-emitting command line (also `python -m evmcast`)
"""

from .data import (
    CleanLog,
    CleanPolicy,
    NormParams,
    PeriodRecord,
    ProjectSeries,
    SummaryStats,
    clean,
    corr_matrix,
    denormalize,
    ingest_csv,
    normalize_minmax,
    pearson_corr,
    summary,
)
from .evaluation import Comparison, CvConfig, EvalReport, Metrics, ModelSpec, compare, cross_validate, metrics, split
from .evm import EvmForecast, EvmIndices, EvmSnapshot, compute_indices, evm_forecast
from .explain import Attribution, ShapSummary, shap_summary, shapley_exact
from .features import ExogConfig, FeatureTable, build_feature_table, rolling_average, simulate_resource_availability, simulate_weather

__version__ = "0.1.0"
