import numpy as np
import pytest

from evmcast.data import ingest_csv
from evmcast.errors import InvalidWindow
from evmcast.features import (
    FEATURE_COLUMNS,
    ExogConfig,
    build_feature_table,
    rolling_average,
    simulate_resource_availability,
    simulate_weather,
)
from evmcast.rng import SplitMix64
from evmcast.synthetic import generate_project

# frozen from the independent SplitMix64 oracle (seed 42, draws 1..5)
FROZEN_WEATHER_SEED42 = [8, 2, 3, 4, 1]
FROZEN_RESOURCE_SEED42 = [
    94.83129757543647,
    83.1982078575384,
    85.57202260510277,
    86.88381433047275,
    80.76060337080493,
]


def test_rolling_hand_example():
    assert list(rolling_average([2, 4, 6, 8], 3)) == [2.0, 3.0, 4.0, 6.0]


def test_rolling_window_one_identity():
    x = np.array([3.5, -1.0, 7.25])
    assert np.array_equal(rolling_average(x, 1), x)


def test_rolling_constant_column():
    assert np.allclose(rolling_average([4.0] * 10, 5), 4.0)


def test_rolling_large_window_is_running_mean():
    x = np.array([1.0, 4.0, 10.0, -2.0])
    expected = [np.mean(x[: t + 1]) for t in range(4)]
    assert np.allclose(rolling_average(x, 10), expected)


def test_rolling_stays_within_source_range():
    rng = np.random.default_rng(5)
    x = rng.normal(size=50)
    out = rolling_average(x, 7)
    assert np.all(out >= x.min()) and np.all(out <= x.max())


def test_rolling_invalid_window():
    with pytest.raises(InvalidWindow):
        rolling_average([1.0], 0)


def test_weather_frozen_values():
    got = simulate_weather(5, ExogConfig(seed=42))
    assert list(got) == FROZEN_WEATHER_SEED42


def test_resource_frozen_values():
    got = simulate_resource_availability(5, ExogConfig(seed=42))
    assert list(got) == FROZEN_RESOURCE_SEED42


def test_simulations_empty():
    assert simulate_weather(0, ExogConfig(seed=1)).size == 0
    assert simulate_resource_availability(0, ExogConfig(seed=1)).size == 0


def test_weather_bounds_n1000():
    w = simulate_weather(1000, ExogConfig(seed=9))
    assert set(np.unique(w)) <= set(range(1, 11))
    assert w.min() == 1 and w.max() == 10  # both endpoints reached at n=1000


def test_resource_bounds_n1000():
    r = simulate_resource_availability(1000, ExogConfig(seed=9))
    assert np.all((r >= 80.0) & (r < 100.0))


def test_simulations_bit_deterministic():
    cfg = ExogConfig(seed=77)
    assert np.array_equal(simulate_weather(100, cfg), simulate_weather(100, cfg))
    assert np.array_equal(
        simulate_resource_availability(100, cfg), simulate_resource_availability(100, cfg)
    )


def test_shared_stream_positions_documented():
    # combined call: weather takes draws 1..n, resource draws n+1..2n
    cfg = ExogConfig(seed=42)
    stream = SplitMix64(42)
    w = simulate_weather(5, cfg, stream)
    r = simulate_resource_availability(5, cfg, stream)
    assert list(w) == FROZEN_WEATHER_SEED42
    raw = SplitMix64(42).floats(10)[5:]
    assert list(r) == [80.0 + 20.0 * u for u in raw]


def test_feature_table_shape_and_columns():
    series = generate_project(24, seed=3)
    table = build_feature_table(series, ExogConfig(seed=3), window=3)
    assert table.names == FEATURE_COLUMNS
    assert len(table.names) == 11
    for name in table.names:
        assert table.column(name).shape == (24,)


def test_feature_table_cost_variance_identity():
    series = generate_project(18, seed=4)
    table = build_feature_table(series, ExogConfig(seed=4), window=3)
    expected = series.column("earned_value") - series.column("actual_cost_cum")
    assert np.array_equal(table.column("cost_variance"), expected)


def test_feature_table_window_one_rolling_identity():
    series = generate_project(12, seed=5)
    table = build_feature_table(series, ExogConfig(seed=5), window=1)
    assert np.array_equal(table.column("rolling_avg_planned_value"), table.column("planned_value"))
    assert np.array_equal(table.column("rolling_avg_cost_variance"), table.column("cost_variance"))


def test_feature_table_exog_passthrough(tmp_path):
    # a real weather column in the CSV bypasses simulation untouched
    header = "period,wbs,estimate_cost,actual_cost,planned_value,earned_value,weather_pattern\n"
    body = (
        "2011-01,ROAD,10,9,10,9,7\n"
        "2011-02,ROAD,10,9,20,19,2\n"
        "2011-03,ROAD,10,9,30,29,9\n"
    )
    path = tmp_path / "w.csv"
    path.write_text(header + body, encoding="utf-8")
    series = ingest_csv(path)
    table = build_feature_table(series, ExogConfig(seed=1), window=2)
    assert list(table.column("weather_pattern")) == [7.0, 2.0, 9.0]
    # resource was simulated from draws 1..n (weather consumed nothing)
    expected = [80.0 + 20.0 * u for u in SplitMix64(1).floats(3)]
    assert list(table.column("resource_availability")) == expected


def test_feature_table_supplied_cost_variance(tmp_path):
    header = "period,wbs,estimate_cost,actual_cost,planned_value,earned_value,cost_variance\n"
    body = "2011-01,ROAD,10,9,10,9,42\n2011-02,ROAD,10,9,20,19,41\n"
    path = tmp_path / "cv.csv"
    path.write_text(header + body, encoding="utf-8")
    series = ingest_csv(path)
    table = build_feature_table(series, ExogConfig(seed=1), window=1, cv_source="supplied")
    assert list(table.column("cost_variance")) == [42.0, 41.0]
    default = build_feature_table(series, ExogConfig(seed=1), window=1)
    assert list(default.column("cost_variance")) == [0.0, 1.0]  # ev - cumsum(actual)


def test_feature_table_slice():
    series = generate_project(10, seed=6)
    table = build_feature_table(series, ExogConfig(seed=6), window=3)
    part = table.slice(2, 7)
    assert len(part) == 5
    assert part.periods == table.periods[2:7]
    assert np.array_equal(part.column("earned_value"), table.column("earned_value")[2:7])
