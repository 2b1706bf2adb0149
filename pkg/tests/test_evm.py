import numpy as np
import pytest

from evmcast.errors import DegenerateIndices, NonFiniteInput
from evmcast.evm import EvmSnapshot, compute_indices, evm_forecast, snapshots_from_columns


def test_on_plan_project():
    idx = compute_indices(EvmSnapshot(0, pv=100, ev=100, ac=100))
    assert (idx.cv, idx.sv, idx.cpi, idx.spi) == (0, 0, 1.0, 1.0)


def test_behind_plan_indices():
    idx = compute_indices(EvmSnapshot(0, pv=200, ev=180, ac=200))
    assert idx.cv == -20 and idx.sv == -20
    assert idx.cpi == pytest.approx(0.9) and idx.spi == pytest.approx(0.9)


def test_zero_ac_gives_absent_cpi():
    idx = compute_indices(EvmSnapshot(0, pv=100, ev=50, ac=0))
    assert idx.cv == 50 and idx.cpi is None
    assert idx.spi == 0.5


def test_identities_exact_for_integer_currency():
    rng = np.random.default_rng(0)
    for _ in range(100):
        pv, ev, ac = (float(v) for v in rng.integers(0, 10_000_000, size=3))
        snap = EvmSnapshot(0, pv, ev, ac)
        idx = compute_indices(snap)
        assert idx.cv + snap.ac == snap.ev
        assert idx.sv + snap.pv == snap.ev


def test_identities_tight_for_general_floats():
    # rounding error is bounded by a few ulps of the largest magnitude
    rng = np.random.default_rng(0)
    for _ in range(100):
        pv, ev, ac = rng.uniform(1, 1e6, size=3)
        idx = compute_indices(EvmSnapshot(0, pv, ev, ac))
        scale = max(pv, ev, ac)
        assert abs(idx.cv + ac - ev) <= 4e-16 * scale
        assert abs(idx.sv + pv - ev) <= 4e-16 * scale


def test_snapshot_validation():
    with pytest.raises(NonFiniteInput):
        EvmSnapshot(0, pv=-1, ev=0, ac=0)
    with pytest.raises(NonFiniteInput):
        EvmSnapshot(0, pv=float("inf"), ev=0, ac=0)


def test_forecast_on_plan_stays_zero():
    history = [EvmSnapshot(i, 100.0 * (i + 1), 100.0 * (i + 1), 100.0 * (i + 1)) for i in range(3)]
    result = evm_forecast(history, [400.0, 500.0, 600.0], 3)
    assert np.array_equal(result.cv, np.zeros(3))


def test_forecast_hand_example():
    history = [EvmSnapshot(0, pv=200, ev=180, ac=200)]
    result = evm_forecast(history, [300.0], 1)
    assert result.ev[0] == pytest.approx(270.0)
    assert result.ac[0] == pytest.approx(300.0)
    assert result.cv[0] == pytest.approx(-30.0)


def test_forecast_zero_horizon_empty():
    history = [EvmSnapshot(0, pv=100, ev=90, ac=95)]
    result = evm_forecast(history, [], 0)
    assert result.ev.size == result.ac.size == result.cv.size == 0


def test_forecast_degenerate_indices():
    with pytest.raises(DegenerateIndices):
        evm_forecast([EvmSnapshot(0, pv=0, ev=10, ac=10)], [100.0], 1)
    with pytest.raises(DegenerateIndices):
        evm_forecast([EvmSnapshot(0, pv=10, ev=10, ac=0)], [100.0], 1)


def test_forecast_scale_equivariance():
    history = [EvmSnapshot(0, pv=200, ev=180, ac=210)]
    pv_future = np.array([260.0, 320.0, 400.0])
    base = evm_forecast(history, pv_future, 3)
    lam = 3.7
    scaled_hist = [EvmSnapshot(0, pv=200 * lam, ev=180 * lam, ac=210 * lam)]
    scaled = evm_forecast(scaled_hist, pv_future * lam, 3)
    assert np.allclose(scaled.ev, base.ev * lam, rtol=1e-12)
    assert np.allclose(scaled.ac, base.ac * lam, rtol=1e-12)
    assert np.allclose(scaled.cv, base.cv * lam, rtol=1e-12)


def test_forecast_spi_one_tracks_pv():
    # SPI = 1, CPI != 1: earned value tracks planned increments exactly
    history = [EvmSnapshot(0, pv=100, ev=100, ac=125)]
    pv_future = np.array([150.0, 175.0])
    result = evm_forecast(history, pv_future, 2)
    assert np.allclose(result.ev, pv_future)


def test_forecast_monotone_when_pv_monotone():
    history = [EvmSnapshot(0, pv=100, ev=80, ac=90)]
    pv_future = np.array([110.0, 150.0, 150.0, 200.0])
    result = evm_forecast(history, pv_future, 4)
    assert np.all(np.diff(result.ev) >= 0)


def test_snapshots_from_columns():
    snaps = snapshots_from_columns([1, 2], [1, 2], [1, 3])
    assert snaps[1].ac == 3.0 and snaps[1].index == 1
