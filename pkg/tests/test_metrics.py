import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from pagessa import for_err, imp_err, nrmse


def test_imp_err_perfect():
    truth = np.arange(12.0).reshape(3, 4)
    assert imp_err(truth, truth) == 0.0


def test_imp_err_constant_offset():
    truth = np.zeros((2, 5))
    assert imp_err(truth, truth + 1.7) == 1.7**2


def test_imp_err_single_cell():
    truth = np.zeros((2, 5))
    est = truth.copy()
    est[1, 3] = 0.3
    assert np.isclose(imp_err(truth, est), 0.3**2 / 10)


def test_for_err_perfect():
    truth = np.ones((2, 12))
    times = np.array([4, 8, 12])
    assert for_err(truth, np.ones((2, 3)), times, 4) == 0.0


def test_for_err_single_window_formula():
    truth = np.zeros((1, 12))
    fcst = np.array([[0.5]])
    # one series, one target: e^2 * L / (N T)
    assert np.isclose(for_err(truth, fcst, np.array([4]), 4), 0.25 * 4 / 12)


def test_for_err_zero_forecast_of_standardized_noise():
    rng = np.random.default_rng(0)
    x = rng.standard_normal((4, 4000))
    x = (x - x.mean(axis=1, keepdims=True)) / x.std(axis=1, keepdims=True)
    L = 10
    times = np.arange(L, 4001, L)
    err = for_err(x, np.zeros((4, times.size)), times, L)
    assert abs(err - 1.0) < 0.1  # unit variance targets, zero predictor


def test_nrmse_perfect():
    truth = np.arange(10.0).reshape(2, 5)
    scored = np.ones((2, 5), dtype=bool)
    assert nrmse(truth, truth, scored) == 0.0


def test_nrmse_mean_predictor_is_one():
    rng = np.random.default_rng(1)
    truth = 3.0 + 2.5 * rng.standard_normal((3, 5000))
    est = np.repeat(truth.mean(axis=1, keepdims=True), 5000, axis=1)
    scored = np.ones(truth.shape, dtype=bool)
    assert abs(nrmse(truth, est, scored) - 1.0) < 1e-9


def test_nrmse_equal_series_weighting():
    truth = np.vstack([np.sin(np.arange(100.0)), np.sin(np.arange(100.0) + 2)])
    est = truth.copy()
    est[1] += truth[1].std()  # per-series standardized RMSE exactly 1
    scored = np.ones(truth.shape, dtype=bool)
    assert np.isclose(nrmse(truth, est, scored), 0.5)


@settings(max_examples=30, deadline=None)
@given(st.floats(0.1, 100.0), st.floats(-50.0, 50.0), st.integers(0, 2**31))
def test_nrmse_affine_invariance(scale, shift, seed):
    rng = np.random.default_rng(seed)
    truth = rng.standard_normal((3, 40))
    est = truth + 0.3 * rng.standard_normal((3, 40))
    scored = rng.random((3, 40)) < 0.5
    if not scored.any(axis=1).all():
        scored[:, 0] = True
    base = nrmse(truth, est, scored)
    truth2, est2 = truth.copy(), est.copy()
    truth2[1] = scale * truth[1] + shift
    est2[1] = scale * est[1] + shift
    assert np.isclose(nrmse(truth2, est2, scored), base, rtol=1e-9)


def test_metrics_nonnegative_and_zero_iff_exact():
    rng = np.random.default_rng(2)
    truth = rng.standard_normal((2, 30))
    est = truth + 1e-3
    assert imp_err(truth, est) > 0
    scored = np.ones(truth.shape, dtype=bool)
    assert nrmse(truth, est, scored) > 0
