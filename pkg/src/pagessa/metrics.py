"""Error metrics: mean-squared imputation/forecast risks and NRMSE."""

from __future__ import annotations

import numpy as np


def _values(x) -> np.ndarray:
    return np.asarray(getattr(x, "values", getattr(x, "estimates", x)), dtype=float)


def imp_err(truth, estimates, scored_mask: np.ndarray | None = None) -> float:
    """Mean squared error over the scored cells (all cells by default)."""
    t = _values(truth)
    e = _values(estimates)
    if t.shape != e.shape:
        raise ValueError(f"shape mismatch {t.shape} vs {e.shape}")
    sq = (t - e) ** 2
    if scored_mask is None:
        return float(sq.mean())
    scored_mask = np.asarray(scored_mask, dtype=bool)
    if not scored_mask.any():
        raise ValueError("empty scored set")
    return float(sq[scored_mask].mean())


def for_err(truth, forecasts: np.ndarray, times: np.ndarray, L: int) -> float:
    """Forecast risk (L / NT) * sum of squared errors at the scored block ends.

    ``times`` are 1-based target times (multiples of L); ``forecasts`` is
    (N, len(times)). When every block end of the panel is scored this is
    exactly the mean squared forecast error.
    """
    t = _values(truth)
    n, T = t.shape
    times = np.asarray(times, dtype=int)
    forecasts = np.asarray(forecasts, dtype=float)
    if forecasts.shape != (n, times.size):
        raise ValueError(f"forecasts must be (N, n_times)={n, times.size}, got {forecasts.shape}")
    sq = (t[:, times - 1] - forecasts) ** 2
    return float(L * sq.sum() / (n * T))


def standardize_stats(values: np.ndarray, stats_mask: np.ndarray | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Per-series mean and std, optionally restricted to a training mask."""
    v = np.asarray(values, dtype=float)
    if stats_mask is None:
        mean = v.mean(axis=1)
        std = v.std(axis=1)
    else:
        stats_mask = np.asarray(stats_mask, dtype=bool)
        mean = np.array([v[i, stats_mask[i]].mean() if stats_mask[i].any() else 0.0 for i in range(v.shape[0])])
        std = np.array([v[i, stats_mask[i]].std() if stats_mask[i].any() else 0.0 for i in range(v.shape[0])])
    std = np.where(std > 0, std, 1.0)  # constant series: scale by 1 instead of dividing by 0
    return mean, std


def nrmse(truth, estimates, scored_mask: np.ndarray, stats_mask: np.ndarray | None = None) -> float:
    """RMSE after per-series standardization, averaged equally across series.

    Standardization statistics come from ``stats_mask`` (the training
    period) so rolling evaluation never leaks future moments; they default
    to the whole series. Series with no scored cells are skipped.
    """
    t = _values(truth)
    e = _values(estimates)
    scored_mask = np.asarray(scored_mask, dtype=bool)
    if t.shape != e.shape or scored_mask.shape != t.shape:
        raise ValueError("truth, estimates and scored_mask must share a shape")
    mean, std = standardize_stats(t, stats_mask)
    per_series = []
    for i in range(t.shape[0]):
        m = scored_mask[i]
        if not m.any():
            continue
        diff = (t[i, m] - e[i, m]) / std[i]
        per_series.append(float(np.sqrt(np.mean(diff**2))))
    if not per_series:
        raise ValueError("empty scored set")
    return float(np.mean(per_series))
