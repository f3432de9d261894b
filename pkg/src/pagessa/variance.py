"""Time-varying variance estimation by de-noising the panel and its square.

Imputing X gives f_hat, imputing X^2 gives an estimate g_hat of
E[X^2] = f^2 + sigma^2 (fully observed case), so the clipped difference
max(0, g_hat - f_hat^2) estimates the per-cell noise variance.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, replace

import numpy as np

from .hsvt import EnergyThreshold, RankPolicy
from .mssa import ImputeResult, impute
from .panel import Panel, observed_fraction


@dataclass(frozen=True)
class VarianceResult:
    sigma2_hat: np.ndarray  # (N, T), >= 0 by the clip
    mean_result: ImputeResult
    squared_result: ImputeResult
    flagged_partial: bool = False  # True when the panel had missing cells


def estimate_variance(
    panel: Panel,
    L: int | None = None,
    policy_mean: RankPolicy = EnergyThreshold(),
    policy_sq: RankPolicy = EnergyThreshold(),
) -> VarianceResult:
    """Run the imputation twice, on X and on X^2, and clip the difference.

    The guarantees assume a fully observed panel; with missing cells only
    the observed values are squared (mask unchanged) and the result is
    flagged.
    """
    partial = observed_fraction(panel) < 1.0
    if partial:
        warnings.warn("variance estimation is calibrated for fully observed panels; missing cells present")
    mean_result = impute(panel, L=L, policy=policy_mean, mode="mssa")
    squared = replace(panel, values=np.where(panel.mask, panel.values, 0.0) ** 2)
    squared_result = impute(squared, L=mean_result.L, policy=policy_sq, mode="mssa")
    sigma2 = np.maximum(0.0, squared_result.estimates - mean_result.estimates**2)
    return VarianceResult(
        sigma2_hat=sigma2,
        mean_result=mean_result,
        squared_result=squared_result,
        flagged_partial=partial,
    )
