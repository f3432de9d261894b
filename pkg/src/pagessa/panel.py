"""Data model for multivariate time series with missing values.

A panel holds N aligned series over T steps together with a boolean
observation mask. Cells whose mask is False carry no information; their
stored value is whatever the initialization policy put there (0 unless a
fill policy was applied).
"""

from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass, field, replace

import numpy as np


class IngestError(ValueError):
    """Raised when a CSV file is not rectangular."""


class ParseError(ValueError):
    """Raised when an observed CSV cell cannot be parsed as a number."""

    def __init__(self, message: str, row: int, column: int):
        super().__init__(message)
        self.row = row
        self.column = column


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class Panel:
    """N x T observations with a boolean mask (True = observed).

    Panels are immutable; all operations return new instances. ``filled``
    records whether unobserved cells were populated by a fill policy (in
    which case the stored values form a dense proxy series and de-noising
    must not rescale by the observation fraction).
    """

    values: np.ndarray
    mask: np.ndarray
    series_names: tuple[str, ...] = ()
    t0: int = 0
    filled: bool = False

    def __post_init__(self):
        values = _readonly(np.asarray(self.values, dtype=float))
        mask = _readonly(np.asarray(self.mask, dtype=bool))
        if values.ndim != 2 or mask.shape != values.shape:
            raise ValueError(f"values and mask must share an N x T shape, got {values.shape} and {mask.shape}")
        if values.shape[0] < 1 or values.shape[1] < 1:
            raise ValueError("panel needs at least one series and one time step")
        names = tuple(self.series_names) if self.series_names else tuple(f"s{i}" for i in range(values.shape[0]))
        if len(names) != values.shape[0]:
            raise ValueError(f"{len(names)} series names for {values.shape[0]} series")
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "mask", mask)
        object.__setattr__(self, "series_names", names)

    @property
    def n_series(self) -> int:
        return self.values.shape[0]

    @property
    def n_steps(self) -> int:
        return self.values.shape[1]

    def zero_filled(self) -> np.ndarray:
        """Values with unobserved cells forced to 0 (writable copy)."""
        return np.where(self.mask, self.values, 0.0)


@dataclass(frozen=True)
class LatentPanel:
    """Fully observed ground truth, optionally with per-cell noise variances."""

    values: np.ndarray
    variances: np.ndarray | None = None

    def __post_init__(self):
        values = _readonly(np.asarray(self.values, dtype=float))
        if values.ndim != 2:
            raise ValueError("latent values must be N x T")
        object.__setattr__(self, "values", values)
        if self.variances is not None:
            variances = _readonly(np.asarray(self.variances, dtype=float))
            if variances.shape != values.shape:
                raise ValueError("variances must match the values shape")
            if np.any(variances < 0):
                raise ValueError("variances must be non-negative")
            object.__setattr__(self, "variances", variances)

    @property
    def n_series(self) -> int:
        return self.values.shape[0]

    @property
    def n_steps(self) -> int:
        return self.values.shape[1]


def load_csv(path, missing_token: str = "") -> Panel:
    """Read a wide CSV: header row of series names, one row per time step.

    Cells equal to ``missing_token`` (after stripping whitespace) become
    unobserved; every other cell must parse as a number.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        rows = [row for row in reader]
    if not rows:
        raise IngestError(f"{path}: empty file")
    header = [h.strip() for h in rows[0]]
    n = len(header)
    if n == 0 or len(rows) < 2:
        raise IngestError(f"{path}: need a header row and at least one data row")
    values = np.zeros((n, len(rows) - 1))
    mask = np.zeros((n, len(rows) - 1), dtype=bool)
    for t, row in enumerate(rows[1:]):
        if len(row) != n:
            raise IngestError(f"{path}: row {t + 2} has {len(row)} cells, expected {n}")
        for j, cell in enumerate(row):
            cell = cell.strip()
            if cell == missing_token:
                continue
            try:
                values[j, t] = float(cell)
            except ValueError:
                raise ParseError(f"{path}: non-numeric cell {cell!r} at row {t + 2}, column {j + 1}", row=t + 2, column=j + 1) from None
            mask[j, t] = True
    return Panel(values=values, mask=mask, series_names=tuple(header))


def save_csv(panel: Panel, path, missing_token: str = "") -> None:
    """Inverse of load_csv on (observed values, mask)."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(panel.series_names)
        for t in range(panel.n_steps):
            writer.writerow([repr(float(panel.values[j, t])) if panel.mask[j, t] else missing_token for j in range(panel.n_series)])


def initialize_missing(panel: Panel, policy: str = "zero") -> Panel:
    """Populate unobserved cells; the mask is left untouched.

    policy "zero" stores 0 everywhere unobserved. policy "ffill" carries
    the nearest preceding observation forward, then fills leading gaps
    backward; a series with no observations at all falls back to zeros
    (reported via a warning).
    """
    if policy not in ("zero", "ffill"):
        raise ValueError(f"unknown initialization policy {policy!r}")
    if policy == "zero":
        return replace(panel, values=panel.zero_filled(), filled=False)
    out = panel.zero_filled()
    for i in range(panel.n_series):
        obs = np.flatnonzero(panel.mask[i])
        if obs.size == 0:
            warnings.warn(f"series {panel.series_names[i]!r} has no observations; fill falls back to zeros")
            continue
        idx = np.searchsorted(obs, np.arange(panel.n_steps), side="right") - 1
        idx = np.clip(idx, 0, obs.size - 1)  # leading gap -> backward fill from first observation
        out[i] = panel.values[i, obs[idx]]
    return replace(panel, values=out, filled=True)


def observed_fraction(panel_or_mask, rows=None) -> float:
    """Fraction of observed cells, floored at one virtual observation.

    Accepts a Panel or a boolean mask (e.g. an embedding mask). ``rows``
    optionally restricts the count to a subset of rows, as the forecaster
    needs when it works with the top L-1 rows of an embedding.
    """
    mask = panel_or_mask.mask if isinstance(panel_or_mask, Panel) else np.asarray(panel_or_mask, dtype=bool)
    if rows is not None:
        mask = mask[np.asarray(rows)]
    total = mask.size
    if total == 0:
        raise ValueError("empty mask")
    return max(1.0 / total, float(mask.sum()) / total)
