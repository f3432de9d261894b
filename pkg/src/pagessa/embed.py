"""Page, stacked-Page, Hankel and Page-tensor embeddings.

All embeddings are plain reshapes/reads of the source series and carry
index maps back to (series, time). Constructors never copy the mask
semantics: an embedded cell is observed iff its source cell is.

Time is 1-based in the index-map formulas (Page entry (i, j) holds
x(i + (j-1)L)); array indices below are 0-based, so entry [i, j] holds
x[t0 + i + j*L].
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .panel import Panel


class EmbedError(ValueError):
    """Raised when a window length does not fit the series."""


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class PageMatrix:
    """L x (B/L) block reshape of one series, column j = block j.

    ``t_start`` is the 0-based offset of the embedded segment and ``tail``
    the uncovered trailing range (start, stop), empty when B == T.
    """

    data: np.ndarray
    mask: np.ndarray
    L: int
    series_id: int
    t_start: int = 0
    tail: tuple[int, int] | None = None

    def time_of(self, i: int, j: int) -> int:
        """0-based source time of entry (i, j)."""
        return self.t_start + i + j * self.L

    def unfold(self) -> tuple[np.ndarray, np.ndarray]:
        """Reproduce the embedded segment (values, mask), element-exact."""
        return self.data.T.ravel().copy(), self.mask.T.ravel().copy()


@dataclass(frozen=True)
class StackedPage:
    """Column-wise concatenation of the N per-series Page matrices."""

    data: np.ndarray
    mask: np.ndarray
    L: int
    n_series: int
    block_cols: int
    t_start: int = 0
    tail: tuple[int, int] | None = None

    def column_owner(self, col: int) -> tuple[int, int]:
        """(series, block column) owning a stacked column."""
        return col // self.block_cols, col % self.block_cols

    def series_block(self, n: int) -> np.ndarray:
        """The Page matrix of series n inside the stack."""
        return self.data[:, n * self.block_cols : (n + 1) * self.block_cols]


@dataclass(frozen=True)
class HankelMatrix:
    """floor(T/2) x floor(T/2) Hankel of a single series: H[i][j] = x(i+j-1)."""

    data: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "data", _readonly(self.data))


@dataclass(frozen=True)
class PageTensor:
    """N x (B/L) x L cube; entry [n, s, l] holds series n at time t0 + s*L + l."""

    data: np.ndarray
    mask: np.ndarray
    L: int
    t_start: int = 0
    tail: tuple[int, int] | None = None

    def time_of(self, n: int, s: int, l: int) -> int:
        return self.t_start + s * self.L + l


def _embed_range(T: int, L: int, t_start: int) -> tuple[int, tuple[int, int] | None]:
    length = T - t_start
    if L < 1:
        raise EmbedError("window length L must be >= 1")
    if L > length:
        raise EmbedError(f"window length L={L} exceeds the {length} available steps")
    body = (length // L) * L
    tail = None if body == length else (t_start + body, T)
    return body, tail


def page(panel: Panel, series: int, L: int, t_start: int = 0) -> PageMatrix:
    """Page matrix of one series; embeds the longest prefix multiple of L.

    When T is not a multiple of L the leftover range is recorded in
    ``tail`` so callers can run the usual second pass over the suffix.
    """
    body, tail = _embed_range(panel.n_steps, L, t_start)
    seg = panel.values[series, t_start : t_start + body]
    msk = panel.mask[series, t_start : t_start + body]
    return PageMatrix(
        data=_readonly(seg.reshape(-1, L).T),
        mask=_readonly(msk.reshape(-1, L).T),
        L=L,
        series_id=series,
        t_start=t_start,
        tail=tail,
    )


def stacked_page(panel: Panel, L: int, t_start: int = 0) -> StackedPage:
    """Stacked Page matrix: per-series Page matrices concatenated column-wise."""
    body, tail = _embed_range(panel.n_steps, L, t_start)
    blocks = [page(panel, n, L, t_start) for n in range(panel.n_series)]
    return StackedPage(
        data=_readonly(np.hstack([b.data for b in blocks])),
        mask=_readonly(np.hstack([b.mask for b in blocks])),
        L=L,
        n_series=panel.n_series,
        block_cols=body // L,
        t_start=t_start,
        tail=tail,
    )


def hankel_window(x: np.ndarray, L: int) -> np.ndarray:
    """L x (T-L+1) sliding-window Hankel: H[i, j] = x[i + j]."""
    x = np.asarray(x, dtype=float)
    T = x.shape[0]
    if not 1 <= L <= T:
        raise EmbedError(f"window length L={L} must lie in [1, {T}]")
    idx = np.arange(L)[:, None] + np.arange(T - L + 1)[None, :]
    return x[idx]


def hankel(x: np.ndarray) -> HankelMatrix:
    """Square floor(T/2) x floor(T/2) Hankel matrix of a series."""
    x = np.asarray(x, dtype=float)
    half = x.shape[0] // 2
    if half < 1:
        raise EmbedError("need at least two points for a Hankel matrix")
    return HankelMatrix(data=hankel_window(x, half)[:, :half])


def stacked_hankel(panel: Panel, orientation: str = "horizontal", L: int | None = None) -> np.ndarray:
    """Concatenated per-series Hankels, column-wise or row-wise.

    With L=None each block is the square floor(T/2) Hankel; passing L
    gives the L x (T-L+1) window form the Hankel-stacking baselines use.
    Intended for fully observed or zero-initialized panels.
    """
    if orientation not in ("horizontal", "vertical"):
        raise ValueError(f"orientation must be horizontal or vertical, got {orientation!r}")
    if L is None:
        blocks = [hankel(panel.values[n]).data for n in range(panel.n_series)]
    else:
        blocks = [hankel_window(panel.values[n], L) for n in range(panel.n_series)]
    return np.hstack(blocks) if orientation == "horizontal" else np.vstack(blocks)


def page_tensor(panel: Panel, L: int, t_start: int = 0) -> PageTensor:
    """Order-three cube stacking the per-series Page layouts."""
    body, tail = _embed_range(panel.n_steps, L, t_start)
    seg = panel.values[:, t_start : t_start + body]
    msk = panel.mask[:, t_start : t_start + body]
    n = panel.n_series
    return PageTensor(
        data=_readonly(seg.reshape(n, -1, L)),
        mask=_readonly(msk.reshape(n, -1, L)),
        L=L,
        t_start=t_start,
        tail=tail,
    )


def numeric_rank(m: np.ndarray, tol: float = 1e-8) -> int:
    """Number of singular values above tol relative to the largest."""
    s = np.linalg.svd(np.asarray(m, dtype=float), compute_uv=False)
    if s.size == 0 or s[0] == 0.0:
        return 0
    return int(np.sum(s > tol * s[0]))
