"""Effective-rank scaling diagnostics for the stacked embedding.

If the effective rank of the stacked Page matrix stays flat as series are
added (and is small next to the window), pooling the series helps; rapid
growth toward the window size says the series do not share structure and
stacking will hurt.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

from .hsvt import effective_rank
from .embed import page, stacked_page
from .mssa import _working_panel, default_window
from .panel import Panel

GROWTH_LIMIT = 2.0  # max allowed rank growth from one series to all of them
WINDOW_CEILING = 0.5  # "approaches the window": final rank at or above this fraction of L


@dataclass(frozen=True)
class RankScalingRow:
    n_series: int
    L: int
    effective_rank: int


@dataclass(frozen=True)
class RankScalingReport:
    rows: tuple[RankScalingRow, ...]  # stacked-embedding ranks, increasing N'
    per_series: tuple[RankScalingRow, ...] = ()  # single-series ranks at their own window
    energy: float = 0.9

    @classmethod
    def from_sequence(cls, ranks, L: int, n_values=None, energy: float = 0.9) -> "RankScalingReport":
        """Build a report from a plain rank sequence (first entry = single series)."""
        ranks = [int(r) for r in ranks]
        if n_values is None:
            n_values = [1] + [10 ** i for i in range(1, len(ranks))]
        rows = tuple(RankScalingRow(n_series=int(n), L=int(L), effective_rank=r) for n, r in zip(n_values, ranks))
        return cls(rows=rows, energy=energy)

    def to_rows(self) -> list[dict]:
        out = [{"scope": "stacked", "n_series": r.n_series, "L": r.L, "effective_rank": r.effective_rank} for r in self.rows]
        out += [{"scope": "series", "n_series": r.n_series, "L": r.L, "effective_rank": r.effective_rank} for r in self.per_series]
        return out


@dataclass(frozen=True)
class Suitability:
    verdict: str  # favorable | unfavorable | inconclusive
    rationale: str


def rank_scaling_report(panel: Panel, subset_sizes=None, energy: float = 0.9) -> RankScalingReport:
    """Effective rank of the stacked Page matrix across prefix subsets of series.

    Each subset uses its own rate-optimal window sqrt(min(N', T) T).
    Single-series ranks (window sqrt(T)) are recorded alongside.
    """
    work = _working_panel(panel)
    N, T = work.n_series, work.n_steps
    if subset_sizes is None:
        sizes, n = [], 1
        while n < N:
            sizes.append(n)
            n *= 4
        subset_sizes = sizes + [N]
    subset_sizes = sorted({int(s) for s in subset_sizes})
    if subset_sizes[0] < 1 or subset_sizes[-1] > N:
        raise ValueError(f"subset sizes must lie in [1, {N}]")
    rows = []
    for n_sub in subset_sizes:
        sub = replace(work, values=work.values[:n_sub], mask=work.mask[:n_sub], series_names=work.series_names[:n_sub])
        L = min(default_window(n_sub, T), T)
        sp = stacked_page(sub, L)
        rows.append(RankScalingRow(n_series=n_sub, L=L, effective_rank=effective_rank(sp.data, energy)))
    L1 = min(default_window(1, T), T)
    per_series = tuple(
        RankScalingRow(n_series=1, L=L1, effective_rank=effective_rank(page(work, n, L1).data, energy))
        for n in range(N)
    )
    return RankScalingReport(rows=tuple(rows), per_series=per_series, energy=energy)


def mssa_suitability(report: RankScalingReport) -> Suitability:
    """Qualitative verdict on whether stacking the series is likely to help.

    Concretization of the qualitative rule: favorable when the rank at the
    largest subset grew at most GROWTH_LIMIT x over the single-series rank
    and stays below WINDOW_CEILING of the single-series window; unfavorable
    when it grew beyond the limit and reached that ceiling; inconclusive
    otherwise. The thresholds are stated in the rationale.
    """
    if len(report.rows) < 2:
        return Suitability("inconclusive", "need ranks for at least two subset sizes")
    first, last = report.rows[0], report.rows[-1]
    if first.effective_rank < 1:
        return Suitability("inconclusive", "degenerate (rank-0) single-series embedding")
    growth = last.effective_rank / first.effective_rank
    window_ratio = last.effective_rank / first.L
    detail = (
        f"rank grew {first.effective_rank} -> {last.effective_rank} ({growth:.2f}x, limit {GROWTH_LIMIT:g}x) "
        f"from N'={first.n_series} to N'={last.n_series}; final rank / reference window = "
        f"{last.effective_rank}/{first.L} = {window_ratio:.3f} (ceiling {WINDOW_CEILING:g})"
    )
    if growth <= GROWTH_LIMIT and window_ratio < WINDOW_CEILING:
        return Suitability("favorable", f"rank stays flat and small next to the window: {detail}")
    if growth > GROWTH_LIMIT and window_ratio >= WINDOW_CEILING:
        return Suitability("unfavorable", f"rank grows with the number of series and approaches the window: {detail}")
    return Suitability("inconclusive", f"mixed signals: {detail}")
