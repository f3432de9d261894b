"""Signal families, factor-model panels and corruption for ground-truth experiments.

Every generator is deterministic given its seed. Signal specs carry
closed-form Hankel rank bounds where the theory gives one, so tests can
check numeric ranks against them.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .embed import hankel, numeric_rank
from .panel import LatentPanel, Panel


# ---------------------------------------------------------------------
# signal specs
# ---------------------------------------------------------------------

@dataclass(frozen=True)
class HarmonicTerm:
    """One additive term amplitude * exp(decay t) * cos(2 pi freq t + phase) * P(t)."""

    amplitude: float = 1.0
    frequency: float = 0.0  # cycles per step
    phase: float = 0.0
    decay: float = 0.0
    poly: tuple[float, ...] = (1.0,)  # P(t) coefficients, low order first

    def values(self, t: np.ndarray) -> np.ndarray:
        p = np.polynomial.polynomial.polyval(t, np.asarray(self.poly, dtype=float))
        return self.amplitude * np.exp(self.decay * t) * np.cos(2 * np.pi * self.frequency * t + self.phase) * p


@dataclass(frozen=True)
class HarmonicMix:
    terms: tuple[HarmonicTerm, ...]

    def __post_init__(self):
        if not self.terms:
            raise ValueError("need at least one term")
        for term in self.terms:
            if not np.isfinite(term.frequency):
                raise ValueError("harmonic frequencies must be finite")


@dataclass(frozen=True)
class LinearRecurrence:
    """f(t) = sum_l coefficients[l-1] * f(t-l), started from seed_values."""

    coefficients: tuple[float, ...]
    seed_values: tuple[float, ...]

    def __post_init__(self):
        if not self.coefficients:
            raise ValueError("recurrence needs at least one coefficient")
        if len(self.seed_values) != len(self.coefficients):
            raise ValueError("need exactly one seed value per coefficient")


@dataclass(frozen=True)
class SmoothPeriodic:
    """Samples of a periodic callable; fn may be a registry name for JSON configs."""

    period: float
    fn: str | Callable[[np.ndarray], np.ndarray] = "smooth_bump"

    def callable(self) -> Callable[[np.ndarray], np.ndarray]:
        if callable(self.fn):
            return self.fn
        try:
            return SMOOTH_FUNCTIONS[self.fn]
        except KeyError:
            raise ValueError(f"unknown smooth function {self.fn!r}; registered: {sorted(SMOOTH_FUNCTIONS)}") from None


@dataclass(frozen=True)
class Constant:
    value: float = 1.0


@dataclass(frozen=True)
class Polynomial:
    coefficients: tuple[float, ...] = (0.0, 1.0)  # low order first

    def __post_init__(self):
        if not self.coefficients:
            raise ValueError("polynomial needs at least one coefficient")


SignalSpec = HarmonicMix | LinearRecurrence | SmoothPeriodic | Constant | Polynomial

# C-infinity and C^2 periodic test functions, taking phase in [0, 1)
SMOOTH_FUNCTIONS: dict[str, Callable[[np.ndarray], np.ndarray]] = {
    "smooth_bump": lambda u: np.exp(np.sin(2 * np.pi * u)),
    "abs_sin_cubed": lambda u: np.abs(np.sin(np.pi * u)) ** 3,
}


def signal_values(spec: SignalSpec, n_steps: int) -> np.ndarray:
    """Sample a spec at t = 1 .. n_steps."""
    t = np.arange(1, n_steps + 1, dtype=float)
    if isinstance(spec, HarmonicMix):
        return np.sum([term.values(t) for term in spec.terms], axis=0)
    if isinstance(spec, LinearRecurrence):
        g = len(spec.coefficients)
        out = np.zeros(n_steps)
        out[: min(g, n_steps)] = spec.seed_values[: min(g, n_steps)]
        coeffs = np.asarray(spec.coefficients, dtype=float)
        for i in range(g, n_steps):
            out[i] = coeffs @ out[i - g : i][::-1]
        return out
    if isinstance(spec, SmoothPeriodic):
        return spec.callable()((t / spec.period) % 1.0)
    if isinstance(spec, Constant):
        return np.full(n_steps, spec.value)
    if isinstance(spec, Polynomial):
        return np.polynomial.polynomial.polyval(t, np.asarray(spec.coefficients, dtype=float))
    raise TypeError(f"unknown signal spec {spec!r}")


def rank_bound(spec: SignalSpec) -> int | None:
    """Closed-form Hankel rank bound, or None when the family has no hard bound."""
    if isinstance(spec, HarmonicMix):
        m_max = max(len(term.poly) - 1 for term in spec.terms)
        return len(spec.terms) * (m_max + 1) * (m_max + 2)
    if isinstance(spec, LinearRecurrence):
        return len(spec.coefficients)
    if isinstance(spec, Constant):
        return 1
    if isinstance(spec, Polynomial):
        return len(spec.coefficients)
    return None


def hankel_rank_oracle(spec: SignalSpec, n_steps: int, tol: float = 1e-8) -> int:
    """Numeric rank of the Hankel matrix of the generated series."""
    return numeric_rank(hankel(signal_values(spec, n_steps)).data, tol)


class RankBoundError(AssertionError):
    """A numeric Hankel rank exceeded its closed-form bound."""


@dataclass(frozen=True)
class CalculusResult:
    rank_sum: int
    rank_prod: int
    bound_sum: int
    bound_prod: int


def calculus_check(f1: SignalSpec, f2: SignalSpec, n_steps: int, tol: float = 1e-8) -> CalculusResult:
    """Numeric Hankel ranks of f1+f2 and f1*f2 against the closure bounds G1+G2 and G1*G2."""
    g1, g2 = rank_bound(f1), rank_bound(f2)
    if g1 is None or g2 is None:
        raise ValueError("both specs need closed-form rank bounds")
    x1, x2 = signal_values(f1, n_steps), signal_values(f2, n_steps)
    rank_sum = numeric_rank(hankel(x1 + x2).data, tol)
    rank_prod = numeric_rank(hankel(x1 * x2).data, tol)
    result = CalculusResult(rank_sum=rank_sum, rank_prod=rank_prod, bound_sum=g1 + g2, bound_prod=g1 * g2)
    if rank_sum > result.bound_sum:
        raise RankBoundError(f"sum rank {rank_sum} exceeds bound {result.bound_sum}")
    if rank_prod > result.bound_prod:
        raise RankBoundError(f"product rank {rank_prod} exceeds bound {result.bound_prod}")
    return result


def fourier_truncation_error(fn: Callable[[np.ndarray], np.ndarray], order: int, grid: int = 4096) -> float:
    """Sup-norm error of the order-G truncated Fourier series on a period grid."""
    u = np.arange(grid) / grid
    f = fn(u)
    coeffs = np.fft.rfft(f) / grid
    kept = coeffs.copy()
    kept[order + 1 :] = 0.0
    approx = np.fft.irfft(kept * grid, n=grid)
    return float(np.max(np.abs(f - approx)))


# ---------------------------------------------------------------------
# factor-model panels
# ---------------------------------------------------------------------

@dataclass(frozen=True)
class FactorModelSpec:
    """Low-rank panel M = U W with temporal structure in the rows of W.

    Loadings are standard normal draws clipped to [-loading_bound,
    loading_bound]; each temporal row is rescaled when it exceeds
    value_bound so the stated bounds always hold.
    """

    n_series: int
    n_steps: int
    rank: int
    temporal: tuple[SignalSpec, ...]
    loading_bound: float = 1.0
    value_bound: float | None = None
    nonnegative_loadings: bool = False  # needed when the panel models variances
    seed: int = 0

    def __post_init__(self):
        if len(self.temporal) != self.rank:
            raise ValueError(f"need exactly rank={self.rank} temporal specs, got {len(self.temporal)}")
        if self.n_series < 1 or self.n_steps < 1 or self.rank < 1:
            raise ValueError("n_series, n_steps and rank must be positive")


def generate_latent(spec: FactorModelSpec) -> LatentPanel:
    """Deterministic latent panel for a factor-model spec."""
    rng = np.random.default_rng(spec.seed)
    loadings = rng.standard_normal((spec.n_series, spec.rank))
    if spec.nonnegative_loadings:
        loadings = np.abs(loadings)
    loadings = np.clip(loadings, -spec.loading_bound, spec.loading_bound)
    w = np.stack([signal_values(s, spec.n_steps) for s in spec.temporal])
    if spec.value_bound is not None:
        peak = np.abs(w).max(axis=1, keepdims=True)
        w = w * np.minimum(1.0, spec.value_bound / np.maximum(peak, 1e-300))
    return LatentPanel(values=loadings @ w)


def mixture_of_harmonics_panel(
    n_left: int = 5,
    n_right: int = 10,
    rank: int = 4,
    n_steps: int = 15000,
    n_harmonics: int = 4,
    seed: int = 0,
) -> LatentPanel:
    """Random mixtures of slow harmonics over a rank-one loading grid.

    Each temporal factor is sum_h alpha_h cos(omega_h t / T) with
    alpha ~ U[-1, 10] and omega ~ U[1, 1000]; series (i, j) mixes the
    factors with weight u_ik v_jk. Note omega enters as omega/T, so some
    draws are near-DC.
    """
    rng = np.random.default_rng(seed)
    u = rng.standard_normal((rank, n_left))
    v = rng.standard_normal((rank, n_right))
    alphas = rng.uniform(-1.0, 10.0, size=(rank, n_harmonics))
    omegas = rng.uniform(1.0, 1000.0, size=(rank, n_harmonics))
    t = np.arange(1, n_steps + 1, dtype=float)
    g = np.stack([(alphas[k][:, None] * np.cos(omegas[k][:, None] * t[None, :] / n_steps)).sum(axis=0) for k in range(rank)])
    loadings = np.einsum("ki,kj->ijk", u, v).reshape(n_left * n_right, rank)
    return LatentPanel(values=loadings @ g)


# ---------------------------------------------------------------------
# corruption
# ---------------------------------------------------------------------

@dataclass(frozen=True)
class NoNoise:
    pass


@dataclass(frozen=True)
class GaussianNoise:
    sigma: float

    def __post_init__(self):
        if self.sigma < 0:
            raise ValueError("sigma must be >= 0")


@dataclass(frozen=True)
class PoissonObservations:
    """Observed values are Poisson draws with the latent value as mean."""


NoiseSpec = NoNoise | GaussianNoise | PoissonObservations


@dataclass(frozen=True)
class CorruptionSpec:
    """Bernoulli(rho) observation mask plus per-cell noise.

    ``variance_spec``, when given, generates a (non-negative) panel of
    per-cell Gaussian variances that overrides any constant sigma.
    """

    rho: float = 1.0
    noise: NoiseSpec = field(default_factory=NoNoise)
    variance_spec: FactorModelSpec | None = None
    seed: int = 0

    def __post_init__(self):
        if not 0.0 < self.rho <= 1.0:
            raise ValueError("rho must lie in (0, 1]")


def corrupt(latent: LatentPanel, spec: CorruptionSpec) -> Panel:
    """Noisy, partially observed panel; unobserved cells store 0."""
    rng = np.random.default_rng(spec.seed)
    shape = latent.values.shape
    mask = rng.random(shape) < spec.rho
    if spec.variance_spec is not None:
        variances = generate_latent(spec.variance_spec).values
        if np.any(variances < 0):
            raise ValueError("variance spec generated negative variances")
        noisy = latent.values + np.sqrt(variances) * rng.standard_normal(shape)
    elif isinstance(spec.noise, GaussianNoise):
        noisy = latent.values + spec.noise.sigma * rng.standard_normal(shape)
    elif isinstance(spec.noise, PoissonObservations):
        if np.any(latent.values < 0):
            raise ValueError("Poisson observations need non-negative latent values")
        noisy = rng.poisson(latent.values).astype(float)
    else:
        noisy = latent.values
    return Panel(values=np.where(mask, noisy, 0.0), mask=mask)
