import numpy as np
import pytest

from pagessa import (
    Constant,
    CorruptionSpec,
    FactorModelSpec,
    GaussianNoise,
    HarmonicMix,
    HarmonicTerm,
    LinearRecurrence,
    Polynomial,
    PoissonObservations,
    SmoothPeriodic,
    calculus_check,
    corrupt,
    generate_latent,
    hankel_rank_oracle,
    mixture_of_harmonics_panel,
    rank_bound,
    signal_values,
)
from pagessa.synth import SMOOTH_FUNCTIONS, fourier_truncation_error

HARMONIC = HarmonicMix(terms=(HarmonicTerm(frequency=0.07),))
HARMONIC2 = HarmonicMix(terms=(HarmonicTerm(frequency=0.11, phase=0.5),))


def test_generate_latent_rank_one_proportional_series():
    spec = FactorModelSpec(n_series=4, n_steps=50, rank=1, temporal=(Constant(2.0),), seed=1)
    latent = generate_latent(spec)
    ratios = latent.values[:, 0] / latent.values[0, 0]
    assert np.allclose(latent.values, np.outer(ratios, latent.values[0]))


def test_mixture_recipe_dimensions():
    latent = mixture_of_harmonics_panel(n_left=5, n_right=10, rank=4, n_steps=15000, seed=0)
    assert latent.values.shape == (50, 15000)
    s = np.linalg.svd(latent.values, compute_uv=False)
    assert np.sum(s > 1e-8 * s[0]) <= 4  # N x T rank bounded by the mixing rank


def test_generate_latent_rank_bounded():
    spec = FactorModelSpec(n_series=8, n_steps=120, rank=3, temporal=(HARMONIC, HARMONIC2, Constant(1.0)), seed=2)
    latent = generate_latent(spec)
    s = np.linalg.svd(latent.values, compute_uv=False)
    assert np.sum(s > 1e-8 * s[0]) <= 3


def test_generate_latent_deterministic():
    spec = FactorModelSpec(n_series=5, n_steps=64, rank=1, temporal=(HARMONIC,), seed=9)
    assert np.array_equal(generate_latent(spec).values, generate_latent(spec).values)


def test_corrupt_identity_when_clean():
    latent = generate_latent(FactorModelSpec(n_series=3, n_steps=40, rank=1, temporal=(HARMONIC,), seed=3))
    panel = corrupt(latent, CorruptionSpec(rho=1.0, seed=0))
    assert panel.mask.all()
    assert np.array_equal(panel.values, latent.values)


def test_corrupt_mask_density_concentrates():
    latent = generate_latent(FactorModelSpec(n_series=20, n_steps=1000, rank=1, temporal=(HARMONIC,), seed=4))
    panel = corrupt(latent, CorruptionSpec(rho=0.5, seed=5))
    assert abs(panel.mask.mean() - 0.5) < 0.02


def test_corrupt_gaussian_noise_scale():
    latent = generate_latent(FactorModelSpec(n_series=20, n_steps=6000, rank=1, temporal=(Constant(1.0),), seed=6))
    panel = corrupt(latent, CorruptionSpec(rho=1.0, noise=GaussianNoise(0.1), seed=7))
    resid = panel.values - latent.values
    assert abs(resid.std() - 0.1) / 0.1 < 0.05


def test_corrupt_poisson_requires_nonnegative():
    from pagessa import LatentPanel

    latent = LatentPanel(values=[[1.0, -0.5, 2.0]])
    with pytest.raises(ValueError, match="non-negative"):
        corrupt(latent, CorruptionSpec(noise=PoissonObservations(), seed=0))


def test_recurrence_satisfied_exactly():
    spec = LinearRecurrence(coefficients=(1.2, -0.36), seed_values=(1.0, 0.7))
    x = signal_values(spec, 200)
    for t in range(2, 200):
        assert abs(x[t] - (1.2 * x[t - 1] - 0.36 * x[t - 2])) < 1e-10


def test_rank_oracle_single_harmonic():
    assert hankel_rank_oracle(HARMONIC, 60) == 2
    assert rank_bound(HARMONIC) == 2  # one term, poly degree 0: 1 * 1 * 2


def test_rank_oracle_quadratic():
    spec = Polynomial(coefficients=(1.0, -0.5, 0.25))
    assert hankel_rank_oracle(spec, 40) == 3
    assert rank_bound(spec) == 3


def test_rank_oracle_constant():
    assert hankel_rank_oracle(Constant(4.0), 30) == 1


def test_calculus_sum_of_harmonics():
    res = calculus_check(HARMONIC, HARMONIC2, 120)
    assert res.rank_sum == 4 and res.bound_sum == 4
    assert res.rank_prod <= res.bound_prod == 4


def test_calculus_multiplicative_identity():
    res = calculus_check(HARMONIC, Constant(1.0), 120)
    assert res.rank_prod == hankel_rank_oracle(HARMONIC, 120)


def test_calculus_mixed_families():
    res = calculus_check(Polynomial(coefficients=(0.0, 1.0)), HARMONIC, 120)
    assert res.rank_sum <= res.bound_sum and res.rank_prod <= res.bound_prod
    res = calculus_check(LinearRecurrence(coefficients=(0.9,), seed_values=(1.0,)), HARMONIC2, 120)
    assert res.rank_sum <= res.bound_sum and res.rank_prod <= res.bound_prod


def test_calculus_rejects_unbounded_specs():
    with pytest.raises(ValueError):
        calculus_check(SmoothPeriodic(period=10.0), HARMONIC, 60)


def test_two_term_mix_bound():
    fat = HarmonicMix(terms=(HarmonicTerm(frequency=0.07), HarmonicTerm(frequency=0.11)))
    assert rank_bound(fat) == 4
    assert hankel_rank_oracle(fat, 80) <= 4


def test_smooth_periodic_fourier_decay():
    # |sin|^3 is C^2: sup error slope vs order must be at most -(2 - 0.5) + 0.3
    fn = SMOOTH_FUNCTIONS["abs_sin_cubed"]
    orders = np.array([4, 8, 16, 32, 64])
    errs = np.array([fourier_truncation_error(fn, g) for g in orders])
    slope = np.polyfit(np.log(orders), np.log(errs), 1)[0]
    assert slope <= -1.2


def test_smooth_periodic_sampling():
    spec = SmoothPeriodic(period=16.0, fn="smooth_bump")
    x = signal_values(spec, 64)
    assert np.allclose(x[:16], x[16:32])
    with pytest.raises(ValueError, match="unknown smooth function"):
        signal_values(SmoothPeriodic(period=4.0, fn="nope"), 8)
