import numpy as np
import pytest

from pagessa import (
    CorruptionSpec,
    FactorModelSpec,
    Fixed,
    GaussianNoise,
    HarmonicMix,
    HarmonicTerm,
    Panel,
    compare_regimes,
    corrupt,
    generate_latent,
    imp_err,
    impute,
    page_tensor,
    te3_fit,
    tssa_impute,
    vanilla_me_impute,
)


def cp_tensor(shape, rank, seed):
    rng = np.random.default_rng(seed)
    a, b, c = (rng.standard_normal((d, rank)) for d in shape)
    return np.einsum("nk,sk,lk->nsl", a, b, c), (a, b, c)


def full_panel(values) -> Panel:
    values = np.atleast_2d(np.asarray(values, dtype=float))
    return Panel(values=values, mask=np.ones(values.shape, dtype=bool))


def test_exact_rank_two_fit():
    tensor, _ = cp_tensor((6, 10, 8), 2, seed=0)
    model = te3_fit(tensor, rank=2, seed=1)
    assert model.fit_residual < 1e-6


def test_rank_one_factors_recovered_up_to_scale():
    rng = np.random.default_rng(2)
    a, b, c = rng.standard_normal(5), rng.standard_normal(7), rng.standard_normal(6)
    tensor = np.einsum("n,s,l->nsl", a, b, c)
    model = te3_fit(tensor, rank=1, seed=3)
    fa, fb, fc = (f[:, 0] for f in model.factors)
    for est, true in ((fa, a), (fb, b), (fc, c)):
        cos = abs(est @ true) / (np.linalg.norm(est) * np.linalg.norm(true))
        assert cos > 1 - 1e-8


def test_masked_rank_three_recovery():
    for seed in range(5):
        tensor, _ = cp_tensor((8, 20, 15), 3, seed=800 + seed)
        rng = np.random.default_rng(seed)
        mask = rng.random(tensor.shape) < 0.6
        model = te3_fit(np.where(mask, tensor, 0.0), rank=3, mask=mask, seed=seed)
        recon = model.reconstruct()
        rel = np.linalg.norm((recon - tensor)[~mask]) / np.linalg.norm(tensor[~mask])
        assert rel < 0.1


def test_objective_non_increasing():
    tensor, _ = cp_tensor((6, 12, 9), 3, seed=4)
    noisy = tensor + 0.3 * np.random.default_rng(5).standard_normal(tensor.shape)
    model = te3_fit(noisy, rank=2, restarts=1, seed=6)
    hist = np.asarray(model.objective_history)
    assert np.all(hist[1:] <= hist[:-1] * (1 + 1e-9) + 1e-12)


def test_scaling_indeterminacy():
    tensor, _ = cp_tensor((5, 6, 7), 2, seed=7)
    model = te3_fit(tensor, rank=2, seed=8)
    a, b, c = (f.copy() for f in model.factors)
    a[:, 0] *= 3.7
    b[:, 0] /= 3.7
    rescaled = np.einsum("nk,sk,lk->nsl", a, b, c)
    assert np.max(np.abs(rescaled - model.reconstruct())) < 1e-10


def test_non_convergence_flagged():
    tensor, _ = cp_tensor((6, 8, 7), 3, seed=9)
    noisy = tensor + 0.5 * np.random.default_rng(10).standard_normal(tensor.shape)
    model = te3_fit(noisy, rank=2, max_iters=2, tol=1e-16, restarts=1, seed=11)
    assert not model.converged
    assert model.n_sweeps == 2


def test_tensor_rank_bound_oracle():
    # explicit CP witness: loadings x per-factor Page factors give rank R*G
    rng = np.random.default_rng(12)
    t = np.arange(1, 241)
    w = np.vstack([np.cos(2 * np.pi * 0.05 * t), np.cos(2 * np.pi * 0.11 * t + 0.4)])
    panel = full_panel(rng.standard_normal((5, 2)) @ w)
    tensor = page_tensor(panel, 12)
    model = te3_fit(tensor, rank=4, seed=13)
    assert model.fit_residual < 1e-8  # CP-rank <= R*G = 4


def test_tssa_impute_single_series_matches_matrix_route():
    x = np.cos(2 * np.pi * 0.05 * np.arange(1, 401))
    panel = full_panel(x)
    tensor_est = tssa_impute(panel, rank=2, seed=3).estimates
    matrix_est = impute(panel, policy=Fixed(2)).estimates
    assert np.max(np.abs(tensor_est - x)) < 1e-4
    assert np.max(np.abs(tensor_est - matrix_est)) < 1e-4


def test_tssa_impute_factor_panel_exact():
    rng = np.random.default_rng(14)
    t = np.arange(1, 257)
    w = np.vstack([np.cos(2 * np.pi * 0.045 * t), np.cos(2 * np.pi * 0.12 * t + 0.7)])
    panel = full_panel(rng.standard_normal((4, 2)) @ w)
    result = tssa_impute(panel, rank=4, seed=15)
    assert np.max(np.abs(result.estimates - panel.values)) < 1e-6
    assert result.L == 16  # default sqrt(T)


def test_me_exact_on_noiseless_low_rank():
    rng = np.random.default_rng(16)
    values = np.outer(rng.standard_normal(6), rng.standard_normal(50))
    panel = full_panel(values)
    result = vanilla_me_impute(panel, Fixed(1))
    assert np.max(np.abs(result.estimates - values)) < 1e-8


def test_me_returns_input_at_full_rank():
    values = np.eye(5)
    panel = full_panel(values)
    result = vanilla_me_impute(panel, Fixed(5))
    assert np.max(np.abs(result.estimates - values)) < 1e-10


def test_me_much_worse_than_mssa_on_temporal_structure():
    spec = FactorModelSpec(
        n_series=2,
        n_steps=2000,
        rank=1,
        temporal=(HarmonicMix(terms=(HarmonicTerm(frequency=0.0123),)),),
        seed=6,
    )
    latent = generate_latent(spec)
    me_errs, mssa_errs = [], []
    for seed in range(5):
        panel = corrupt(latent, CorruptionSpec(rho=0.8, noise=GaussianNoise(0.4), seed=900 + seed))
        me_errs.append(imp_err(latent, vanilla_me_impute(panel, Fixed(1))))
        mssa_errs.append(imp_err(latent, impute(panel, policy=Fixed(2))))
    assert np.mean(me_errs) > 3.0 * np.mean(mssa_errs)


def test_compare_regimes_emits_all_methods():
    spec = FactorModelSpec(
        n_series=3,
        n_steps=512,
        rank=1,
        temporal=(HarmonicMix(terms=(HarmonicTerm(frequency=0.05),)),),
        seed=1,
    )
    rows = compare_regimes(spec, CorruptionSpec(rho=0.9, noise=GaussianNoise(0.2)), seeds=[0, 1])
    assert {r["method"] for r in rows} == {"mssa", "tssa", "me"}
    assert len(rows) == 6
    assert all(r["imp_err"] >= 0 for r in rows)


def test_te3_rejects_bad_rank():
    tensor, _ = cp_tensor((3, 4, 5), 1, seed=17)
    with pytest.raises(ValueError):
        te3_fit(tensor, rank=0)
