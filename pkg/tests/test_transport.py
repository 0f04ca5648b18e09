import numpy as np
import pytest
from numpy.testing import assert_allclose

from copulaproc import (ExponentialScale, GaussianScale, InvalidArgumentError,
                        Pareto, Uniform, attach_mc_check,
                        basis_path_consistency_check, make_uniform_grid,
                        mc_coupling_cost, merge, optimal_coupling,
                        pathspace_wasserstein_same_copula, sample_comonotone,
                        sample_fbm_copula, wasserstein1d_empirical,
                        wasserstein1d_quantile, weighted_cosine_basis)

GRID = make_uniform_grid(1.0, 2.0, 9)


def test_w2_unit_mean_shift():
    a = GaussianScale(1.0)
    b = GaussianScale(1.0, mean=1.0)
    w = wasserstein1d_quantile(a, b, t=1.0, p=2)
    assert_allclose(w, 1.0, rtol=0, atol=1e-6)


def test_w2_gaussian_scale_pair():
    # W_2(N(0, s1^2), N(0, s2^2)) = |s1 - s2|
    a = GaussianScale(1.0)
    b = GaussianScale(2.0)
    w = wasserstein1d_quantile(a, b, t=1.0, p=2)
    assert_allclose(w, 1.0, rtol=1e-6)


def test_w1_exponential_pair():
    # quantiles scale linearly in theta, so W_1 = |t1 - t2| * E[Exp(1)]
    a = ExponentialScale(1.0)
    b = ExponentialScale(3.0)
    w = wasserstein1d_quantile(a, b, t=1.0, p=1)
    assert_allclose(w, 2.0, rtol=1e-5)


def test_identical_families_zero():
    fam = Pareto(1.0, 4.0)
    assert wasserstein1d_quantile(fam, fam, t=1.0, p=2) == 0.0
    rep = pathspace_wasserstein_same_copula(fam, fam, GRID, p=2)
    assert rep.integrated == 0.0
    assert np.all(rep.per_t == 0.0)


def test_empirical_estimator_matches_quantile_form():
    rng = np.random.default_rng(3)
    n = 100_000
    xs = rng.standard_normal(n)
    ys = rng.standard_normal(n) + 1.0
    w = wasserstein1d_empirical(xs, ys, p=2)
    assert abs(w - 1.0) < 0.03


def test_empirical_estimator_permutation_invariant():
    rng = np.random.default_rng(4)
    xs, ys = rng.standard_normal(50), rng.standard_normal(50)
    w1 = wasserstein1d_empirical(xs, ys, p=1)
    w2 = wasserstein1d_empirical(np.sort(xs), ys[::-1], p=1)
    assert_allclose(w1, w2, rtol=1e-14)


def test_metric_symmetry_and_triangle():
    a = GaussianScale(1.0)
    b = GaussianScale(2.0, mean=0.5)
    c = Pareto(1.0, 4.0)
    for p in (1, 2):
        d_ab = pathspace_wasserstein_same_copula(a, b, GRID, p).integrated
        d_ba = pathspace_wasserstein_same_copula(b, a, GRID, p).integrated
        assert d_ab == d_ba
        d_ac = pathspace_wasserstein_same_copula(a, c, GRID, p).integrated
        d_bc = pathspace_wasserstein_same_copula(b, c, GRID, p).integrated
        assert d_ac <= d_ab + d_bc + 2e-6 * (d_ab + d_bc)


def test_pathspace_constant_pair():
    a = GaussianScale(1.0)
    b = GaussianScale(2.0)
    rep = pathspace_wasserstein_same_copula(a, b, GRID, p=2)
    assert_allclose(rep.per_t, np.ones(GRID.m), rtol=1e-6)
    assert_allclose(rep.integrated, 1.0, rtol=1e-6)
    assert rep.mc_coupling_value is None and rep.gap is None


def test_optimal_coupling_attains_wasserstein():
    # the monotone coupling realizes the distance within MC error
    n = 40_000
    cop = sample_comonotone(GRID, n, seed=7)
    a = GaussianScale(1.0)
    b = GaussianScale(2.0)
    ex, ey = optimal_coupling(cop, a, b)
    value, power_mean, power_se = mc_coupling_cost(ex, ey, p=2)
    rep = pathspace_wasserstein_same_copula(a, b, GRID, p=2)
    assert abs(power_mean - rep.integrated**2) <= 3.0 * power_se


def test_nonoptimal_coupling_costs_more():
    # fBm coupling is not monotone across paths, so its cost exceeds W_p
    n = 40_000
    cop = sample_fbm_copula(GRID, 0.5, n, seed=7)
    a = GaussianScale(1.0)
    b = GaussianScale(1.0, mean=1.0)
    indep_x = merge(sample_fbm_copula(GRID, 0.5, n, seed=8), a)
    indep_y = merge(cop, b)
    value, power_mean, power_se = mc_coupling_cost(indep_x, indep_y, p=2)
    rep = pathspace_wasserstein_same_copula(a, b, GRID, p=2)
    assert power_mean > rep.integrated**2 + 3.0 * power_se


def test_attach_mc_check_fills_fields():
    n = 20_000
    cop = sample_comonotone(GRID, n, seed=11)
    a = ExponentialScale(1.0)
    b = Pareto(1.0, 4.0)
    rep = pathspace_wasserstein_same_copula(a, b, GRID, p=1)
    rep2 = attach_mc_check(rep, merge(cop, a), merge(cop, b))
    assert rep2.mc_coupling_value is not None
    assert abs(rep2.gap) < 0.05
    assert rep2.integrated == rep.integrated


def test_weighted_cosine_basis_orthonormal():
    basis = weighted_cosine_basis(GRID, 6)
    gram = basis.T @ (GRID.weights[:, None] * basis)
    assert_allclose(gram, np.eye(6), atol=1e-10)
    # leading function is constant
    assert np.ptp(basis[:, 0]) < 1e-12


def test_basis_path_consistency():
    n = 5_000
    cop = sample_fbm_copula(GRID, 0.5, n, seed=21)
    ex = merge(cop, GaussianScale(1.0))
    ey = merge(cop, GaussianScale(2.0))
    rep = basis_path_consistency_check(ex, ey, n_basis=GRID.m)
    # with a complete basis both sides agree up to quadrature error
    assert rep.path_side > 0.0
    assert abs(rep.gap) <= 0.02 * rep.path_side
    partial = basis_path_consistency_check(ex, ey, n_basis=3)
    assert partial.basis_side <= rep.path_side + 1e-12


def test_p_validation():
    fam = GaussianScale(1.0)
    with pytest.raises(InvalidArgumentError):
        wasserstein1d_quantile(fam, fam, t=1.0, p=5)
    with pytest.raises(InvalidArgumentError):
        wasserstein1d_quantile(fam, fam, t=1.0, p=0)
    with pytest.raises(InvalidArgumentError):
        wasserstein1d_empirical(np.ones(3), np.ones(4), p=1)
