import numpy as np
import pytest
from numpy.testing import assert_allclose
from scipy import stats

from copulaproc import (Empirical, ExponentialScale, GaussianScale,
                        InvalidArgumentError, Pareto, ProcessEnsemble,
                        Uniform, check_moment_condition, extract_copula,
                        make_uniform_grid, merge, sample_comonotone,
                        sample_fbm_copula)

GRID = make_uniform_grid(1.0, 2.0, 9)


def test_merge_comonotone_uniform_constant_rows():
    cop = sample_comonotone(GRID, 4, seed=1)
    ens = merge(cop, Uniform())
    assert ens.paths.shape == (4, 9)
    assert np.all(ens.paths == ens.paths[:, :1])
    assert np.array_equal(ens.paths, cop.paths)


def test_merge_applies_quantile_columnwise():
    cop = sample_fbm_copula(GRID, 0.5, 20, seed=5)
    fam = GaussianScale.power_law(0.3)
    ens = merge(cop, fam)
    for j, t in enumerate(GRID.points):
        assert_allclose(ens.paths[:, j], fam.quantile(t, cop.paths[:, j]),
                        rtol=1e-14)
    assert ens.marginal_tag == fam.kind


@pytest.mark.parametrize("family", [
    GaussianScale(1.0),
    GaussianScale.power_law(0.5),
    ExponentialScale(2.0),
    Pareto(1.0, 4.0),
])
def test_extract_merge_roundtrip(family):
    cop = sample_fbm_copula(GRID, 0.5, 500, seed=13)
    ens = merge(cop, family)
    back = extract_copula(ens, family, aux_seed=99)
    assert np.max(np.abs(back.paths - cop.paths)) < 1e-9


def test_extract_continuous_ignores_aux_seed():
    fam = GaussianScale(1.0)
    ens = merge(sample_fbm_copula(GRID, 0.5, 50, seed=2), fam)
    a = extract_copula(ens, fam, aux_seed=1)
    b = extract_copula(ens, fam, aux_seed=2)
    assert np.array_equal(a.paths, b.paths)


def test_extract_atomic_uses_aux_seed():
    # a two-point marginal needs the auxiliary uniforms to spread atoms
    col = np.array([0.0, 0.0, 1.0])
    fam = Empirical(GRID, np.tile(col, (GRID.m, 1)))
    paths = np.tile(col[[0, 2]], (GRID.m, 1)).T.copy()  # 2 paths hitting both atoms
    ens = ProcessEnsemble(GRID, paths, "empirical", "test")
    a = extract_copula(ens, fam, aux_seed=1)
    b = extract_copula(ens, fam, aux_seed=2)
    assert not np.array_equal(a.paths, b.paths)
    assert a.paths.min() >= 0.0 and a.paths.max() <= 1.0
    c = extract_copula(ens, fam, aux_seed=1)
    assert np.array_equal(a.paths, c.paths)


def test_extracted_copula_is_uniform():
    n = 20_000
    fam = Pareto(1.0, 3.0)
    ens = merge(sample_fbm_copula(GRID, 0.5, n, seed=17), fam)
    back = extract_copula(ens, fam, aux_seed=5)
    for j in (0, 4, 8):
        d = stats.kstest(back.paths[:, j], "uniform").statistic
        assert d <= 1.63 / np.sqrt(n)


def test_merged_marginals_follow_family():
    n = 20_000
    fam = ExponentialScale(2.0)
    ens = merge(sample_fbm_copula(GRID, 0.5, n, seed=19), fam)
    for j in (0, 8):
        d = stats.kstest(ens.paths[:, j], "expon", args=(0.0, 2.0)).statistic
        assert d <= 1.63 / np.sqrt(n)


def test_moment_condition_closed_forms():
    rep = check_moment_condition(GaussianScale(1.0), GRID, 2.0)
    assert rep.satisfied
    assert_allclose(rep.integral, 1.0, rtol=1e-5)  # E Z**2 * |T|
    rep = check_moment_condition(Pareto(1.0, 4.0), GRID, 2.0)
    assert rep.satisfied
    assert_allclose(rep.integral, 2.0, rtol=1e-4)  # alpha/(alpha-2) * |T|


def test_moment_condition_divergent():
    rep = check_moment_condition(Pareto(1.0, 2.0), GRID, 2.0)
    assert not rep.satisfied
    assert rep.integral == np.inf
    rep = check_moment_condition(Pareto(1.0, 1.0), GRID, 2.0)
    assert not rep.satisfied


def test_moment_condition_slow_but_convergent():
    rep = check_moment_condition(Pareto(1.0, 2.5), GRID, 2.0)
    assert rep.satisfied
    assert_allclose(rep.integral, 5.0, rtol=5e-3)


def test_merge_shape_mismatch_rejected():
    cop = sample_comonotone(GRID, 4, seed=1)
    other = make_uniform_grid(0.0, 1.0, 9)
    fam = Empirical(other, np.zeros((9, 3)))
    ens = merge(cop, Uniform())
    with pytest.raises(InvalidArgumentError):
        extract_copula(ens, fam, aux_seed=0)
