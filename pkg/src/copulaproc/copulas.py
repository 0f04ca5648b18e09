"""Copula process samplers on a shared time grid.

A copula ensemble is a matrix of paths whose every time-t column is
Uniform[0, 1]; the dependence across columns carries the model.  Five
samplers are provided:

* independence:   columns are independent uniforms
* comonotone:     all columns share one uniform per path (upper bound
                  of the pointwise Frechet-Hoeffding inequality)
* fbm:            Gaussian copula of fractional Brownian motion,
                  covariance (t**2H + s**2H - |t-s|**2H) / 2
* elliptical:     scale mixture S * V with V a unit-variance Gaussian
                  process sharing the fBm correlation, transformed by
                  its own mixture marginal CDF
* clayton:        Archimedean copula with generator (x**-theta - 1)/theta,
                  sampled by gamma frailty

Every path draws from its own (seed, path index) substream, so path i is
reproduced bit for bit regardless of ensemble size or scheduling.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import ndtr

from . import rng
from .errors import InvalidArgumentError, NumericFailureError
from .grid import TimeGrid
from .marginals import LognormalMixing, ScaleMixtureGaussian


@dataclass(frozen=True, eq=False)
class CopulaEnsemble:
    """Immutable bundle of copula paths with their grid and provenance."""

    grid: TimeGrid
    paths: np.ndarray
    seed: int
    model_tag: str
    n_paths: int = field(init=False)

    def __post_init__(self):
        paths = np.asarray(self.paths, dtype=float)
        if paths.ndim != 2 or paths.shape[1] != self.grid.m:
            raise InvalidArgumentError(
                f"paths must have shape (n, {self.grid.m}), got {paths.shape}")
        if paths.shape[0] < 1:
            raise InvalidArgumentError("ensemble needs at least one path")
        if np.isnan(paths).any() or paths.min() < 0.0 or paths.max() > 1.0:
            raise InvalidArgumentError("copula entries must lie in [0, 1]")
        paths.setflags(write=False)
        object.__setattr__(self, "paths", paths)
        object.__setattr__(self, "n_paths", paths.shape[0])


def fbm_covariance(points: np.ndarray, hurst: float) -> np.ndarray:
    """Fractional Brownian covariance matrix on the given times."""
    t = np.asarray(points, dtype=float)
    s, tt = np.meshgrid(t, t, indexing="ij")
    return 0.5 * (s ** (2 * hurst) + tt ** (2 * hurst) - np.abs(s - tt) ** (2 * hurst))


def cholesky_with_jitter(matrix: np.ndarray):
    """Lower Cholesky factor, retrying with escalating diagonal jitter.

    The base jitter is 1e-12 * trace / m, escalated tenfold for up to three
    jittered attempts before giving up.
    """
    matrix = np.asarray(matrix, dtype=float)
    m = matrix.shape[0]
    base = 1e-12 * float(np.trace(matrix)) / m
    jitters = [0.0, base, 10.0 * base, 100.0 * base]
    for jitter in jitters:
        try:
            return np.linalg.cholesky(matrix + jitter * np.eye(m)), jitter
        except np.linalg.LinAlgError:
            continue
    raise NumericFailureError(
        f"Cholesky failed after jitter escalation up to {jitters[-1]:g}")


def _check_common(grid: TimeGrid, n_paths: int, seed: int) -> int:
    if not isinstance(n_paths, (int, np.integer)) or n_paths < 1:
        raise InvalidArgumentError(f"n_paths must be a positive integer, got {n_paths!r}")
    rng._check_seed(seed)
    return int(n_paths)


def _check_hurst(hurst: float) -> float:
    hurst = float(hurst)
    if not 0.0 < hurst < 1.0:
        raise InvalidArgumentError(f"hurst must lie in (0, 1), got {hurst}")
    return hurst


def sample_independence(grid: TimeGrid, n_paths: int, seed: int) -> CopulaEnsemble:
    """All columns independent Uniform[0, 1]."""
    n_paths = _check_common(grid, n_paths, seed)
    paths = rng.uniform_rows(seed, n_paths, grid.m)
    return CopulaEnsemble(grid, paths, int(seed), "independence")


def sample_comonotone(grid: TimeGrid, n_paths: int, seed: int) -> CopulaEnsemble:
    """One uniform per path repeated across all columns."""
    n_paths = _check_common(grid, n_paths, seed)
    u = rng.uniform_rows(seed, n_paths, 1)
    paths = np.repeat(u, grid.m, axis=1)
    return CopulaEnsemble(grid, paths, int(seed), "comonotone")


def sample_fbm_copula(grid: TimeGrid, hurst: float, n_paths: int,
                      seed: int) -> CopulaEnsemble:
    """Copula of fractional Brownian motion observed on the grid.

    Requires grid.a > 0 so that every column has positive variance; the
    Gaussian paths are mapped through their exact marginal CDF with
    standard deviation t**hurst.
    """
    n_paths = _check_common(grid, n_paths, seed)
    hurst = _check_hurst(hurst)
    if grid.a <= 0.0:
        raise InvalidArgumentError(
            f"fbm copula needs grid.a > 0, got a={grid.a}")
    cov = fbm_covariance(grid.points, hurst)
    factor, _ = cholesky_with_jitter(cov)
    z = rng.normal_rows(seed, n_paths, grid.m)
    gaussians = z @ factor.T
    paths = ndtr(gaussians / grid.points ** hurst)
    return CopulaEnsemble(grid, paths, int(seed), f"fbm(hurst={hurst:g})")


def _elliptical_pretransform(grid: TimeGrid, hurst: float, mixing: LognormalMixing,
                             n_paths: int, seed: int):
    """Draw S_i * V_i paths and the matching mixture marginal family.

    V is the unit-variance Gaussian process with the fBm correlation
    R(s, t) = cov(s, t) / (s t)**hurst.  Each path consumes one uniform
    (for S through the mixing quantile) followed by m standard normals.
    """
    n_paths = _check_common(grid, n_paths, seed)
    hurst = _check_hurst(hurst)
    if grid.a <= 0.0:
        raise InvalidArgumentError(
            f"elliptical copula needs grid.a > 0, got a={grid.a}")
    if not (np.isfinite(mixing.mean_inverse) and np.isfinite(mixing.mean_square)):
        raise InvalidArgumentError("mixing must have finite E[1/S] and E[S**2]")
    scale = grid.points ** hurst
    corr = fbm_covariance(grid.points, hurst) / np.outer(scale, scale)
    factor, _ = cholesky_with_jitter(corr)
    m = grid.m
    paths = np.empty((n_paths, m))
    mix_u = np.empty(n_paths)
    for i in range(n_paths):
        gen = rng.path_generator(seed, i)
        mix_u[i] = gen.random()
        paths[i] = factor @ gen.standard_normal(m)
    s = np.asarray(mixing.quantile(np.clip(mix_u, 1e-16, 1.0 - 1e-16)), dtype=float)
    paths *= s[:, None]
    family = ScaleMixtureGaussian(mixing)
    return paths, family


def sample_elliptical_copula(grid: TimeGrid, hurst: float, mixing: LognormalMixing,
                             n_paths: int, seed: int) -> CopulaEnsemble:
    """Copula of the scale mixture S * V (see _elliptical_pretransform)."""
    pre, family = _elliptical_pretransform(grid, hurst, mixing, n_paths, seed)
    paths = family._cdf0(pre)
    return CopulaEnsemble(grid, paths, int(seed),
                          f"elliptical(hurst={float(hurst):g},{mixing.tag})")


def sample_archimedean_clayton(grid: TimeGrid, theta: float, n_paths: int,
                               seed: int) -> CopulaEnsemble:
    """Clayton copula via gamma frailty.

    With M ~ Gamma(1/theta, 1) and E_j iid standard exponential,
    U_j = (1 + E_j / M)**(-1/theta) has the Clayton law whose generator
    is phi(x) = x**-theta - 1: the marginal CDF is the Laplace transform
    (1 + s)**(-1/theta) of M evaluated at phi(u), which returns u.
    """
    n_paths = _check_common(grid, n_paths, seed)
    theta = float(theta)
    if not np.isfinite(theta) or theta <= 0.0:
        raise InvalidArgumentError(f"theta must be positive, got {theta}")
    m = grid.m
    paths = np.empty((n_paths, m))
    for i in range(n_paths):
        gen = rng.path_generator(seed, i)
        frailty = gen.standard_gamma(1.0 / theta)
        while frailty == 0.0:  # guard against underflow for large theta
            frailty = gen.standard_gamma(1.0 / theta)
        exps = gen.standard_exponential(m)
        paths[i] = (1.0 + exps / frailty) ** (-1.0 / theta)
    return CopulaEnsemble(grid, paths, int(seed), f"clayton(theta={theta:g})")


def empirical_copula_cdf(ensemble: CopulaEnsemble, time_indices, point) -> float:
    """Fraction of paths lying at or below ``point`` at the given columns."""
    idx = np.asarray(time_indices, dtype=int)
    pt = np.asarray(point, dtype=float)
    if idx.ndim != 1 or idx.size < 1 or pt.shape != idx.shape:
        raise InvalidArgumentError("time_indices and point must be 1-d of equal length")
    if idx.min() < 0 or idx.max() >= ensemble.grid.m:
        raise InvalidArgumentError(
            f"time index out of range [0, {ensemble.grid.m - 1}]")
    if np.isnan(pt).any() or pt.min() < 0.0 or pt.max() > 1.0:
        raise InvalidArgumentError("point entries must lie in [0, 1]")
    hits = np.all(ensemble.paths[:, idx] <= pt[None, :], axis=1)
    return float(np.mean(hits))


@dataclass(frozen=True)
class CopulaModel:
    """Declarative sampler choice used by config-driven entry points."""

    variant: str
    hurst: float | None = None
    theta: float | None = None
    mixing: LognormalMixing | None = None
    t0: float | None = None

    _VARIANTS = ("independence", "comonotone", "fbm", "elliptical", "clayton")

    def __post_init__(self):
        if self.variant not in self._VARIANTS:
            raise InvalidArgumentError(
                f"unknown copula variant {self.variant!r}; expected one of {self._VARIANTS}")
        if self.variant in ("fbm", "elliptical"):
            if self.hurst is None:
                raise InvalidArgumentError(f"{self.variant} model requires hurst")
            _check_hurst(self.hurst)
        if self.variant == "clayton" and (self.theta is None or self.theta <= 0.0):
            raise InvalidArgumentError("clayton model requires theta > 0")
        if self.t0 is not None and self.t0 <= 0.0:
            raise InvalidArgumentError("t0 must be positive when given")

    def sample(self, grid: TimeGrid, n_paths: int, seed: int) -> CopulaEnsemble:
        if self.t0 is not None and grid.a < self.t0:
            raise InvalidArgumentError(
                f"grid must start at or after t0={self.t0}, got a={grid.a}")
        if self.variant == "independence":
            return sample_independence(grid, n_paths, seed)
        if self.variant == "comonotone":
            return sample_comonotone(grid, n_paths, seed)
        if self.variant == "fbm":
            return sample_fbm_copula(grid, self.hurst, n_paths, seed)
        if self.variant == "elliptical":
            mixing = self.mixing if self.mixing is not None else LognormalMixing()
            return sample_elliptical_copula(grid, self.hurst, mixing, n_paths, seed)
        return sample_archimedean_clayton(grid, self.theta, n_paths, seed)
