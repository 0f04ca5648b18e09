"""Time-indexed marginal families.

A family assigns to each time t a one-dimensional distribution through its
CDF, generalized inverse (quantile), and, when one exists, density.  The
quantile is the left-continuous generalized inverse

    Q_t(u) = inf { x : F_t(x) >= u },

so ``quantile(t, u) <= x`` iff ``u <= cdf(t, x)`` including at atoms.  The
distributional transform F_t(x-) + v * (F_t(x) - F_t(x-)) turns samples of
any law, atomic or not, into exact uniforms when v is an independent
uniform.

Families with unbounded support clamp quantile queries at u in {0, 1} to
the configurable tail levels ``tail_eps`` and ``1 - tail_eps``; finite
support endpoints are returned exactly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr, ndtri, roots_legendre

from .errors import (InvalidArgumentError, NumericFailureError,
                     UnsupportedOperationError)
from .grid import TimeGrid, grid_from_points

_DEFAULT_TAIL_EPS = 1e-12
_SQRT_2PI = float(np.sqrt(2.0 * np.pi))


def _as_time_fn(value, name: str):
    """Lift a constant to a function of t; pass callables through."""
    if callable(value):
        return value
    value = float(value)
    if not np.isfinite(value):
        raise InvalidArgumentError(f"{name} must be finite, got {value}")
    return lambda t: value


def _check_unit(values, name: str) -> np.ndarray:
    arr = np.asarray(values, dtype=float)
    if arr.size and (np.isnan(arr).any() or arr.min() < 0.0 or arr.max() > 1.0):
        raise InvalidArgumentError(f"{name} must lie in [0, 1]")
    return arr


def _match(template, arr: np.ndarray):
    """Return a scalar when the query was scalar, else the array."""
    if np.isscalar(template) or (isinstance(template, np.ndarray) and template.ndim == 0):
        return float(arr.reshape(-1)[0])
    return arr


class MarginalFamily:
    """Base class; concrete families implement the `_*` hooks."""

    kind: str = "abstract"
    has_density: bool = False
    is_continuous: bool = False

    def __init__(self, tail_eps: float = _DEFAULT_TAIL_EPS):
        if not 0.0 < tail_eps < 0.5:
            raise InvalidArgumentError(f"tail_eps must lie in (0, 0.5), got {tail_eps}")
        self.tail_eps = float(tail_eps)

    # ----- hooks ---------------------------------------------------------
    def _cdf(self, t: float, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def _cdf_left(self, t: float, x: np.ndarray) -> np.ndarray:
        # continuous families have no atoms
        return self._cdf(t, x)

    def _quantile(self, t: float, u: np.ndarray, cu: np.ndarray) -> np.ndarray:
        """Quantile given u and its complement; called with u in (0, 1)
        except where a finite support endpoint makes the limit exact."""
        raise NotImplementedError

    def _pdf(self, t: float, x: np.ndarray) -> np.ndarray:
        raise UnsupportedOperationError(f"{self.kind} family has no density")

    def support(self, t: float):
        """(lower, upper) endpoints of the time-t support; +-inf if unbounded."""
        raise NotImplementedError

    # ----- public surface ------------------------------------------------
    def cdf(self, t, x):
        arr = np.asarray(x, dtype=float)
        if np.isnan(arr).any():
            raise InvalidArgumentError("cdf argument contains NaN")
        return _match(x, self._cdf(float(t), np.atleast_1d(arr)))

    def cdf_left(self, t, x):
        """Left limit F_t(x-)."""
        arr = np.asarray(x, dtype=float)
        if np.isnan(arr).any():
            raise InvalidArgumentError("cdf argument contains NaN")
        return _match(x, self._cdf_left(float(t), np.atleast_1d(arr)))

    def quantile(self, t, u):
        arr = np.atleast_1d(_check_unit(u, "u"))
        t = float(t)
        lo, hi = self.support(t)
        uq = arr.copy()
        cq = 1.0 - arr
        if np.isinf(lo):
            at0 = uq == 0.0
            uq[at0] = self.tail_eps
            cq[at0] = 1.0 - self.tail_eps
        if np.isinf(hi):
            at1 = uq == 1.0
            uq[at1] = 1.0 - self.tail_eps
            cq[at1] = self.tail_eps
        return _match(u, self._quantile(t, uq, cq))

    def quantile_tail(self, t, u, cu):
        """Quantile with caller-supplied complement, for deep-tail quadrature.

        Both arrays must already lie strictly inside (0, 1); no clamping is
        applied.  cu may resolve tail locations far below float spacing
        around 1.
        """
        u = np.asarray(u, dtype=float)
        cu = np.asarray(cu, dtype=float)
        return self._quantile(float(t), u, cu)

    def pdf(self, t, x):
        arr = np.asarray(x, dtype=float)
        if np.isnan(arr).any():
            raise InvalidArgumentError("pdf argument contains NaN")
        return _match(x, self._pdf(float(t), np.atleast_1d(arr)))

    def distributional_transform(self, t, x, v):
        """F_t(x-) + v * (F_t(x) - F_t(x-)); exact uniformizer at atoms."""
        varr = _check_unit(v, "v")
        xarr = np.asarray(x, dtype=float)
        if xarr.shape != varr.shape:
            raise InvalidArgumentError("x and v must have matching shapes")
        left = self._cdf_left(float(t), np.atleast_1d(xarr))
        right = self._cdf(float(t), np.atleast_1d(xarr))
        out = left + np.atleast_1d(varr) * (right - left)
        return _match(x, out)

    def density_sup_bound(self, grid: TimeGrid):
        """Upper bound for sup_{t in grid, x} pdf, or None if unavailable."""
        return None


class GaussianScale(MarginalFamily):
    """Centered-by-default Gaussian with time-varying scale.

    Parameters
    ----------
    sigma : float or callable
        Standard deviation sigma_t > 0 (sigma_t = 0 degenerates to a point
        mass at the mean).  ``power_law(H)`` gives the preset t**H.
    mean : float or callable, optional
        Location mu_t, default 0.
    """

    kind = "gaussian_scale"
    has_density = True
    is_continuous = True

    def __init__(self, sigma=1.0, mean=0.0, tail_eps: float = _DEFAULT_TAIL_EPS):
        super().__init__(tail_eps)
        self._sigma_fn = _as_time_fn(sigma, "sigma")
        self._mean_fn = _as_time_fn(mean, "mean")

    @classmethod
    def power_law(cls, hurst: float, tail_eps: float = _DEFAULT_TAIL_EPS):
        """sigma_t = t**hurst preset."""
        h = float(hurst)
        return cls(sigma=lambda t: t ** h, tail_eps=tail_eps)

    def _sigma(self, t: float) -> float:
        s = float(self._sigma_fn(t))
        if not np.isfinite(s) or s < 0.0:
            raise InvalidArgumentError(f"sigma({t}) = {s} must be finite and >= 0")
        return s

    def _cdf(self, t, x):
        s = self._sigma(t)
        mu = float(self._mean_fn(t))
        if s == 0.0:
            return (x >= mu).astype(float)
        return ndtr((x - mu) / s)

    def _quantile(self, t, u, cu):
        s = self._sigma(t)
        mu = float(self._mean_fn(t))
        if s == 0.0:
            return np.full_like(u, mu)
        # complement form keeps the upper tail accurate
        z = np.where(u <= 0.5, ndtri(np.minimum(u, 0.5)), -ndtri(np.minimum(cu, 0.5)))
        return mu + s * z

    def _pdf(self, t, x):
        s = self._sigma(t)
        if s == 0.0:
            raise UnsupportedOperationError(f"degenerate gaussian at t={t} has no density")
        mu = float(self._mean_fn(t))
        z = (x - mu) / s
        return np.exp(-0.5 * z * z) / (_SQRT_2PI * s)

    def support(self, t):
        if self._sigma(float(t)) == 0.0:
            mu = float(self._mean_fn(float(t)))
            return mu, mu
        return -np.inf, np.inf

    def density_sup_bound(self, grid):
        sig = np.array([self._sigma(t) for t in grid.points])
        if sig.min() == 0.0:
            return None
        return float(1.0 / (_SQRT_2PI * sig.min()))


class ExponentialScale(MarginalFamily):
    """Exponential law with time-varying scale theta_t, supported on (0, inf).

    F_t(x) = 1 - exp(-x / theta_t) for x > 0.  ``power_law(H)`` gives the
    preset theta_t = t**H.
    """

    kind = "exponential_scale"
    has_density = True
    is_continuous = True

    def __init__(self, scale=1.0, tail_eps: float = _DEFAULT_TAIL_EPS):
        super().__init__(tail_eps)
        self._scale_fn = _as_time_fn(scale, "scale")

    @classmethod
    def power_law(cls, hurst: float, tail_eps: float = _DEFAULT_TAIL_EPS):
        h = float(hurst)
        return cls(scale=lambda t: t ** h, tail_eps=tail_eps)

    def _theta(self, t: float) -> float:
        s = float(self._scale_fn(t))
        if not np.isfinite(s) or s < 0.0:
            raise InvalidArgumentError(f"scale({t}) = {s} must be finite and >= 0")
        return s

    def _cdf(self, t, x):
        th = self._theta(t)
        if th == 0.0:
            return (x >= 0.0).astype(float)
        return np.where(x > 0.0, -np.expm1(-np.maximum(x, 0.0) / th), 0.0)

    def _quantile(self, t, u, cu):
        th = self._theta(t)
        if th == 0.0:
            return np.zeros_like(u)
        return -th * np.log(np.maximum(cu, 1e-320))

    def _pdf(self, t, x):
        th = self._theta(t)
        if th == 0.0:
            raise UnsupportedOperationError(f"degenerate exponential at t={t} has no density")
        return np.where(x >= 0.0, np.exp(-np.maximum(x, 0.0) / th) / th, 0.0)

    def support(self, t):
        return 0.0, (np.inf if self._theta(float(t)) > 0.0 else 0.0)

    def density_sup_bound(self, grid):
        th = np.array([self._theta(t) for t in grid.points])
        if th.min() == 0.0:
            return None
        return float(1.0 / th.min())


class Pareto(MarginalFamily):
    """Pareto law on [x_min, inf) with time-varying tail index alpha_t.

    F_t(x) = 1 - (x / x_min)**(-alpha_t) for x >= x_min.
    """

    kind = "pareto"
    has_density = True
    is_continuous = True

    def __init__(self, x_min: float, alpha, tail_eps: float = _DEFAULT_TAIL_EPS):
        super().__init__(tail_eps)
        self.x_min = float(x_min)
        if not np.isfinite(self.x_min) or self.x_min <= 0.0:
            raise InvalidArgumentError(f"x_min must be positive, got {x_min}")
        self._alpha_fn = _as_time_fn(alpha, "alpha")

    def _alpha(self, t: float) -> float:
        a = float(self._alpha_fn(t))
        if not np.isfinite(a) or a <= 0.0:
            raise InvalidArgumentError(f"alpha({t}) = {a} must be positive")
        return a

    def _cdf(self, t, x):
        a = self._alpha(t)
        ratio = np.maximum(x, self.x_min) / self.x_min
        return np.where(x >= self.x_min, 1.0 - ratio ** (-a), 0.0)

    def _quantile(self, t, u, cu):
        a = self._alpha(t)
        with np.errstate(divide="ignore"):
            return self.x_min * np.maximum(cu, 1e-320) ** (-1.0 / a)

    def _pdf(self, t, x):
        a = self._alpha(t)
        ratio = np.maximum(x, self.x_min) / self.x_min
        return np.where(x >= self.x_min, a / self.x_min * ratio ** (-a - 1.0), 0.0)

    def support(self, t):
        return self.x_min, np.inf

    def density_sup_bound(self, grid):
        alphas = np.array([self._alpha(t) for t in grid.points])
        return float(alphas.max() / self.x_min)


class Uniform(MarginalFamily):
    """Uniform law on [lo, hi]; on [0, 1] the quantile is the exact identity."""

    kind = "uniform"
    has_density = True
    is_continuous = True

    def __init__(self, lo: float = 0.0, hi: float = 1.0,
                 tail_eps: float = _DEFAULT_TAIL_EPS):
        super().__init__(tail_eps)
        self.lo, self.hi = float(lo), float(hi)
        if not (np.isfinite(self.lo) and np.isfinite(self.hi) and self.hi > self.lo):
            raise InvalidArgumentError(f"need hi > lo, got lo={lo}, hi={hi}")

    def _cdf(self, t, x):
        return np.clip((x - self.lo) / (self.hi - self.lo), 0.0, 1.0)

    def _quantile(self, t, u, cu):
        return self.lo + (self.hi - self.lo) * u

    def _pdf(self, t, x):
        inside = (x >= self.lo) & (x <= self.hi)
        return np.where(inside, 1.0 / (self.hi - self.lo), 0.0)

    def support(self, t):
        return self.lo, self.hi

    def density_sup_bound(self, grid):
        return 1.0 / (self.hi - self.lo)


@dataclass(frozen=True)
class LognormalMixing:
    """Lognormal mixing scale: ln S ~ N(mu, sigma**2); sigma = 0 degenerates.

    Both required moments are finite for every parameter choice:
    E[1/S] = exp(-mu + sigma**2 / 2) and E[S**2] = exp(2 mu + 2 sigma**2).
    """

    mu: float = 0.0
    sigma: float = 0.5

    def __post_init__(self):
        if not (np.isfinite(self.mu) and np.isfinite(self.sigma)) or self.sigma < 0.0:
            raise InvalidArgumentError(
                f"need finite mu and sigma >= 0, got mu={self.mu}, sigma={self.sigma}")

    def quantile(self, u):
        u = np.asarray(u, dtype=float)
        if self.sigma == 0.0:
            return np.full_like(u, np.exp(self.mu))
        return np.exp(self.mu + self.sigma * ndtri(u))

    @property
    def mean_inverse(self) -> float:
        return float(np.exp(-self.mu + 0.5 * self.sigma ** 2))

    @property
    def mean_square(self) -> float:
        return float(np.exp(2.0 * self.mu + 2.0 * self.sigma ** 2))

    @property
    def tag(self) -> str:
        return f"lognormal(mu={self.mu:g},sigma={self.sigma:g})"


class ScaleMixtureGaussian(MarginalFamily):
    """Marginal of S * Z with Z standard normal and S an independent scale.

    The CDF is the mixture integral int Phi(z / s) dF_S(s), evaluated with
    fixed Gauss-Legendre nodes over the mixing quantile function so every
    call is deterministic.  The quantile inverts the mixture CDF by a
    table-seeded Newton iteration.  An optional per-time scale c_t gives
    the law of c_t * S * Z.
    """

    kind = "scale_mixture_gaussian"
    has_density = True
    is_continuous = True

    def __init__(self, mixing: LognormalMixing, scale=1.0, n_quad: int = 64,
                 tail_eps: float = _DEFAULT_TAIL_EPS):
        super().__init__(tail_eps)
        if n_quad < 2:
            raise InvalidArgumentError(f"n_quad must be >= 2, got {n_quad}")
        if not (np.isfinite(mixing.mean_inverse) and np.isfinite(mixing.mean_square)):
            raise InvalidArgumentError(
                "mixing must have finite E[1/S] and E[S**2]")
        self.mixing = mixing
        self.n_quad = int(n_quad)
        self._scale_fn = _as_time_fn(scale, "scale")
        nodes, weights = roots_legendre(self.n_quad)
        self._mix_u = 0.5 * (nodes + 1.0)
        self._mix_w = 0.5 * weights
        self._mix_s = np.asarray(mixing.quantile(self._mix_u), dtype=float)
        if np.any(self._mix_s <= 0.0) or not np.isfinite(self._mix_s).all():
            raise InvalidArgumentError("mixing quantile must be positive and finite")
        self._table = None
        self._q0_memo = {}

    def _scale(self, t: float) -> float:
        c = float(self._scale_fn(t))
        if not np.isfinite(c) or c <= 0.0:
            raise InvalidArgumentError(f"scale({t}) = {c} must be positive")
        return c

    # ----- unit-scale mixture functions ---------------------------------
    def _f0_block(self, z: np.ndarray, func) -> np.ndarray:
        out = np.empty_like(z)
        step = 65536
        for start in range(0, z.size, step):
            block = z[start:start + step, None] / self._mix_s[None, :]
            out[start:start + step] = func(block) @ self._mix_w
        return out

    def _cdf0(self, z: np.ndarray) -> np.ndarray:
        return self._f0_block(np.asarray(z, dtype=float).ravel(), ndtr).reshape(np.shape(z))

    def _sf0(self, z: np.ndarray) -> np.ndarray:
        """Survival function 1 - F0 without cancellation."""
        return self._cdf0(-np.asarray(z, dtype=float))

    def _pdf0(self, z: np.ndarray) -> np.ndarray:
        z = np.asarray(z, dtype=float).ravel()
        out = np.empty_like(z)
        step = 65536
        for start in range(0, z.size, step):
            block = z[start:start + step, None] / self._mix_s[None, :]
            dens = np.exp(-0.5 * block * block) / (_SQRT_2PI * self._mix_s[None, :])
            out[start:start + step] = dens @ self._mix_w
        return out.reshape(np.shape(z))

    def _quantile_table(self):
        if self._table is None:
            z_max = float(self._mix_s.max()) * abs(ndtri(1e-14)) * 1.05
            zs = np.linspace(-z_max, z_max, 16385)
            self._table = (zs, self._cdf0(zs))
        return self._table

    def _quantile0(self, u: np.ndarray, cu: np.ndarray) -> np.ndarray:
        # Quadrature drivers re-invert the same node arrays at every grid
        # time; keep the last result per array size so repeats are free.
        u = np.asarray(u, dtype=float)
        cu = np.asarray(cu, dtype=float)
        memoize = u.ndim == 1 and u.size >= 2048
        if memoize:
            hit = self._q0_memo.get(u.size)
            if (hit is not None and np.array_equal(hit[0], u)
                    and np.array_equal(hit[1], cu)):
                return hit[2].copy()
        zs, Fs = self._quantile_table()
        z = np.clip(np.interp(u, Fs, zs), zs[0], zs[-1])
        for _ in range(4):
            dens = np.maximum(self._pdf0(z), 1e-300)
            resid = np.where(u <= 0.5, self._cdf0(z) - u, cu - self._sf0(z))
            z = np.clip(z - resid / dens, zs[0], zs[-1])
        if memoize:
            self._q0_memo[u.size] = (u.copy(), cu.copy(), z.copy())
        return z

    # ----- family hooks --------------------------------------------------
    def _cdf(self, t, x):
        return self._cdf0(x / self._scale(t))

    def _quantile(self, t, u, cu):
        return self._scale(t) * self._quantile0(u, cu)

    def _pdf(self, t, x):
        c = self._scale(t)
        return self._pdf0(x / c) / c

    def support(self, t):
        return -np.inf, np.inf

    def density_sup_bound(self, grid):
        scales = np.array([self._scale(t) for t in grid.points])
        inv_mean = float(self._mix_w @ (1.0 / self._mix_s))
        return inv_mean / (_SQRT_2PI * scales.min())


class Empirical(MarginalFamily):
    """Per-grid-point empirical families from equal-size sample columns.

    ``quantile(t, u)`` returns the order statistic with (1-based) index
    ceil(u * n), realized as the generalized inverse of the empirical CDF
    so the Galois inequality is exact in floating point.  The CDF has
    atoms, so densities are unsupported and copula extraction goes through
    the distributional transform.
    """

    kind = "empirical"
    has_density = False
    is_continuous = False

    def __init__(self, grid: TimeGrid, samples, tail_eps: float = _DEFAULT_TAIL_EPS):
        super().__init__(tail_eps)
        samples = np.array(samples, dtype=float)
        if samples.ndim != 2 or samples.shape[0] != grid.m or samples.shape[1] < 1:
            raise InvalidArgumentError(
                f"samples must have shape ({grid.m}, n>=1), got {samples.shape}")
        if not np.isfinite(samples).all():
            raise InvalidArgumentError("samples must be finite")
        self.grid = grid
        self._columns = np.sort(samples, axis=1)
        self._columns.setflags(write=False)
        n = self._columns.shape[1]
        self._thresholds = np.arange(1, n + 1) / n

    @property
    def n_samples(self) -> int:
        return self._columns.shape[1]

    def column(self, t: float) -> np.ndarray:
        """Sorted sample column attached to grid time t."""
        return self._columns[self._col_index(float(t))]

    def _col_index(self, t: float) -> int:
        pts = self.grid.points
        idx = int(np.searchsorted(pts, t))
        for j in (idx - 1, idx):
            if 0 <= j < pts.size and abs(pts[j] - t) <= 1e-9 * max(1.0, abs(t)):
                return j
        raise InvalidArgumentError(f"t={t!r} is not a grid point of this family")

    def _cdf(self, t, x):
        col = self._columns[self._col_index(t)]
        return np.searchsorted(col, x, side="right") / col.size

    def _cdf_left(self, t, x):
        col = self._columns[self._col_index(t)]
        return np.searchsorted(col, x, side="left") / col.size

    def _quantile(self, t, u, cu):
        col = self._columns[self._col_index(t)]
        idx = np.searchsorted(self._thresholds, u, side="left")
        return col[np.minimum(idx, col.size - 1)]

    def support(self, t):
        col = self._columns[self._col_index(float(t))]
        return float(col[0]), float(col[-1])


def empirical_family_from_ensemble(ensemble) -> Empirical:
    """Column-wise empirical marginal family of a process ensemble."""
    return Empirical(ensemble.grid, ensemble.paths.T)


def empirical_family_to_csv(family: Empirical, path) -> None:
    """One column per grid point; the header row holds the grid times."""
    if not isinstance(family, Empirical):
        raise InvalidArgumentError("only empirical families serialize to CSV")
    header = ",".join(f"{t:.17g}" for t in family.grid.points)
    body = family._columns.T  # rows = sample index, columns = grid points
    lines = [header]
    for row in body:
        lines.append(",".join(f"{v:.17g}" for v in row))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def empirical_family_from_csv(path) -> Empirical:
    """Inverse of ``empirical_family_to_csv``; grid weights are trapezoid."""
    with open(path, "r", encoding="utf-8") as fh:
        lines = [ln.strip() for ln in fh if ln.strip()]
    if len(lines) < 2:
        raise InvalidArgumentError(f"{path}: need a header row and at least one sample row")
    times = np.array([float(v) for v in lines[0].split(",")])
    rows = np.array([[float(v) for v in ln.split(",")] for ln in lines[1:]])
    if rows.shape[1] != times.size:
        raise InvalidArgumentError(f"{path}: inconsistent column count")
    return Empirical(grid_from_points(times), rows.T)
