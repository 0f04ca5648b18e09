"""Midpoint quadrature over the unit probability interval.

Integrals of the form int_0^1 h(F^{-1}(u)) du appear in moment checks,
Wasserstein distances, and robustness constants.  Their integrands are
smooth inside (0, 1) but typically blow up at one or both endpoints, so a
uniform mesh wastes its budget in the bulk.  The midpoint rule is applied
in the variable y with u = (1 + tanh y)/2, which clusters nodes
geometrically near both endpoints while the transformed integrand decays
there for every integrable tail.

Integrands receive both u and 1 - u.  The complement is computed directly
from y through a logistic, so tail quantiles can be evaluated stably even
when u rounds to 1.0 in double precision.
"""

from __future__ import annotations

from typing import Callable

import numpy as np
from scipy.special import expit

from .errors import InvalidArgumentError, NumericFailureError

#: integrand signature: f(u, one_minus_u) -> array of values
Integrand = Callable[[np.ndarray, np.ndarray], np.ndarray]


def graded_midpoint_nodes(delta: float, n_nodes: int):
    """Midpoint nodes and weights on (delta, 1 - delta).

    Returns (u, cu, w) with cu = 1 - u held at full relative precision and
    weights summing to 1 - 2*delta up to rounding.
    """
    if not 0.0 < delta < 0.5:
        raise InvalidArgumentError(f"delta must lie in (0, 0.5), got {delta}")
    if n_nodes < 2:
        raise InvalidArgumentError("need at least two nodes")
    # y-range solves (1 + tanh Y)/2 = 1 - delta
    y_max = 0.5 * np.log((1.0 - delta) / delta)
    h = 2.0 * y_max / n_nodes
    y = -y_max + (np.arange(n_nodes) + 0.5) * h
    u = expit(2.0 * y)
    cu = expit(-2.0 * y)
    w = 2.0 * h * u * cu
    return u, cu, w


def adaptive_unit_integral(f: Integrand, delta: float, start_nodes: int = 4096,
                           rel_tol: float = 1e-6, max_nodes: int = 2**18) -> float:
    """int_delta^{1-delta} f(u) du with node doubling.

    Starts at ``start_nodes`` midpoints and doubles until successive values
    agree to ``rel_tol`` relative or the node cap is reached.
    """
    if start_nodes < 2:
        raise InvalidArgumentError("start_nodes must be at least 2")
    n = int(start_nodes)
    previous = None
    while True:
        u, cu, w = graded_midpoint_nodes(delta, n)
        vals = np.asarray(f(u, cu), dtype=float)
        if vals.shape != u.shape:
            raise InvalidArgumentError("integrand returned a wrong shape")
        if not np.isfinite(vals).all():
            raise NumericFailureError("integrand produced non-finite values")
        total = float(w @ vals)
        if previous is not None and abs(total - previous) <= rel_tol * max(abs(total), 1e-300):
            return total
        if n >= max_nodes:
            return total
        previous = total
        n *= 2


class IntegralCache:
    """Reuse results across grid times for time-invariant integrands.

    Quantile integrals are evaluated once per grid point, but families
    with constant parameters give the same integrand at every time.  The
    cache probes each integrand on a fixed 32-node mesh; an exact match
    with the previous probe returns the stored result, anything else
    recomputes.  Exact comparison keeps this safe for genuinely
    time-varying families.
    """

    def __init__(self, delta: float, n_probe: int = 32):
        self._u, self._cu, _ = graded_midpoint_nodes(delta, n_probe)
        self._probe = None
        self._result = None

    def get(self, f: Integrand):
        vals = np.asarray(f(self._u, self._cu), dtype=float)
        if (self._result is not None and self._probe is not None
                and np.array_equal(vals, self._probe)):
            return self._result
        self._probe = vals
        self._result = None
        return None

    def put(self, result):
        self._result = result
        return result


def probed_unit_integral(f: Integrand, delta: float, start_nodes: int = 4096,
                         rel_tol: float = 1e-6, max_nodes: int = 2**18):
    """Integral plus a divergence verdict from shrinking the endpoint cut.

    Evaluates at cuts delta, delta/2, delta/4.  A convergent integral with
    tail exponent s gains increments shrinking by the factor 2**(-s) per
    halving; a power-law divergence gains more than 10% outright; a
    logarithmic divergence gains a constant increment (ratio 1).  The
    verdict is divergent when the first increment is large, or when it is
    non-negligible and the second shrinks by less than 5%, which flags
    exact log divergence and conservatively sweeps in tail exponents
    below about 0.07.  Returns ``(value_at_delta, divergent)``.
    """
    values = [adaptive_unit_integral(f, d, start_nodes, rel_tol, max_nodes)
              for d in (delta, delta / 2.0, delta / 4.0)]
    base = abs(values[0])
    d1 = values[1] - values[0]
    d2 = values[2] - values[1]
    divergent = False
    if d1 > 0.10 * base:
        divergent = True
    elif d1 > 1e-4 * base and d2 >= 0.95 * d1:
        # increments that refuse to shrink: at best log-divergent
        divergent = True
    return values[0], divergent
