"""Numerical kernels shared by the solvers.

Scalar bracketing root finder (Brent), a Nelder-Mead simplex minimizer,
Gauss-Laguerre rules, natural-cubic-spline time paths and the Hill tail-index
estimator.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy import optimize
from scipy.interpolate import CubicSpline

from .errors import InvalidBracket, NoConvergence, TooFewSamples, UnsupportedOrder

_EPS = np.finfo(float).eps
_TINY = np.finfo(float).tiny

MAX_LAGUERRE_ORDER = 100


# ---------------------------------------------------------------------------
# Root finding
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Bracket:
    lo: float
    hi: float
    f_lo: float
    f_hi: float

    def __post_init__(self):
        if not self.lo < self.hi:
            raise InvalidBracket(f"need lo < hi, got [{self.lo}, {self.hi}]")
        if not (math.isfinite(self.f_lo) and math.isfinite(self.f_hi)):
            raise InvalidBracket(f"non-finite endpoint values {self.f_lo}, {self.f_hi}")
        if self.f_lo * self.f_hi > 0:
            raise InvalidBracket(
                f"f has the same sign at both ends: f({self.lo})={self.f_lo}, f({self.hi})={self.f_hi}"
            )

    @classmethod
    def around(cls, f: Callable[[float], float], lo: float, hi: float) -> "Bracket":
        return cls(lo, hi, float(f(lo)), float(f(hi)))


def find_root(
    f: Callable[[float], float],
    bracket: Bracket | tuple[float, float],
    tol: float = 1e-12,
    maxiter: int = 200,
) -> float:
    """Root of a continuous scalar function on a sign-changing bracket.

    Brent's method via ``scipy.optimize.brentq``. The returned point always
    lies inside the initial bracket.

    Args:
        f: Function whose root is sought.
        bracket: A :class:`Bracket` or an ``(lo, hi)`` pair (``f`` is then
            evaluated at both ends).
        tol: Absolute width of the final bracket (a relative ``4*eps`` is added).
        maxiter: Iteration cap.

    Raises:
        InvalidBracket: If ``f`` does not change sign over the bracket.
        NoConvergence: If ``maxiter`` is exhausted.
    """
    if not isinstance(bracket, Bracket):
        bracket = Bracket.around(f, *bracket)
    if bracket.f_lo == 0.0:
        return bracket.lo
    if bracket.f_hi == 0.0:
        return bracket.hi
    root, info = optimize.brentq(
        lambda x: float(f(x)), bracket.lo, bracket.hi,
        xtol=max(tol, _TINY), rtol=4.0 * _EPS, maxiter=maxiter, full_output=True, disp=False,
    )
    if not info.converged:
        raise NoConvergence(f"find_root: no convergence after {maxiter} iterations", best=root)
    return float(root)


def expand_bracket(
    f: Callable[[float], float], lo: float, hi: float, factor: float = 2.0, max_steps: int = 60
) -> Bracket:
    """Grow ``hi`` geometrically until ``f`` changes sign relative to ``f(lo)``."""
    f_lo = float(f(lo))
    width = hi - lo
    for _ in range(max_steps):
        f_hi = float(f(hi))
        if f_lo * f_hi <= 0:
            return Bracket(lo, hi, f_lo, f_hi)
        width *= factor
        hi = lo + width
    raise InvalidBracket(f"no sign change found on [{lo}, {hi}]")


# ---------------------------------------------------------------------------
# Minimization
# ---------------------------------------------------------------------------


@dataclass
class MinimizeResult:
    x: np.ndarray
    fun: float
    converged: bool
    nit: int
    nfev: int


def minimize(
    f: Callable[[np.ndarray], float],
    x0: Sequence[float],
    tol: float = 1e-10,
    max_iter: int = 20_000,
    *,
    ftol: float | None = None,
    initial_step: float | Sequence[float] | None = None,
    restarts: int = 5,
) -> MinimizeResult:
    """Derivative-free minimization with the Nelder-Mead simplex.

    Wraps scipy's Nelder-Mead with dimension-adaptive coefficients, which
    behave much better than the classic ones beyond a handful of dimensions.
    After convergence the simplex is rebuilt around the best vertex and the
    search repeated, up to ``restarts`` times or until a restart stops
    improving; each restart uses a simplex ten times smaller than the
    previous one.

    Non-finite objective values are treated as +inf, so ``f`` may signal an
    infeasible point by returning ``inf`` or ``nan``.

    Convergence means the simplex diameter (max-norm) is at most ``tol`` and
    the spread of objective values at most ``ftol`` (defaults to ``tol``).
    ``max_iter`` caps iterations across all restarts; when it runs out the
    best vertex is returned with ``converged=False``.
    """
    x0 = np.asarray(x0, dtype=float).ravel()
    n = x0.size
    ftol = tol if ftol is None else ftol
    nfev = 0

    def fun(x):
        nonlocal nfev
        nfev += 1
        val = float(f(x))
        return val if math.isfinite(val) else math.inf

    if initial_step is None:
        steps = np.where(x0 != 0.0, 0.05 * np.abs(x0), 0.00025)
    else:
        steps = np.broadcast_to(np.asarray(initial_step, dtype=float), (n,)).copy()
    steps0 = steps.copy()

    best_x, best_f = x0.copy(), fun(x0)
    nit = 0
    converged = False
    for attempt in range(restarts + 1):
        if nit >= max_iter:
            converged = False
            break
        simplex = np.vstack([best_x] + [best_x + steps[i] * np.eye(n)[i] for i in range(n)])
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            res = optimize.minimize(
                fun, best_x, method="Nelder-Mead",
                options={
                    "xatol": tol, "fatol": ftol, "maxiter": max_iter - nit, "maxfev": math.inf,
                    "adaptive": n > 1, "initial_simplex": simplex,
                },
            )
        nit += int(res.nit)
        converged = res.status == 0
        improved = res.fun < best_f
        if res.fun <= best_f:
            best_x, best_f = np.asarray(res.x, dtype=float).copy(), float(res.fun)
        if not converged or not improved:
            break
        steps = np.maximum(steps0 * 0.1 ** (attempt + 1), 10.0 * tol)
    return MinimizeResult(best_x, best_f, converged, nit, nfev)


# ---------------------------------------------------------------------------
# Quadrature
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class QuadratureRule:
    """Fixed-node rule for integrals of the form ``∫_0^∞ g(x) e^{-x} dx``."""

    nodes: np.ndarray
    weights: np.ndarray
    order: int

    def integrate(self, g: Callable[[np.ndarray], np.ndarray]) -> float:
        return float(np.dot(self.weights, g(self.nodes)))


def gauss_laguerre(order: int = 15) -> QuadratureRule:
    """Gauss-Laguerre nodes and weights; exact for polynomials of degree ``2*order-1``."""
    if not isinstance(order, (int, np.integer)) or not 1 <= order <= MAX_LAGUERRE_ORDER:
        raise UnsupportedOrder(f"order must be an integer in [1, {MAX_LAGUERRE_ORDER}], got {order!r}")
    x, w = np.polynomial.laguerre.laggauss(int(order))
    x.setflags(write=False)
    w.setflags(write=False)
    return QuadratureRule(nodes=x, weights=w, order=int(order))


# ---------------------------------------------------------------------------
# Spline-parameterized time paths
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SplinePath:
    """Natural cubic spline through ``(knot_times, knot_values)`` on ``0..horizon``."""

    knot_times: tuple[int, ...]
    knot_values: tuple[float, ...]
    horizon: int

    def __post_init__(self):
        times = tuple(int(t) for t in self.knot_times)
        object.__setattr__(self, "knot_times", times)
        object.__setattr__(self, "knot_values", tuple(float(v) for v in self.knot_values))
        if len(times) != len(self.knot_values):
            raise ValueError("knot_times and knot_values differ in length")
        if len(times) < 2 or times[0] != 0 or times[-1] != self.horizon:
            raise ValueError("knots must start at 0 and end at the horizon")
        if any(b <= a for a, b in zip(times, times[1:])):
            raise ValueError("knot_times must be strictly increasing")

    def __call__(self, t) -> np.ndarray:
        spline = CubicSpline(self.knot_times, self.knot_values, bc_type="natural")
        return spline(np.asarray(t, dtype=float))

    def values(self) -> np.ndarray:
        """Path evaluated at every integer period ``0..horizon``; exact at the knots."""
        out = self(np.arange(self.horizon + 1))
        out[list(self.knot_times)] = self.knot_values
        return out


def front_loaded_knots(horizon: int, count: int) -> tuple[int, ...]:
    """``count`` distinct integer knot times from 0 to ``horizon``, geometrically spaced."""
    if count < 2:
        raise ValueError("need at least two knots")
    if count > horizon + 1:
        raise ValueError("more knots than periods")
    raw = np.geomspace(1.0, horizon + 1.0, count) - 1.0
    knots = [0]
    for i, t in enumerate(raw[1:], start=1):
        remaining = count - 1 - i
        lo = knots[-1] + 1
        hi = horizon - remaining
        knots.append(int(min(max(round(t), lo), hi)))
    return tuple(knots)


# ---------------------------------------------------------------------------
# Tail index
# ---------------------------------------------------------------------------


def tail_count(n: int, top_fraction: float) -> int:
    return int(math.ceil(top_fraction * n))


def hill_estimator(samples, top_fraction: float = 0.01) -> float:
    """Hill estimate of the Pareto tail index from the upper order statistics.

    With ``k = ceil(top_fraction * N)`` and descending order statistics
    ``x_(1) >= x_(2) >= ...`` the estimate is
    ``1 / mean(log(x_(i) / x_(k+1)), i = 1..k)``.

    Raises:
        ValueError: On non-positive samples or ``top_fraction`` outside (0, 0.5].
        TooFewSamples: If fewer than 10 tail observations are available, or
            if the tail has no spread (zero log spacings).
    """
    x = np.asarray(samples, dtype=float).ravel()
    if x.size == 0 or np.any(~np.isfinite(x)) or np.any(x <= 0):
        raise ValueError("samples must be nonempty, finite and positive")
    if not 0 < top_fraction <= 0.5:
        raise ValueError(f"top_fraction must be in (0, 0.5], got {top_fraction}")
    k = tail_count(x.size, top_fraction)
    if k < 10 or k + 1 > x.size:
        raise TooFewSamples(f"only {k} tail observations (need at least 10)")
    top = -np.partition(-x, k)[: k + 1]
    top.sort()
    threshold = top[0]
    mean_log = float(np.mean(np.log(top[1:] / threshold)))
    if mean_log <= 0.0:
        raise TooFewSamples("degenerate upper tail: all log spacings are zero")
    return 1.0 / mean_log
