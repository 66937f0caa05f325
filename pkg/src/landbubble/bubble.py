"""Asset pricing for a rent-paying asset: deflators, fundamental values, bubble tests.

Index conventions for all series: ``rents[t]`` is paid at ``t``, ``prices[t]``
is the ex-rent price at ``t`` and ``rates[t]`` the gross risk-free rate from
``t`` to ``t+1``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import DomainError, SeriesTooShort, TailNotSummable

MIN_SERIES_LENGTH = 20
DEFAULT_MARGIN = 0.02
DEFAULT_WINDOW = 10


class Regime(str, Enum):
    FUNDAMENTAL = "Fundamental"
    BUBBLY = "Bubbly"
    INCONCLUSIVE = "Inconclusive"


@dataclass(frozen=True)
class DeflatorSeries:
    """Zero-coupon bond prices ``q_t`` for maturities ``0..len(rates)``."""

    q: np.ndarray

    def __post_init__(self):
        if self.q.size == 0 or self.q[0] != 1.0 or np.any(~(self.q > 0)):
            raise DomainError("deflators must start at 1 and stay positive")

    def __len__(self):
        return self.q.size

    def __getitem__(self, t):
        return self.q[t]


def _as_series(x, name: str) -> np.ndarray:
    arr = np.asarray(x, dtype=float).ravel()
    if np.any(~np.isfinite(arr)):
        raise DomainError(f"{name} must be finite")
    return arr


def deflators(rates) -> DeflatorSeries:
    """``q_0 = 1``, ``q_{t+1} = q_t / R_t``."""
    R = _as_series(rates, "rates")
    if np.any(R <= 0):
        raise DomainError("gross rates must be positive")
    q = np.exp(-np.concatenate([[0.0], np.cumsum(np.log(R))]))
    q[0] = 1.0
    return DeflatorSeries(q)


def _geometric_tail(rents, rates, window):
    """Value at the last date of rents beyond it, assuming geometric continuation.

    Rent growth is the geometric mean over the last ``window`` periods and
    the discount rate the geometric mean of the last ``window`` rates.
    """
    N = rents.size
    last = rents[-1]
    if last == 0:
        return 0.0
    w = min(window, N - 1)
    if w < 1 or rents[-1 - w] <= 0 or last < 0:
        raise TailNotSummable("cannot infer rent growth for the tail")
    g = (last / rents[-1 - w]) ** (1.0 / w)
    R_bar = math.exp(float(np.mean(np.log(rates[:N][-w:]))))
    if g >= R_bar:
        raise TailNotSummable(f"rent growth {g:.6g} is not below the rate {R_bar:.6g}")
    return last * g / (R_bar - g)


def fundamental_values(
    rents,
    rates,
    tail_mode: str = "geometric_extrapolate",
    window: int = DEFAULT_WINDOW,
    strict: bool = True,
) -> np.ndarray:
    """Present value of future rents ``V_t = (1/q_t) Σ_{s≥1} q_{t+s} r_{t+s}`` for every ``t``.

    Needs ``len(rates) >= len(rents) - 1``. Beyond the last rent the sum is
    either dropped (``truncate``, a lower bound) or continued geometrically.
    With ``strict=False`` a non-summable tail yields NaN instead of raising.
    """
    r = _as_series(rents, "rents")
    R = _as_series(rates, "rates")
    N = r.size
    if N < 1 or R.size < N - 1:
        raise DomainError("need one rate per period except the last")
    if np.any(R <= 0):
        raise DomainError("gross rates must be positive")
    if tail_mode == "truncate":
        tail = 0.0
    elif tail_mode == "geometric_extrapolate":
        try:
            tail = _geometric_tail(r, R, window)
        except TailNotSummable:
            if strict:
                raise
            return np.full(N, np.nan)
    else:
        raise ValueError(f"unknown tail mode {tail_mode!r}")
    V = np.empty(N)
    V[-1] = tail
    for t in range(N - 2, -1, -1):
        V[t] = (r[t + 1] + V[t + 1]) / R[t]
    return V


def fundamental_value(rents, rates, t: int = 0, tail_mode: str = "geometric_extrapolate", window: int = DEFAULT_WINDOW) -> float:
    r = _as_series(rents, "rents")
    if not 0 <= t < r.size:
        raise DomainError(f"t={t} outside the series")
    return float(fundamental_values(r, rates, tail_mode, window)[t])


def implied_rates(prices, rents) -> np.ndarray:
    """No-arbitrage gross rates ``(P_{t+1} + r_{t+1}) / P_t``."""
    P = _as_series(prices, "prices")
    r = _as_series(rents, "rents")
    return (P[1:] + r[1:]) / P[:-1]


def transversality_terms(prices, rates) -> np.ndarray:
    """Discounted prices ``q_t P_t / P_0``; a bubble keeps them away from zero."""
    P = _as_series(prices, "prices")
    q = deflators(rates).q
    n = min(P.size, q.size)
    return q[:n] * P[:n] / P[0]


@dataclass(frozen=True)
class BubbleVerdict:
    """Outcome of the summability test on rent yields ``r_t / P_t``.

    ``fitted_ratio`` is the geometric decay factor of the yields over the
    final half of the series. ``tvc_estimate`` extrapolates
    ``lim q_T P_T / P_0 = Π (1 + r_t/P_t)^{-1}`` using that fit: positive
    under a bubble, zero when the yields do not decay.
    """

    classification: Regime
    partial_sums: np.ndarray
    fitted_ratio: float
    tvc_estimate: float
    margin: float = DEFAULT_MARGIN
    degenerate: bool = False

    @property
    def bubbly(self) -> bool:
        return self.classification is Regime.BUBBLY


def _log_tail_product(first: float, ratio: float) -> float:
    """``Σ_{k≥1} log(1 + first·ratio^k)`` for ``0 <= ratio < 1``."""
    total = 0.0
    k = np.arange(1, 4097, dtype=float)
    offset = 0.0
    while True:
        terms = first * ratio ** (k + offset)
        total += float(np.sum(np.log1p(terms)))
        if terms[-1] < 1e-18 or offset > 1e7:
            return total
        offset += k.size


def montrucchio_test(rents, prices, margin: float = DEFAULT_MARGIN) -> BubbleVerdict:
    """Classify a price path as bubbly or fundamental from its rent yields.

    A positive-rent asset is bubbly exactly when ``Σ r_t/P_t < ∞``. On a
    finite series, ``log(r_t/P_t)`` is fitted linearly in ``t`` over the
    final half. A fitted ratio below ``1 - margin`` means geometric decay
    (Bubbly). A ratio within ``margin`` of one counts as Fundamental when the
    yields show no saturation: the mean over the final quarter must be at
    least half the mean over the quarter before. Anything else is
    Inconclusive.
    """
    r = _as_series(rents, "rents")
    P = _as_series(prices, "prices")
    if r.size != P.size:
        raise DomainError("rents and prices differ in length")
    if P.size < MIN_SERIES_LENGTH:
        raise SeriesTooShort(f"need at least {MIN_SERIES_LENGTH} periods, got {P.size}")
    if np.any(P <= 0):
        raise DomainError("prices must be positive")
    if np.any(r < 0):
        raise DomainError("rents must be nonnegative")

    d = r[1:] / P[1:]
    sums = np.cumsum(d)
    log_hold = -float(np.sum(np.log1p(d)))
    half = d[d.size // 2 :]
    t_half = np.arange(d.size - half.size, d.size, dtype=float)
    positive = half > 0
    if positive.sum() < 2:
        return BubbleVerdict(Regime.BUBBLY, sums, 0.0, math.exp(log_hold), margin, degenerate=True)

    slope, intercept = np.polyfit(t_half[positive], np.log(half[positive]), 1)
    ratio = math.exp(slope)

    if ratio < 1.0 - margin:
        label = Regime.BUBBLY
    else:
        quarter = max(half.size // 2, 1)
        late, early = half[-quarter:].mean(), half[-2 * quarter : -quarter].mean()
        steady = abs(ratio - 1.0) <= margin and late >= 0.5 * early and positive.all()
        label = Regime.FUNDAMENTAL if steady else Regime.INCONCLUSIVE

    if ratio < 1.0:
        last_fit = math.exp(intercept + slope * (d.size - 1))
        tvc = math.exp(log_hold - _log_tail_product(last_fit, ratio))
    else:
        tvc = 0.0
    return BubbleVerdict(label, sums, ratio, tvc, margin)
