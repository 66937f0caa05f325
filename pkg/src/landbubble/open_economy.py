"""Large open economy with an AK capital sector and a constant-rent land sector.

Agents face a world gross rate ``R`` set by their own aggregate demand for
bonds. Below the leverage threshold the economy is stationary and land is
priced at its fundamental value. Above it, wealth grows at ``G = R`` and the
land price carries a bubble growing at the same rate.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .bubble import Regime
from .economy import EconomyParams, TwoSectorLinear, check_assumptions, leverage_threshold
from .errors import AssumptionViolation, AtThreshold, DomainError, ParameterError
from .numerics import Bracket, find_root

THRESHOLD_TOL = 1e-8
RATE_EPS = 1e-9


def risk_premium(econ: EconomyParams, R):
    """``π(R) = E[max(0, m z - R)]``: expected excess return of the best projects."""
    if np.any(np.asarray(R) <= 0):
        raise DomainError(f"gross rate must be positive, got {R}")
    return econ.dist.risk_premium(econ.m, R)


def psi(econ: EconomyParams, R: float, regime: Regime | str) -> float:
    """Inverse-leverage map whose level set ``ψ(R) = 1/λ`` pins the rate.

    Fundamental branch ``βπ(R)/(1 - βR)`` on ``[1, 1/β)``; bubbly branch
    ``βπ(R)/((1 - β)R)`` on ``[1, ∞)``.
    """
    regime = Regime(regime)
    beta = econ.beta
    if regime is Regime.FUNDAMENTAL:
        if not 1.0 <= R < 1.0 / beta:
            raise DomainError(f"fundamental branch needs R in [1, 1/beta), got {R}")
        return beta * float(risk_premium(econ, R)) / (1.0 - beta * R)
    if regime is Regime.BUBBLY:
        if not R >= 1.0:
            raise DomainError(f"bubbly branch needs R >= 1, got {R}")
        return beta * float(risk_premium(econ, R)) / ((1.0 - beta) * R)
    raise DomainError(f"no rate map for regime {regime.value}")


@dataclass(frozen=True)
class TrendStationaryEquilibrium:
    """Balanced-growth equilibrium; ``P_t = bubble_coef R^t + fundamental_level``."""

    regime: Regime
    R: float
    G: float
    zbar: float
    alpha_coef: float
    B: float
    bubble_coef: float
    fundamental_level: float
    lam: float
    m: float
    D: float
    K0: float
    residual: float
    pi_R: float

    def price(self, t):
        t = np.asarray(t, dtype=float)
        return self.bubble_coef * self.R**t + self.fundamental_level

    def fundamental_value(self, t=0):
        return np.full(np.shape(t), self.fundamental_level) if np.ndim(t) else self.fundamental_level

    def capital(self, t):
        """Aggregate capital ``K_0 G^t`` (constant in the fundamental regime)."""
        return self.K0 * self.G ** np.asarray(t, dtype=float)

    def initial_wealth(self) -> float:
        """``W_0 = m K_0 / (1 - alpha_coef)``; defined for the bubbly regime only."""
        if self.regime is not Regime.BUBBLY:
            raise DomainError("initial wealth formula holds only on the bubbly path")
        return self.m * self.K0 / (1.0 - self.alpha_coef)


def _open_economy_inputs(econ: EconomyParams, D: float | None) -> tuple[float, float]:
    m = econ.m
    if D is None:
        if not isinstance(econ.tech, TwoSectorLinear):
            raise ParameterError("land rent D must be given for a non-linear technology")
        D = econ.tech.D
    if not D > 0:
        raise ParameterError(f"land rent must be positive, got {D}")
    return m, float(D)


def solve_trend_stationary(econ: EconomyParams, K0: float = 1.0, D: float | None = None) -> TrendStationaryEquilibrium:
    """Unique trend-stationary equilibrium on the side of the threshold where ``λ`` lies."""
    if not K0 > 0:
        raise ParameterError(f"initial capital must be positive, got {K0}")
    m, D = _open_economy_inputs(econ, D)
    report = check_assumptions(econ)
    if not report.a3_ok:
        raise AssumptionViolation(f"productive wealth cannot grow (value {report.a3_value:.6g} <= 1)")
    lam, beta = econ.lam, econ.beta
    lam_bar = leverage_threshold(econ)
    if abs(lam - lam_bar) < THRESHOLD_TOL:
        raise AtThreshold(f"leverage {lam} is at the threshold {lam_bar:.12g}")
    target = 1.0 / lam

    if lam < lam_bar:
        regime = Regime.FUNDAMENTAL
        f = lambda R: psi(econ, R, regime) - target
        R = find_root(f, Bracket.around(f, 1.0, 1.0 / beta - RATE_EPS), tol=1e-14)
        pi_R = float(risk_premium(econ, R))
        residual = beta * (R + lam * pi_R) - 1.0
        G, B, bubble_coef = 1.0, 0.0, 0.0
    else:
        regime = Regime.BUBBLY
        f = lambda R: psi(econ, R, regime) - target
        hi = 2.0
        while f(hi) >= 0:
            hi *= 2.0
            if hi > 1e12:
                raise DomainError("no bubbly rate found below 1e12")
        R = find_root(f, Bracket.around(f, 1.0, hi), tol=1e-14)
        pi_R = float(risk_premium(econ, R))
        residual = beta * (R + lam * pi_R) - R
        G, B = R, -D / (R - 1.0)
    zbar = R / m
    alpha_coef = beta * (lam * float(econ.dist.cdf(zbar)) + 1.0 - lam)
    if regime is Regime.BUBBLY:
        bubble_coef = alpha_coef / (1.0 - alpha_coef) * m * K0
    return TrendStationaryEquilibrium(
        regime=regime, R=R, G=G, zbar=zbar, alpha_coef=alpha_coef, B=B,
        bubble_coef=bubble_coef, fundamental_level=D / (R - 1.0), lam=lam, m=m, D=D,
        K0=K0, residual=residual, pi_R=pi_R,
    )


@dataclass(frozen=True)
class RatePoint:
    lam: float
    R: float
    G: float
    regime: Regime


def rate_curve(econ_template: EconomyParams, lambda_grid, K0: float = 1.0, D: float | None = None) -> list[RatePoint]:
    """Equilibrium rate at each leverage level; V-shaped with its minimum at the threshold."""
    out = []
    for lam in lambda_grid:
        eq = solve_trend_stationary(econ_template.replace(lam=float(lam)), K0, D)
        out.append(RatePoint(float(lam), eq.R, eq.G, eq.regime))
    return out


def no_arbitrage_gap(eq: TrendStationaryEquilibrium, periods: int = 100) -> float:
    """Largest relative violation of ``P_t = (P_{t+1} + D)/R`` over ``t = 0..periods``."""
    t = np.arange(periods + 1)
    P = eq.price(np.arange(periods + 2))
    return float(np.max(np.abs(P[t] - (P[t + 1] + eq.D) / eq.R) / np.abs(P[t])))
