"""Experiment drivers: the leverage phase diagram and temporary-shock paths."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .bubble import Regime
from .closed_economy import EquilibriumPath, solve_steady_state, solve_transition
from .economy import CES, EconomyParams, Exponential, leverage_threshold
from .errors import DomainError, ParameterError


@dataclass(frozen=True)
class PhaseDiagram:
    """Threshold ``λ̄`` per elasticity ``1/ρ`` plus a regime grid in ``(1/ρ, λ)``."""

    rows: tuple[tuple[float, float], ...]
    regimes: tuple[tuple[float, float, str], ...]

    def validate(self, rtol: float = 1e-12) -> None:
        """Flat for ``1/ρ <= 1``, nonincreasing beyond."""
        flat = [lb for x, lb in self.rows if x <= 1.0]
        if flat and max(flat) - min(flat) > rtol * max(flat):
            raise DomainError("threshold varies on the inelastic side")
        tail = [lb for x, lb in self.rows if x >= 1.0]
        if any(b > a * (1 + rtol) for a, b in zip(tail, tail[1:])):
            raise DomainError("threshold increases with the elasticity of substitution")


def phase_diagram(econ: EconomyParams, inv_rho_grid, lambda_grid) -> PhaseDiagram:
    """Leverage threshold across CES elasticities, holding ``A``, ``α``, ``δ`` fixed."""
    if not isinstance(econ.tech, CES):
        raise ParameterError("the phase diagram varies a CES technology")
    base = econ.tech
    rows, regimes = [], []
    for x in inv_rho_grid:
        tech = CES(base.A, base.alpha, 1.0 / x, base.delta)
        lam_bar = leverage_threshold(econ.replace(tech=tech))
        rows.append((float(x), lam_bar))
        for lam in lambda_grid:
            label = Regime.BUBBLY if lam > lam_bar else Regime.FUNDAMENTAL
            regimes.append((float(x), float(lam), label.value))
    return PhaseDiagram(tuple(rows), tuple(regimes))


@dataclass(frozen=True)
class ShockExperiment:
    name: str
    path: EquilibriumPath  # includes the pre-shock steady-state rows
    base_price: float
    base_rent: float

    def normalized(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Price, rent and price-rent ratio relative to the pre-shock steady state."""
        p = self.path.P / self.base_price
        r = self.path.rent / self.base_rent
        return p, r, p / r


def temporary_shock(
    base: EconomyParams,
    shocked: EconomyParams,
    duration: int = 10,
    T: int = 200,
    J: int = 10,
    pre_periods: int = 5,
    name: str = "shock",
) -> ShockExperiment:
    """Unanticipated shock at ``t = 0`` that is reversed, again by surprise, at ``duration``.

    The economy starts in the steady state of ``base``; each regime is
    believed permanent when it arrives.
    """
    ss = solve_steady_state(base)
    path = solve_transition([(0, shocked), (duration, base)], ss.K, T=T, J=J)
    path = path.prepend_steady_state(base, ss, pre_periods)
    return ShockExperiment(name, path, ss.P, ss.rent)


def leverage_and_productivity_booms(base: EconomyParams, shock_lambda: float, shock_gamma: float, **kwargs) -> list[ShockExperiment]:
    """Leverage-driven and productivity-driven temporary booms."""
    return [
        temporary_shock(base, base.replace(lam=shock_lambda), name="leverage", **kwargs),
        temporary_shock(base, base.replace(dist=Exponential(shock_gamma)), name="productivity", **kwargs),
    ]
