"""Relative-wealth dynamics with perpetual-youth resets and their Pareto tail.

An agent's wealth relative to the aggregate follows ``s' = M(z) s`` while
alive and resets to ``s = 1`` at death (probability ``1 - υ``). The
multiplier is ``M(z) = a + (1 - a)(1 + g(z))`` with ``g(z) = max(0, mz - R)/π(R) - 1``
and ``a = βR`` on the stationary (fundamental) path or ``a = β`` on the
bubbly path. The tail exponent ``ζ`` solves ``υ E[M^ζ] = 1``.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy import integrate
from scipy.special import logsumexp

from .bubble import Regime
from .economy import EconomyParams, Exponential, ProductivityDistribution
from .errors import DomainError, NoRoot, ParameterError, TooFewSamples
from .numerics import Bracket, QuadratureRule, find_root, gauss_laguerre, hill_estimator, tail_count

BLOCK_SIZE = 1 << 14
DIAGNOSTIC_FRACTIONS = (0.005, 0.01, 0.02)


@dataclass(frozen=True)
class WealthProcessSpec:
    regime: Regime
    R: float
    m: float
    beta: float
    lam: float
    upsilon: float
    pi_R: float
    dist: ProductivityDistribution

    def __post_init__(self):
        if not 0 < self.upsilon < 1:
            raise ParameterError(f"survival probability must lie in (0, 1), got {self.upsilon}")
        if Regime(self.regime) is Regime.INCONCLUSIVE:
            raise ParameterError("wealth dynamics need a fundamental or bubbly regime")

    @classmethod
    def from_equilibrium(cls, econ: EconomyParams, eq, upsilon: float | None = None) -> "WealthProcessSpec":
        """Build from a solved trend-stationary equilibrium ``eq``."""
        ups = econ.upsilon if upsilon is None else upsilon
        if ups is None:
            raise ParameterError("survival probability upsilon is required")
        return cls(eq.regime, eq.R, eq.m, econ.beta, econ.lam, ups, eq.pi_R, econ.dist)

    def with_rate(self, regime: Regime, R: float) -> "WealthProcessSpec":
        """Same primitives, another regime and rate (``π`` recomputed)."""
        pi_R = float(self.dist.risk_premium(self.m, R))
        return WealthProcessSpec(regime, R, self.m, self.beta, self.lam, self.upsilon, pi_R, self.dist)

    @property
    def floor(self) -> float:
        """Multiplier for agents who do not invest: ``βR`` or ``β``."""
        return self.beta * self.R if Regime(self.regime) is Regime.FUNDAMENTAL else self.beta

    @property
    def slope(self) -> float:
        """Multiplier gain per unit of excess return ``mz - R``."""
        return (1.0 - self.floor) / self.pi_R


def growth_shock(spec: WealthProcessSpec, z):
    """``g(z) = max(0, mz - R)/π(R) - 1``; mean zero under the productivity law."""
    if not spec.pi_R > 0:
        raise DomainError("risk premium is zero; growth shock undefined")
    return np.maximum(0.0, spec.m * np.asarray(z, dtype=float) - spec.R) / spec.pi_R - 1.0


def wealth_multiplier(spec: WealthProcessSpec, z):
    return spec.floor + spec.slope * np.maximum(0.0, spec.m * np.asarray(z, dtype=float) - spec.R)


def log_rho(spec: WealthProcessSpec, zeta: float, rule: QuadratureRule | None = None) -> float:
    """``log ρ(ζ)`` evaluated in log space.

    For exponential productivity the tail above ``R/m`` is again exponential,
    so ``E[M^ζ]`` splits into the non-investing mass and a Gauss-Laguerre
    integral over ``x = γ(z - R/m)``. Other laws use adaptive quadrature.
    """
    if zeta < 0:
        raise DomainError(f"zeta must be nonnegative, got {zeta}")
    a, c = spec.floor, spec.slope
    dist = spec.dist
    if isinstance(dist, Exponential):
        rule = rule or gauss_laguerre(15)
        p = math.exp(-dist.gamma * spec.R / spec.m)
        log_tail = np.log(a + c * spec.m * rule.nodes / dist.gamma) * zeta
        terms = [math.log1p(-p) + zeta * math.log(a), math.log(p) + float(logsumexp(log_tail, b=rule.weights))]
        return math.log(spec.upsilon) + float(logsumexp(terms))
    zc = spec.R / spec.m
    lower = float(dist.cdf(zc)) * a**zeta
    upper, _ = integrate.quad(
        lambda z: (a + c * (spec.m * z - spec.R)) ** zeta * dist.pdf(z), zc, dist.support_upper, limit=200
    )
    return math.log(spec.upsilon) + math.log(lower + upper)


def rho_of_zeta(spec: WealthProcessSpec, zeta: float, rule: QuadratureRule | None = None) -> float:
    """``ρ(ζ) = υ E[M(z)^ζ]``; returns ``inf`` on overflow."""
    lr = log_rho(spec, zeta, rule)
    return math.exp(lr) if lr < 709.0 else math.inf


@dataclass(frozen=True)
class ParetoSolution:
    zeta: float
    residual: float
    regime: Regime
    R: float
    mc_estimate: float | None = None
    mc_ci: tuple[float, float] | None = None


def solve_pareto_exponent(spec: WealthProcessSpec) -> ParetoSolution:
    """Unique ``ζ > 1`` with ``ρ(ζ) = 1``.

    ``ρ`` is convex with ``ρ(0) = ρ(1) = υ < 1``, so the root lies to the
    right of 1; the upper end is doubled until ``ρ`` exceeds one.
    """
    rule = gauss_laguerre(15)
    f = lambda zeta: log_rho(spec, zeta, rule)
    hi = 2.0
    while f(hi) <= 0:
        hi *= 2.0
        if hi > 1e6:
            raise NoRoot("moment condition never exceeds one")
    zeta = find_root(f, Bracket.around(f, 1.0, hi), tol=1e-13)
    return ParetoSolution(zeta, rho_of_zeta(spec, zeta, rule) - 1.0, Regime(spec.regime), spec.R)


@dataclass(frozen=True)
class WealthPanel:
    samples: np.ndarray
    hill: float
    ci: tuple[float, float]
    tail_count: int
    diagnostics: dict[float, float]
    degenerate: bool = False

    def __iter__(self):
        # unpacks as (samples, hill)
        return iter((self.samples, self.hill))


def _simulate_block(spec: WealthProcessSpec, size: int, T: int, seed_seq: np.random.SeedSequence) -> np.ndarray:
    rng = np.random.default_rng(seed_seq)
    s = np.ones(size)
    a, c, m, R, ups = spec.floor, spec.slope, spec.m, spec.R, spec.upsilon
    for _ in range(T):
        z = spec.dist.sample(rng, size)
        mult = a + c * np.maximum(0.0, m * z - R)
        s *= mult
        s[rng.random(size) >= ups] = 1.0
    return s


def simulate_wealth_panel(
    spec: WealthProcessSpec,
    N: int,
    T: int,
    seed: int,
    top_fraction: float = 0.01,
    workers: int | None = None,
) -> WealthPanel:
    """Terminal cross-section of ``N`` independent chains after ``T`` periods.

    Chains are simulated in fixed blocks of ``BLOCK_SIZE``; block ``i`` draws
    from ``SeedSequence(seed).spawn`` child ``i``, so the output depends only
    on ``(seed, N, T)`` and not on ``workers``.
    """
    if N < 1 or T < 1:
        raise ParameterError(f"need N >= 1 and T >= 1, got N={N}, T={T}")
    if seed < 0:
        raise ParameterError("seed must be nonnegative")
    sizes = [BLOCK_SIZE] * (N // BLOCK_SIZE)
    if N % BLOCK_SIZE:
        sizes.append(N % BLOCK_SIZE)
    seeds = np.random.SeedSequence(seed).spawn(len(sizes))
    workers = workers or min(len(sizes), os.cpu_count() or 1)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        blocks = list(pool.map(lambda args: _simulate_block(spec, args[0], T, args[1]), zip(sizes, seeds)))
    samples = np.concatenate(blocks)

    try:
        hill = hill_estimator(samples, top_fraction)
    except TooFewSamples:
        return WealthPanel(samples, math.nan, (math.nan, math.nan), 0, {}, degenerate=True)
    k = tail_count(samples.size, top_fraction)
    half = 1.96 * hill / math.sqrt(k)
    diagnostics = {}
    for frac in DIAGNOSTIC_FRACTIONS:
        try:
            diagnostics[frac] = hill_estimator(samples, frac)
        except TooFewSamples:
            diagnostics[frac] = math.nan
    return WealthPanel(samples, hill, (hill - half, hill + half), k, diagnostics)
