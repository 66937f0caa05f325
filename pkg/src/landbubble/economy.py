"""Model primitives: technologies, productivity distributions and parameters.

Production enters only through ``F(K, 1) = f(K, 1) + (1 - delta) K`` and its
partial derivatives; land supply is normalized to one throughout.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace
from typing import NamedTuple

import numpy as np
from scipy import integrate

from .errors import DegenerateDistribution, DomainError, ParameterError
from .numerics import expand_bracket, find_root

# ---------------------------------------------------------------------------
# Technologies
# ---------------------------------------------------------------------------


class Production(NamedTuple):
    F: np.ndarray | float
    F_K: np.ndarray | float
    F_X: np.ndarray | float
    rent: np.ndarray | float


class Technology:
    """Constant-returns technology with depreciation folded into ``F``."""

    kind = "abstract"

    def evaluate(self, K):
        """Return ``(F, F_K, F_X)`` at ``(K, 1)``; vectorized over ``K``."""
        raise NotImplementedError

    def asymptotic_mpk(self) -> float:
        raise NotImplementedError

    def elasticity_limit(self) -> float:
        """Elasticity of substitution of ``F`` as ``K -> inf``."""
        raise NotImplementedError


@dataclass(frozen=True)
class CES(Technology):
    """``f(K, X) = A (alpha K^(1-rho) + (1-alpha) X^(1-rho))^(1/(1-rho))``.

    ``rho`` is the inverse elasticity of substitution; ``rho == 1`` is the
    Cobb-Douglas limit ``A K^alpha X^(1-alpha)``.
    """

    A: float = 1.0
    alpha: float = 0.5
    rho: float = 1.0
    delta: float = 0.08

    kind = "CES"

    def __post_init__(self):
        if not self.A > 0:
            raise ParameterError(f"A must be positive, got {self.A}")
        if not 0 < self.alpha < 1:
            raise ParameterError(f"alpha must lie in (0, 1), got {self.alpha}")
        if not self.rho > 0:
            raise ParameterError(f"rho must be positive, got {self.rho}")
        if not 0 < self.delta < 1:
            raise ParameterError(f"delta must lie in (0, 1), got {self.delta}")

    @property
    def cobb_douglas(self) -> bool:
        return abs(self.rho - 1.0) < 1e-12

    def evaluate(self, K):
        A, a, rho = self.A, self.alpha, self.rho
        if self.cobb_douglas:
            f = A * K**a
            f_K = a * f / K
            f_X = (1.0 - a) * f
        else:
            u = a * K ** (1.0 - rho) + (1.0 - a)
            scale = A * u ** (rho / (1.0 - rho))
            f = scale * u
            f_K = scale * a * K ** (-rho)
            f_X = scale * (1.0 - a)
        return f + (1.0 - self.delta) * K, f_K + (1.0 - self.delta), f_X

    def asymptotic_mpk(self) -> float:
        if self.rho < 1.0 and not self.cobb_douglas:
            return self.A * self.alpha ** (1.0 / (1.0 - self.rho)) + 1.0 - self.delta
        return 1.0 - self.delta

    def elasticity_limit(self) -> float:
        if self.cobb_douglas:
            return 1.0 / self.alpha
        return 1.0 / self.rho if self.rho < 1.0 else math.inf


@dataclass(frozen=True)
class TwoSectorLinear(Technology):
    """``F(K, X) = m K + D X``: an AK sector plus a land sector with constant rent."""

    m: float
    D: float = 1.0

    kind = "TwoSectorLinear"

    def __post_init__(self):
        if not self.m > 0:
            raise ParameterError(f"m must be positive, got {self.m}")
        if not self.D > 0:
            raise ParameterError(f"D must be positive, got {self.D}")

    def evaluate(self, K):
        ones = np.ones_like(K, dtype=float) if isinstance(K, np.ndarray) else 1.0
        return self.m * K + self.D, self.m * ones, self.D * ones

    def asymptotic_mpk(self) -> float:
        return self.m

    def elasticity_limit(self) -> float:
        return math.inf


def _check_capital(K):
    arr = np.asarray(K, dtype=float)
    if np.any(~(arr > 0)) or np.any(~np.isfinite(arr)):
        raise DomainError(f"capital must be positive and finite, got {K}")
    return arr if arr.ndim else float(arr)


def eval_production(tech: Technology, K) -> Production:
    """``F(K,1)``, both marginal products and the land rent ``r = F_X(K,1)``."""
    K = _check_capital(K)
    F, F_K, F_X = tech.evaluate(K)
    return Production(F, F_K, F_X, F_X)


def asymptotic_mpk(tech: Technology) -> float:
    """``m = lim F(K,1)/K``, the marginal product of capital at infinite capital."""
    return tech.asymptotic_mpk()


def elasticity_sigma(tech: Technology, K: float, step: float = 1e-5) -> float:
    """Elasticity of substitution of ``F`` at ``(K, 1)``.

    Central difference of ``log(F_K/F_X)`` in ``log K``; returns ``inf`` when
    the relative factor price does not move (e.g. linear technology).
    """
    K = _check_capital(K)

    def log_ratio(k):
        _, F_K, F_X = tech.evaluate(k)
        return math.log(F_K) - math.log(F_X)

    slope = (log_ratio(K * math.exp(step)) - log_ratio(K * math.exp(-step))) / (2.0 * step)
    if slope == 0.0:
        return math.inf
    return -1.0 / slope


# ---------------------------------------------------------------------------
# Productivity distributions
# ---------------------------------------------------------------------------


class ProductivityDistribution:
    """Absolutely continuous productivity distribution on ``[0, inf)``.

    Subclasses supply ``cdf`` and ``pdf``; the remaining methods fall back to
    adaptive quadrature and may be overridden with closed forms.
    """

    support_upper = math.inf

    def cdf(self, z):
        raise NotImplementedError

    def pdf(self, z):
        raise NotImplementedError

    def mean(self) -> float:
        return float(self.partial_expectation(0.0))

    def partial_expectation(self, zbar):
        """``∫_{zbar}^∞ z dΦ(z)``."""
        if np.ndim(zbar):
            return np.vectorize(lambda z: ProductivityDistribution.partial_expectation(self, z))(zbar)
        val, _ = integrate.quad(
            lambda z: z * self.pdf(z), float(zbar), self.support_upper, epsabs=0.0, epsrel=1e-13, limit=200
        )
        return val

    def risk_premium(self, m: float, R):
        """``π(R) = ∫ max(0, m z - R) dΦ(z)``.

        Integrated directly: ``m PE(R/m) - R (1 - Φ(R/m))`` cancels badly deep in the tail.
        """
        if np.ndim(R):
            return np.vectorize(lambda r: ProductivityDistribution.risk_premium(self, m, r))(R)
        zbar = max(float(R) / m, 0.0)
        val, _ = integrate.quad(
            lambda z: (m * z - R) * self.pdf(z), zbar, self.support_upper, epsabs=0.0, epsrel=1e-13, limit=200
        )
        return val

    def quantile(self, p: float) -> float:
        if not 0 <= p < 1:
            raise DomainError(f"quantile level must lie in [0, 1), got {p}")
        if p == 0:
            return 0.0
        bracket = expand_bracket(lambda z: self.cdf(z) - p, 0.0, 1.0)
        return find_root(lambda z: self.cdf(z) - p, bracket, tol=1e-14)

    def sample(self, rng: np.random.Generator, size):
        return np.vectorize(self.quantile)(rng.random(size))


@dataclass(frozen=True)
class Exponential(ProductivityDistribution):
    """``Φ(z) = 1 - exp(-gamma z)``."""

    gamma: float

    def __post_init__(self):
        if not self.gamma > 0:
            raise ParameterError(f"gamma must be positive, got {self.gamma}")

    def cdf(self, z):
        return -np.expm1(-self.gamma * np.asarray(z, dtype=float)) if np.ndim(z) else -math.expm1(-self.gamma * z)

    def pdf(self, z):
        return self.gamma * np.exp(-self.gamma * z)

    def mean(self) -> float:
        return 1.0 / self.gamma

    def partial_expectation(self, zbar):
        return (zbar + 1.0 / self.gamma) * np.exp(-self.gamma * zbar)

    def risk_premium(self, m: float, R):
        return (m / self.gamma) * np.exp(-self.gamma * R / m)

    def quantile(self, p: float) -> float:
        if not 0 <= p < 1:
            raise DomainError(f"quantile level must lie in [0, 1), got {p}")
        return -math.log1p(-p) / self.gamma

    def sample(self, rng: np.random.Generator, size):
        return rng.exponential(1.0 / self.gamma, size)


def partial_expectation(dist: ProductivityDistribution, zbar):
    """``∫_{zbar}^∞ z dΦ(z)``; closed form for the exponential distribution."""
    if np.any(np.asarray(zbar) < 0):
        raise DomainError(f"zbar must be nonnegative, got {zbar}")
    return dist.partial_expectation(zbar)


# ---------------------------------------------------------------------------
# Parameters
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class EconomyParams:
    """Preference, leverage, technology and productivity parameters.

    ``lam`` is the leverage limit (``lambda`` is reserved in Python);
    ``upsilon`` the survival probability, used only by the wealth layer.
    """

    beta: float = 0.95
    lam: float = 1.0
    tech: Technology = CES()
    dist: ProductivityDistribution = Exponential(math.log(10.0))
    upsilon: float | None = None

    def __post_init__(self):
        if not 0 < self.beta < 1:
            raise ParameterError(f"beta must lie in (0, 1), got {self.beta}")
        if not self.lam >= 1:
            raise ParameterError(f"leverage limit must be at least 1, got {self.lam}")
        if self.upsilon is not None and not 0 < self.upsilon <= 1:
            raise ParameterError(f"upsilon must lie in (0, 1], got {self.upsilon}")

    @property
    def m(self) -> float:
        return self.tech.asymptotic_mpk()

    def replace(self, **changes) -> "EconomyParams":
        return replace(self, **changes)

    def zbar_min(self) -> float:
        """``Φ^{-1}(1 - 1/λ)``: lowest threshold with a positive land price."""
        return self.dist.quantile(1.0 - 1.0 / self.lam)

    def savings_share(self, zbar):
        """``β(λΦ(zbar) + 1 - λ)``, the share of wealth held as land (P/W)."""
        return self.beta * (self.lam * self.dist.cdf(zbar) + 1.0 - self.lam)


def leverage_threshold(econ: EconomyParams) -> float:
    """Leverage at which the long-run growth rate crosses one.

    ``λ̄ = ((1-β)/β) / ∫_{1/m}^∞ (m z - 1) dΦ(z)``; the denominator is the
    risk premium at a unit gross rate, ``m`` the asymptotic marginal product.
    """
    denom = float(econ.dist.risk_premium(econ.m, 1.0))
    if not denom > 0:
        raise DegenerateDistribution("no productivity mass above 1/m; threshold undefined")
    return (1.0 - econ.beta) / econ.beta / denom


@dataclass(frozen=True)
class AssumptionReport:
    a1_ok: bool
    a2_ok: bool
    a3_ok: bool
    a4_ok: bool
    a3_value: float
    sigma_limit: float

    @property
    def all_ok(self) -> bool:
        return self.a1_ok and self.a2_ok and self.a3_ok and self.a4_ok


def check_assumptions(econ: EconomyParams) -> AssumptionReport:
    """Evaluate the standing assumptions; never raises.

    A bounded-support productivity distribution fails the first assumption
    and triggers a warning rather than an error.
    """
    dist, m = econ.dist, econ.m
    bounded = math.isfinite(dist.support_upper)
    if bounded:
        warnings.warn("productivity distribution has bounded support", stacklevel=2)
    try:
        mean_finite = math.isfinite(dist.mean())
    except Exception:
        mean_finite = False
    a1 = mean_finite and not bounded

    a2 = m > 0

    tail_mass = 1.0 - float(dist.cdf(1.0 / m))
    if tail_mass > 0:
        a3_value = econ.beta * m * float(dist.partial_expectation(1.0 / m)) / tail_mass
    else:
        a3_value = math.nan
    a3 = bool(a3_value > 1)

    sigma = econ.tech.elasticity_limit()
    return AssumptionReport(a1, a2, a3, sigma > 1, a3_value, sigma)
