"""Productivity laws used only by the tests."""

from dataclasses import dataclass

import numpy as np

from landbubble.economy import ProductivityDistribution


@dataclass(frozen=True)
class Uniform(ProductivityDistribution):
    """Bounded-support law; only used to exercise warnings and quadrature fallbacks."""

    hi: float = 3.0

    @property
    def support_upper(self):
        return self.hi

    def cdf(self, z):
        return np.clip(np.asarray(z, dtype=float) / self.hi, 0.0, 1.0)

    def pdf(self, z):
        return np.where((np.asarray(z) >= 0) & (np.asarray(z) <= self.hi), 1.0 / self.hi, 0.0)


@dataclass(frozen=True)
class QuadExponential(ProductivityDistribution):
    """Exponential law that only exposes cdf/pdf, so every other method uses quadrature."""

    gamma: float

    def cdf(self, z):
        return 1.0 - np.exp(-self.gamma * np.asarray(z, dtype=float))

    def pdf(self, z):
        return self.gamma * np.exp(-self.gamma * z)


@dataclass(frozen=True)
class PointMass(ProductivityDistribution):
    """Degenerate law at ``z0``; violates the continuity assumption on purpose."""

    z0: float

    def cdf(self, z):
        return np.where(np.asarray(z) >= self.z0, 1.0, 0.0)

    def pdf(self, z):
        return np.zeros_like(np.asarray(z, dtype=float))

    def partial_expectation(self, zbar):
        return np.where(np.asarray(zbar) <= self.z0, self.z0, 0.0)

    def risk_premium(self, m, R):
        return max(0.0, m * self.z0 - R)

    def mean(self):
        return self.z0

    def sample(self, rng, size):
        return np.full(size, self.z0)
