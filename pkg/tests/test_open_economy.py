import math

import numpy as np
import pytest
from scipy import integrate

from landbubble.bubble import Regime
from landbubble.economy import Exponential, TwoSectorLinear, leverage_threshold
from landbubble.errors import AssumptionViolation, AtThreshold, DomainError, ParameterError
from landbubble.open_economy import (
    no_arbitrage_gap,
    psi,
    rate_curve,
    risk_premium,
    solve_trend_stationary,
)

from distributions import QuadExponential

GAMMA = math.log(10.0)


def implied_leverage(econ, R, regime):
    """Closed-form inverse of the rate map for exponential productivity."""
    g, b, m = econ.dist.gamma, econ.beta, econ.m
    if regime is Regime.FUNDAMENTAL:
        return g * (1 - b * R) / (b * m) * math.exp(g * R / m)
    return g * (1 - b) / (b * m) * R * math.exp(g * R / m)


class TestRiskPremium:
    def test_closed_form_example(self, linear):
        assert float(risk_premium(linear, 1.0)) == pytest.approx(0.03271, abs=5e-6)

    @pytest.mark.parametrize("R", [0.5, 1.0, 1.1, 2.0])
    def test_matches_quadrature(self, linear, R):
        m = linear.m
        direct, _ = integrate.quad(lambda z: (m * z - R) * GAMMA * math.exp(-GAMMA * z), R / m, np.inf)
        assert float(risk_premium(linear, R)) == pytest.approx(direct, rel=1e-10)
        quad_econ = linear.replace(dist=QuadExponential(GAMMA))
        assert float(risk_premium(quad_econ, R)) == pytest.approx(direct, rel=1e-8)

    def test_decreasing_and_vanishing(self, linear):
        values = risk_premium(linear, np.linspace(0.5, 5, 50))
        assert np.all(np.diff(values) < 0)
        assert float(risk_premium(linear, 200.0)) < 1e-100

    @pytest.mark.parametrize("c", [0.5, 2.0, 7.0])
    def test_homogeneity(self, linear, c):
        scaled = linear.replace(tech=TwoSectorLinear(0.92 * c, 1.0))
        assert float(risk_premium(scaled, 1.1 * c)) == pytest.approx(c * float(risk_premium(linear, 1.1)), rel=1e-12)

    def test_nonpositive_rate(self, linear):
        with pytest.raises(DomainError):
            risk_premium(linear, 0.0)


class TestPsi:
    def test_branches_meet_at_unit_rate(self, linear):
        lam_bar = leverage_threshold(linear)
        assert 1 / lam_bar == pytest.approx(0.6214, abs=1e-4)
        for regime in (Regime.FUNDAMENTAL, Regime.BUBBLY):
            assert psi(linear, 1.0, regime) == pytest.approx(1 / lam_bar, rel=1e-13)

    def test_monotone(self, linear):
        f = [psi(linear, R, Regime.FUNDAMENTAL) for R in np.linspace(1, 1 / 0.95 - 1e-6, 200)]
        b = [psi(linear, R, Regime.BUBBLY) for R in np.linspace(1, 10, 200)]
        assert np.all(np.diff(f) > 0)
        assert np.all(np.diff(b) < 0)

    def test_limits(self, linear):
        assert psi(linear, 1 / 0.95 - 1e-12, Regime.FUNDAMENTAL) > 1e8
        assert psi(linear, 50.0, Regime.BUBBLY) < 1e-40

    @pytest.mark.parametrize("R,regime", [(0.99, "Fundamental"), (1 / 0.95, "Fundamental"), (0.5, "Bubbly")])
    def test_domain(self, linear, R, regime):
        with pytest.raises(DomainError):
            psi(linear, R, regime)

    def test_inconclusive_regime_rejected(self, linear):
        with pytest.raises(DomainError):
            psi(linear, 1.0, Regime.INCONCLUSIVE)


class TestTrendStationary:
    @pytest.mark.parametrize("lam", [1.0, 1.2, 1.5, 1.6])
    def test_fundamental(self, linear, lam):
        econ = linear.replace(lam=lam)
        eq = solve_trend_stationary(econ)
        assert eq.regime is Regime.FUNDAMENTAL
        assert 1 < eq.R < 1 / 0.95
        assert abs(0.95 * (eq.R + lam * eq.pi_R) - 1) <= 1e-10
        assert (eq.G, eq.B, eq.bubble_coef) == (1.0, 0.0, 0.0)
        assert eq.fundamental_level == pytest.approx(1 / (eq.R - 1))
        assert implied_leverage(econ, eq.R, eq.regime) == pytest.approx(lam, rel=1e-10)
        assert np.allclose(eq.capital(np.arange(10)), 1.0)

    @pytest.mark.parametrize("lam", [1.62, 2.0, 3.0, 5.0])
    def test_bubbly(self, linear, lam):
        econ = linear.replace(lam=lam)
        eq = solve_trend_stationary(econ, K0=2.0)
        assert eq.regime is Regime.BUBBLY
        assert eq.G == eq.R > 1
        assert abs(0.95 * (eq.R + lam * eq.pi_R) - eq.R) <= 1e-10
        assert eq.B == pytest.approx(-1 / (eq.R - 1))
        assert implied_leverage(econ, eq.R, eq.regime) == pytest.approx(lam, rel=1e-10)
        a = 0.95 * (lam * (1 - math.exp(-GAMMA * eq.zbar)) + 1 - lam)
        assert eq.alpha_coef == pytest.approx(a, rel=1e-14)
        assert eq.bubble_coef == pytest.approx(a / (1 - a) * 0.92 * 2.0, rel=1e-14)

    def test_bubbly_price_to_wealth(self, linear):
        eq = solve_trend_stationary(linear.replace(lam=2.0))
        t = np.array([0.0, 100.0, 400.0])
        wealth = eq.m * eq.capital(t) / (1 - eq.alpha_coef)
        ratio = eq.price(t) / wealth
        assert abs(ratio[-1] - eq.alpha_coef) < abs(ratio[0] - eq.alpha_coef)
        assert ratio[-1] == pytest.approx(eq.alpha_coef, rel=1e-6)
        assert eq.initial_wealth() == pytest.approx(wealth[0])

    def test_initial_wealth_only_bubbly(self, linear):
        with pytest.raises(DomainError):
            solve_trend_stationary(linear).initial_wealth()

    def test_no_arbitrage_and_decomposition(self, linear):
        eq = solve_trend_stationary(linear.replace(lam=2.5), K0=3.0)
        assert no_arbitrage_gap(eq, 100) <= 1e-12
        t = np.arange(101.0)
        bubble = eq.price(t) - eq.D / (eq.R - 1)
        slope = np.polyfit(t, np.log(bubble), 1)[0]
        assert abs(slope - math.log(eq.R)) <= 1e-10
        assert np.all(eq.fundamental_value(t) < eq.price(t))

    def test_fundamental_price_flat(self, linear):
        eq = solve_trend_stationary(linear.replace(lam=1.3))
        assert no_arbitrage_gap(eq) <= 1e-12
        assert np.all(eq.price(np.arange(20)) == eq.fundamental_level)

    def test_at_threshold(self, linear):
        lam_bar = leverage_threshold(linear)
        with pytest.raises(AtThreshold):
            solve_trend_stationary(linear.replace(lam=lam_bar))

    @pytest.mark.parametrize("eps", [1e-3, 1e-5])
    def test_rate_continuous_at_threshold(self, linear, eps):
        lam_bar = leverage_threshold(linear)
        lo = solve_trend_stationary(linear.replace(lam=lam_bar - eps))
        hi = solve_trend_stationary(linear.replace(lam=lam_bar + eps))
        assert (lo.regime, hi.regime) == (Regime.FUNDAMENTAL, Regime.BUBBLY)
        assert 0 < lo.R - 1 < 10 * eps and 0 < hi.R - 1 < 10 * eps

    def test_bad_inputs(self, linear, baseline):
        with pytest.raises(ParameterError):
            solve_trend_stationary(linear, K0=0.0)
        with pytest.raises(ParameterError):
            solve_trend_stationary(linear, D=-1.0)
        with pytest.raises(ParameterError):
            solve_trend_stationary(baseline)  # no rent for a CES economy unless given
        assert solve_trend_stationary(baseline, D=1.0).R > 1

    def test_assumption_violation(self, linear):
        poor = linear.replace(tech=TwoSectorLinear(0.2, 1.0), dist=Exponential(20.0))
        with pytest.raises(AssumptionViolation):
            solve_trend_stationary(poor)


class TestRateCurve:
    def test_v_shape(self, linear):
        left = rate_curve(linear, np.arange(1.0, 1.56, 0.05))
        right = rate_curve(linear, np.arange(1.65, 3.01, 0.05))
        assert all(p.regime is Regime.FUNDAMENTAL for p in left)
        assert all(p.regime is Regime.BUBBLY for p in right)
        assert np.all(np.diff([p.R for p in left]) < 0)
        assert np.all(np.diff([p.R for p in right]) > 0)

    def test_examples(self, linear):
        assert [round(p.R, 5) for p in rate_curve(linear, [1.0, 1.3, 1.6])] == [1.02165, 1.0113, 1.00035]
        assert [round(p.R, 5) for p in rate_curve(linear, [1.7, 2.0, 3.0])] == [1.01569, 1.06259, 1.18203]
