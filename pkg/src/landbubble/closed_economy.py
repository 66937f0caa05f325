"""Closed-economy equilibrium: wealth/price maps, steady states, growth and transitions.

The aggregate state is ``(K, zbar)``: capital and the productivity cutoff
above which agents invest. Writing ``b(zbar) = β(λΦ(zbar) + 1 - λ)`` for the
land share of wealth,

    W = F(K,1) / (1 - b),      P = b W,
    K' = βλ W ∫_{zbar}^∞ z dΦ,
    zbar_t = (P_{t+1} + F_X(K_{t+1},1)) / (F_K(K_{t+1},1) P_t).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .bubble import Regime, fundamental_values, montrucchio_test
from .economy import (
    CES,
    EconomyParams,
    TwoSectorLinear,
    check_assumptions,
    eval_production,
    leverage_threshold,
)
from .errors import AssumptionViolation, DomainError, NoConvergence, NoSteadyState, SeriesTooShort
from .numerics import Bracket, SplinePath, expand_bracket, find_root, front_loaded_knots, minimize

_SHARE_SLACK = 1e-12


@dataclass(frozen=True)
class StateVars:
    K: float
    zbar: float

    def __post_init__(self):
        if not (self.K > 0 and math.isfinite(self.K)):
            raise DomainError(f"capital must be positive and finite, got {self.K}")


def _land_share(econ: EconomyParams, zbar):
    b = econ.savings_share(zbar)
    if np.any(b < -_SHARE_SLACK):
        raise DomainError(
            f"zbar={zbar} lies below the price-positivity bound {econ.zbar_min():.12g}"
        )
    return np.maximum(b, 0.0)


def wealth_price_maps(econ: EconomyParams, s: StateVars) -> tuple[float, float]:
    """Aggregate wealth ``W`` and land price ``P`` at state ``s``."""
    b = float(_land_share(econ, s.zbar))
    F = eval_production(econ.tech, s.K).F
    W = F / (1.0 - b)
    return W, b * W


def capital_multiplier(econ: EconomyParams, zbar):
    """``C(zbar)`` with ``K' = C(zbar) F(K,1)``."""
    b = _land_share(econ, zbar)
    return econ.beta * econ.lam * econ.dist.partial_expectation(zbar) / (1.0 - b)


def step_capital(econ: EconomyParams, s: StateVars) -> float:
    W, _ = wealth_price_maps(econ, s)
    return econ.beta * econ.lam * W * float(econ.dist.partial_expectation(s.zbar))


def implied_threshold(econ: EconomyParams, s_t: StateVars, s_next: StateVars) -> float:
    """Cutoff at ``t`` that makes the land return equal the marginal investor's return."""
    _, P_t = wealth_price_maps(econ, s_t)
    if not P_t > 0:
        raise DomainError("land price is zero at the current state")
    _, P_next = wealth_price_maps(econ, s_next)
    prod = eval_production(econ.tech, s_next.K)
    return (P_next + prod.F_X) / (prod.F_K * P_t)


# ---------------------------------------------------------------------------
# Long-run growth
# ---------------------------------------------------------------------------


def psi(econ: EconomyParams, v, lam: float | None = None):
    """``Ψ(v, λ) = v(1 - β(λΦ(v) + 1 - λ)) - βλ ∫_v^∞ z dΦ``; its root is ``G/m``."""
    lam = econ.lam if lam is None else lam
    beta, dist = econ.beta, econ.dist
    return v * (1.0 - beta * (lam * dist.cdf(v) + 1.0 - lam)) - beta * lam * dist.partial_expectation(v)


@dataclass(frozen=True)
class GrowthSolution:
    G: float
    v: float
    lam: float
    residual: float
    lambda_bar: float

    @property
    def bubbly(self) -> bool:
        return self.lam > self.lambda_bar


def solve_growth_rate(econ: EconomyParams) -> GrowthSolution:
    """Asymptotic gross growth rate ``G = m v`` with ``Ψ(v, λ) = 0``."""
    report = check_assumptions(econ)
    if not report.a3_ok:
        raise AssumptionViolation(f"productive wealth cannot grow (value {report.a3_value:.6g} <= 1)")
    m = econ.m
    hi = 2.0 * econ.beta * econ.lam * econ.dist.mean() / (1.0 - econ.beta) + 1.0
    v = find_root(lambda x: float(psi(econ, x)), Bracket.around(lambda x: float(psi(econ, x)), 0.0, hi))
    return GrowthSolution(m * v, v, econ.lam, float(psi(econ, v)), leverage_threshold(econ))


def unstable_eigenvalue(econ: EconomyParams, zbar: float) -> float:
    """``1 + b(1-b)/(βλ zbar φ(zbar))``: the explosive root of the linearized dynamics."""
    b = float(econ.savings_share(zbar))
    if not 0 < b < 1:
        raise DomainError(f"land share {b} outside (0, 1)")
    return 1.0 + b * (1.0 - b) / (econ.beta * econ.lam * zbar * float(econ.dist.pdf(zbar)))


def saddle_eigenvalues(econ: EconomyParams, g: GrowthSolution) -> tuple[float, float]:
    """Eigenvalues of the dynamics linearized around ``(1/K, zbar) = (0, G/m)``."""
    if not g.G > 1:
        raise DomainError(f"saddle analysis needs G > 1, got {g.G}")
    return 1.0 / g.G, unstable_eigenvalue(econ, g.v)


# ---------------------------------------------------------------------------
# Steady state
# ---------------------------------------------------------------------------


def steady_capital(econ: EconomyParams, zbar: float) -> float:
    """Capital solving ``K = C(zbar) F(K, 1)``.

    Returns ``inf`` when capital grows without bound at this cutoff
    (``1/C <= m``) and 0 when it shrinks to zero.
    """
    C = float(capital_multiplier(econ, zbar))
    if C <= 0:
        return 0.0
    inv = 1.0 / C
    tech = econ.tech
    if inv <= econ.m:
        return math.inf
    if isinstance(tech, TwoSectorLinear):
        return tech.D / (inv - tech.m)
    if isinstance(tech, CES):
        q = inv - (1.0 - tech.delta)  # required f(K,1)/K
        A, a, rho = tech.A, tech.alpha, tech.rho
        if tech.cobb_douglas:
            return (q / A) ** (1.0 / (a - 1.0))
        base = ((q / A) ** (1.0 - rho) - a) / (1.0 - a)
        if base <= 0:
            return 0.0
        return base ** (1.0 / (rho - 1.0))

    def gap(logk):
        K = math.exp(logk)
        return tech.evaluate(K)[0] / K - inv

    return math.exp(find_root(gap, expand_bracket(gap, -5.0, 5.0)))


def _steady_z_residual(econ: EconomyParams, zbar: float) -> float:
    K = steady_capital(econ, zbar)
    if not (0 < K < math.inf):
        return math.nan
    b = float(econ.savings_share(zbar))
    if b <= 0:
        return -math.inf
    F, F_K, F_X = econ.tech.evaluate(K)
    return zbar - (1.0 + (1.0 - b) / b * F_X / F) / F_K


@dataclass(frozen=True)
class SteadyState:
    K: float
    zbar: float
    W: float
    P: float
    R: float
    rent: float
    residuals: tuple[float, float]
    roots: tuple[float, ...] = ()

    @property
    def price_rent(self) -> float:
        return self.P / self.rent


def solve_steady_state(econ: EconomyParams, scan_points: int = 400) -> SteadyState:
    """Interior steady state ``(K, zbar)``.

    For each cutoff the capital stock follows in closed form; the cutoff then
    solves the stationary arbitrage condition. The cutoff axis is scanned on
    a grid clustered at the price-positivity bound, every sign change is
    polished with Brent's method and the lowest root is returned. All roots
    are listed in ``roots``.
    """
    lam_bar = leverage_threshold(econ)
    if econ.lam >= lam_bar:
        raise NoSteadyState(f"leverage {econ.lam} is not below the threshold {lam_bar:.10g}")
    z_lo = econ.zbar_min()
    span = max(2.0 / (econ.beta * econ.m), econ.dist.quantile(1.0 - 0.5 / econ.lam) * 2.0, 1.0)
    for _ in range(60):
        top = _steady_z_residual(econ, z_lo + span)
        if not top <= 0:  # positive, or capital already degenerate up here
            break
        span *= 2.0
    grid = z_lo + span * np.geomspace(1e-10, 1.0, scan_points)
    vals = np.array([_steady_z_residual(econ, z) for z in grid])

    roots = []
    for i in range(len(grid) - 1):
        a, b = vals[i], vals[i + 1]
        if np.isfinite(a) and np.isfinite(b) and (a < 0) != (b < 0):
            if b == 0:
                continue
            br = Bracket(grid[i], grid[i + 1], a, b) if a != 0 else None
            roots.append(grid[i] if br is None else find_root(lambda z: _steady_z_residual(econ, z), br))
    if not roots:
        raise NoSteadyState("no cutoff satisfies the stationary arbitrage condition")

    roots = [float(r) for r in roots]
    z = roots[0]
    K = steady_capital(econ, z)
    W, P = wealth_price_maps(econ, StateVars(K, z))
    prod = eval_production(econ.tech, K)
    res_K = float(capital_multiplier(econ, z)) * prod.F / K - 1.0
    res_z = _steady_z_residual(econ, z)
    return SteadyState(
        K=K, zbar=z, W=W, P=P, R=1.0 + prod.rent / P, rent=prod.rent,
        residuals=(float(res_K), float(res_z)), roots=tuple(roots),
    )


def simulate_capital(econ: EconomyParams, K0: float, zbar_path) -> np.ndarray:
    """Capital path ``K_0..K_T+1`` implied by a cutoff path ``zbar_0..zbar_T``."""
    zbar_path = np.asarray(zbar_path, dtype=float)
    C = capital_multiplier(econ, zbar_path)
    K = np.empty(zbar_path.size + 1)
    K[0] = K0
    for t in range(zbar_path.size):
        K[t + 1] = C[t] * econ.tech.evaluate(K[t])[0]
    return K


def simulate_dynamics(econ: EconomyParams, K0: float, periods: int, zbar_of_K) -> np.ndarray:
    """Capital path under a feedback cutoff rule ``zbar_t = zbar_of_K(K_t)``."""
    K = np.empty(periods + 1)
    K[0] = K0
    for t in range(periods):
        K[t + 1] = step_capital(econ, StateVars(K[t], zbar_of_K(K[t])))
    return K


# ---------------------------------------------------------------------------
# Transition paths
# ---------------------------------------------------------------------------


def terminal_cutoff(econ: EconomyParams) -> tuple[float, bool]:
    """Long-run cutoff used to pin the end of a path, and whether it is bubbly."""
    if econ.lam < leverage_threshold(econ):
        return solve_steady_state(econ).zbar, False
    return solve_growth_rate(econ).v, True


def _path_residuals(econ: EconomyParams, K0: float, Z: np.ndarray):
    """Arbitrage residuals for a batch of cutoff paths.

    ``Z`` has shape ``(T+1, n)``: one candidate path ``zbar_0..zbar_T`` per
    column. Returns ``(e, K)`` with ``e[t] = zbar_t^implied - zbar_t`` for
    ``t < T`` and the capital paths ``K_0..K_{T+1}``; columns that leave the
    valid region get NaN residuals.
    """
    beta, lam, dist, tech = econ.beta, econ.lam, econ.dist, econ.tech
    b = beta * (lam * dist.cdf(Z) + 1.0 - lam)
    bad = np.any(b <= 0, axis=0)
    bpos = np.where(b > 0, b, 0.5)
    C = beta * lam * dist.partial_expectation(Z) / (1.0 - bpos)
    K = np.empty((Z.shape[0] + 1, Z.shape[1]))
    K[0] = K0
    with np.errstate(all="ignore"):
        if Z.shape[1] == 1:
            # scalar recursion: far less overhead than one-element arrays
            k = float(K0)
            for t, c in enumerate(C[:, 0].tolist(), start=1):
                k = c * tech.evaluate(k)[0] if k > 0 and math.isfinite(k) else math.nan
                K[t, 0] = k
        else:
            for t in range(Z.shape[0]):
                K[t + 1] = C[t] * tech.evaluate(K[t])[0]
        bad |= np.any(~(K > 0) | ~np.isfinite(K), axis=0)
        K_safe = np.where(bad, 1.0, K)
        F, F_K, F_X = tech.evaluate(K_safe)
        P = bpos / (1.0 - bpos) * F[:-1]
        e = (P[1:] + F_X[1:-1]) / (F_K[1:-1] * P[:-1]) - Z[:-1]
    e[:, bad] = np.nan
    return e, K


@dataclass(frozen=True)
class SegmentSolution:
    zbar: np.ndarray  # 0..T, last entry pinned
    K: np.ndarray  # 0..T+1
    residuals: np.ndarray
    error: float
    bubbly: bool
    spline_error: float


def _newton_polish(econ, K0, z_free, z_T, max_iter=60):
    """Damped Newton on the arbitrage residuals with a finite-difference Jacobian."""

    def residual(x):
        e, _ = _path_residuals(econ, K0, np.append(x, z_T)[:, None])
        return e[:, 0]

    x = z_free.copy()
    r = residual(x)
    err = float(r @ r) if np.all(np.isfinite(r)) else math.inf
    n = x.size
    for _ in range(max_iter):
        if err <= 1e-28 or not math.isfinite(err):
            break
        h = 1e-7 * np.maximum(1.0, np.abs(x))
        Z = np.tile(np.append(x, z_T)[:, None], (1, n))
        Z[np.arange(n), np.arange(n)] += h
        e, _ = _path_residuals(econ, K0, Z)
        if not np.all(np.isfinite(e)):
            break
        jac = (e - r[:, None]) / h[None, :]
        try:
            dx = np.linalg.solve(jac, -r)
        except np.linalg.LinAlgError:
            dx = np.linalg.lstsq(jac, -r, rcond=None)[0]
        step = 1.0
        improved = False
        for _ in range(40):
            x_new = x + step * dx
            r_new = residual(x_new)
            err_new = float(r_new @ r_new)
            if math.isfinite(err_new) and err_new < err:
                improved = True
                break
            step *= 0.5
        if not improved:
            break
        progress = err_new / err
        x, r, err = x_new, r_new, err_new
        if progress > 0.999:
            break
    return x, err


def solve_segment(
    econ: EconomyParams,
    K0: float,
    T: int = 200,
    J: int = 10,
    tol: float = 1e-10,
    zbar_T: float | None = None,
    spline_iter: int = 100,
) -> SegmentSolution:
    """Perfect-foresight path under permanently constant parameters.

    The cutoff path is first parameterized by ``J`` free spline knots (the
    terminal knot pinned at the long-run cutoff) and fitted by Nelder-Mead;
    the full path is then polished period by period with damped Newton.
    The spline stage only supplies a starting point, so its iteration budget
    (``spline_iter`` per knot) is small.
    """
    if not (K0 > 0 and math.isfinite(K0)):
        raise DomainError(f"initial capital must be positive, got {K0}")
    if T < 2 or J < 1 or J > T:
        raise ValueError(f"need T >= 2 and 1 <= J <= T, got T={T}, J={J}")
    if zbar_T is None:
        zbar_T, bubbly = terminal_cutoff(econ)
    else:
        bubbly = econ.lam >= leverage_threshold(econ)

    knots = front_loaded_knots(T, J + 1)

    def spline_path(x):
        return SplinePath(knots, tuple(x) + (zbar_T,), T).values()

    def spline_error(x):
        e, _ = _path_residuals(econ, K0, spline_path(x)[:, None])
        return float(np.sum(e**2))

    fit = minimize(spline_error, np.full(J, zbar_T), tol=1e-8, max_iter=spline_iter * J, restarts=1)
    candidates = [(fit.fun, spline_path(fit.x)[:-1]), (spline_error(np.full(J, zbar_T)), np.full(T, zbar_T))]
    start = min(candidates, key=lambda c: c[0])[1]

    x, err = _newton_polish(econ, K0, start, zbar_T)
    z = np.append(x, zbar_T)
    e, K = _path_residuals(econ, K0, z[:, None])
    if not (err <= tol):
        raise NoConvergence(
            f"transition error {err:.3e} exceeds tolerance {tol:.1e}", best=z, error=err
        )
    return SegmentSolution(z, K[:, 0], e[:, 0], err, bubbly, fit.fun)


@dataclass(frozen=True)
class EquilibriumPath:
    """Realized equilibrium path; one row per period.

    ``R[t]`` is the gross return on land from ``t`` to ``t+1`` as priced at
    ``t``; across a surprise date it differs from the realized return.
    ``output`` holds ``F(K_t, 1)`` for the wealth identity check.
    """

    t: np.ndarray
    K: np.ndarray
    zbar: np.ndarray
    W: np.ndarray
    P: np.ndarray
    rent: np.ndarray
    R: np.ndarray
    V: np.ndarray
    regime: tuple[str, ...]
    output: np.ndarray
    mpk_next: np.ndarray
    surprise_dates: tuple[int, ...] = ()
    error: float = 0.0
    segment_errors: tuple[float, ...] = ()
    header: tuple[str, ...] = field(
        default=("t", "K", "zbar", "W", "P", "rent", "R", "price_rent", "V", "regime"), repr=False
    )

    @property
    def price_rent(self) -> np.ndarray:
        return self.P / self.rent

    def __len__(self):
        return self.t.size

    def index_of(self, t: int) -> int:
        idx = np.flatnonzero(self.t == t)
        if idx.size == 0:
            raise KeyError(t)
        return int(idx[0])

    def validate(self, tol: float = 1e-8) -> None:
        """Check the accounting and arbitrage identities; raise DomainError on failure."""
        wealth_gap = np.abs(self.W - (self.output + self.P)) / np.abs(self.W)
        if np.any(~(wealth_gap <= tol)):
            raise DomainError(f"wealth identity violated (max rel gap {np.nanmax(wealth_gap):.3e})")
        n = self.t.size
        surprises = set(self.surprise_dates)
        for i in range(n):
            if not np.isnan(self.mpk_next[i]):
                marginal = self.zbar[i] * self.mpk_next[i]
                if abs(marginal - self.R[i]) > tol * abs(self.R[i]):
                    raise DomainError(f"marginal-investor identity violated at t={int(self.t[i])}")
            if i + 1 < n and int(self.t[i + 1]) not in surprises:
                realized = (self.P[i + 1] + self.rent[i + 1]) / self.P[i]
                if abs(realized - self.R[i]) > tol * abs(self.R[i]):
                    raise DomainError(f"no-arbitrage identity violated at t={int(self.t[i])}")

    def rows(self):
        pr = self.price_rent
        for i in range(self.t.size):
            yield (
                int(self.t[i]), self.K[i], self.zbar[i], self.W[i], self.P[i], self.rent[i],
                self.R[i], pr[i], self.V[i], self.regime[i],
            )

    def prepend_steady_state(self, econ: EconomyParams, ss: SteadyState, periods: int) -> "EquilibriumPath":
        """Add ``periods`` rows at the steady state ``ss`` before ``t = 0``.

        The first original row becomes a surprise date.
        """
        if periods <= 0:
            return self
        first = int(self.t[0])
        pre = np.arange(first - periods, first)

        def cat(values, head):
            return np.concatenate([np.full(periods, head, dtype=float), values])

        F, F_K, _ = econ.tech.evaluate(ss.K)
        return EquilibriumPath(
            t=np.concatenate([pre, self.t]),
            K=cat(self.K, ss.K),
            zbar=cat(self.zbar, ss.zbar),
            W=cat(self.W, ss.W),
            P=cat(self.P, ss.P),
            rent=cat(self.rent, ss.rent),
            R=cat(self.R, ss.R),
            V=cat(self.V, ss.P),
            regime=(Regime.FUNDAMENTAL.value,) * periods + self.regime,
            output=cat(self.output, F),
            mpk_next=cat(self.mpk_next, F_K),
            surprise_dates=tuple(sorted(set(self.surprise_dates) | {first})),
            error=self.error,
            segment_errors=self.segment_errors,
        )


def _normalize_schedule(schedule) -> list[tuple[int, EconomyParams]]:
    if isinstance(schedule, EconomyParams):
        return [(0, schedule)]
    segs = sorted(((int(s), e) for s, e in schedule), key=lambda p: p[0])
    if not segs or segs[0][0] != 0:
        raise ValueError("the schedule must start at t = 0")
    if any(b[0] <= a[0] for a, b in zip(segs, segs[1:])):
        raise ValueError("schedule start dates must be distinct")
    return segs


def _segment_regime(econ: EconomyParams, seg: SegmentSolution) -> str:
    prod = econ.tech.evaluate(seg.K[:-1])
    b = np.maximum(econ.savings_share(seg.zbar), 0.0)
    P = b / (1.0 - b) * prod[0]
    if np.any(P <= 0):
        return Regime.INCONCLUSIVE.value
    try:
        return montrucchio_test(prod[2], P).classification.value
    except SeriesTooShort:
        return Regime.INCONCLUSIVE.value


def solve_transition(schedule, K0: float, T: int = 200, J: int = 10, tol: float = 1e-10) -> EquilibriumPath:
    """Equilibrium path under a piecewise-constant parameter schedule.

    ``schedule`` is either one ``EconomyParams`` or a list of
    ``(start_period, EconomyParams)`` pairs beginning at 0. At each start date
    agents are surprised and believe the new parameters permanent: a full
    ``T``-period path is solved from the capital stock inherited at that date
    and followed until the next surprise. The final segment is reported for
    all ``T + 1`` periods.

    Fundamental values come from each segment's believed path; the regime
    label is the Montrucchio verdict on that believed path.
    """
    segments = _normalize_schedule(schedule)
    starts = [s for s, _ in segments]
    for a, b in zip(starts, starts[1:]):
        if b - a > T:
            raise ValueError(f"segment from {a} to {b} is longer than the horizon {T}")

    cols = {k: [] for k in ("t", "K", "zbar", "W", "P", "rent", "R", "V", "output", "mpk_next")}
    regimes: list[str] = []
    errors = []
    K_start = K0
    for i, (start, econ) in enumerate(segments):
        seg = solve_segment(econ, K_start, T=T, J=J, tol=tol)
        errors.append(seg.error)
        n_keep = (starts[i + 1] - start) if i + 1 < len(segments) else T + 1

        K = seg.K
        F, F_K, F_X = econ.tech.evaluate(K)
        b = np.maximum(econ.savings_share(seg.zbar), 0.0)
        W = F[:-1] / (1.0 - b)
        P = b * W
        # price one period past the horizon, with the cutoff held at its pin
        b_end = b[-1]
        P_after = b_end / (1.0 - b_end) * F[-1]
        P_ext = np.append(P, P_after)
        R = (P_ext[1:] + F_X[1:]) / P
        mpk_next = F_K[1:].copy()
        mpk_next[-1] = np.nan  # the pinned last period is not an arbitrage condition
        V = fundamental_values(F_X, R, tail_mode="geometric_extrapolate", strict=False)
        label = _segment_regime(econ, seg)

        sl = slice(0, n_keep)
        cols["t"].append(np.arange(start, start + n_keep))
        cols["K"].append(K[sl])
        cols["zbar"].append(seg.zbar[sl])
        cols["W"].append(W[sl])
        cols["P"].append(P[sl])
        cols["rent"].append(F_X[sl])
        cols["R"].append(R[sl])
        cols["V"].append(V[sl])
        cols["output"].append(F[sl])
        cols["mpk_next"].append(mpk_next[sl])
        regimes.extend([label] * n_keep)
        K_start = float(K[n_keep]) if i + 1 < len(segments) else K_start

    arrays = {k: np.concatenate(v) for k, v in cols.items()}
    return EquilibriumPath(
        t=arrays["t"].astype(int),
        K=arrays["K"],
        zbar=arrays["zbar"],
        W=arrays["W"],
        P=arrays["P"],
        rent=arrays["rent"],
        R=arrays["R"],
        V=arrays["V"],
        regime=tuple(regimes),
        output=arrays["output"],
        mpk_next=arrays["mpk_next"],
        surprise_dates=tuple(starts[1:]),
        error=float(sum(errors)),
        segment_errors=tuple(errors),
    )
