"""Command-line front end: ``landbubble <command> [--config FILE] [--out DIR]``.

Every command writes CSV files into ``--out``. Numbers use 12 significant
digits and files are replaced atomically, so identical inputs give
byte-identical outputs. Failures exit with 2 (config), 3 (no convergence)
or 4 (domain/assumption) and print a one-line JSON error record to stderr.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
import sys
import tempfile
from pathlib import Path

import click
import numpy as np

from .bubble import Regime, fundamental_value, implied_rates, montrucchio_test
from .closed_economy import (
    saddle_eigenvalues,
    solve_growth_rate,
    solve_steady_state,
    solve_transition,
)
from .config import RunConfig, describe_keys, load_config
from .economy import Exponential, leverage_threshold
from .errors import EXIT_CODES, ConfigError, ModelError
from .experiments import leverage_and_productivity_booms, phase_diagram
from .open_economy import rate_curve, solve_trend_stationary
from .wealth import WealthProcessSpec, simulate_wealth_panel, solve_pareto_exponent

PATH_HEADER = ("t", "K", "zbar", "W", "P", "rent", "R", "price_rent", "V", "regime")


def fmt(value) -> str:
    if isinstance(value, Regime):
        return value.value
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return "%.12g" % float(value)
    return str(value)


def render_csv(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([fmt(v) for v in row])
    return buf.getvalue()


def write_atomic(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


class Context:
    def __init__(self, config: RunConfig, out: Path, seed: int, quiet: bool):
        self.config = config
        self.out = out
        self.seed = seed
        self.quiet = quiet

    def emit(self, name: str, header, rows) -> Path:
        path = self.out / name
        write_atomic(path, render_csv(header, rows))
        self.say(f"wrote {path}")
        return path

    def say(self, message: str) -> None:
        if not self.quiet:
            click.echo(message)


@click.group(context_settings={"help_option_names": ["-h", "--help"]}, epilog="Config keys:\n\n\b\n" + describe_keys())
@click.option("--config", "config_path", type=click.Path(dir_okay=False), default=None, help="Flat key = value config file.")
@click.option("--out", type=click.Path(file_okay=False), default=".", show_default=True, help="Output directory.")
@click.option("--seed", type=click.IntRange(0, 2**64 - 1), default=0, show_default=True, help="Monte Carlo seed.")
@click.option("--quiet", is_flag=True, help="Suppress progress messages.")
@click.pass_context
def cli(ctx, config_path, out, seed, quiet):
    """Leverage thresholds, equilibrium paths, bubble tests and Pareto tails."""
    ctx.obj = Context(load_config(config_path), Path(out), seed, quiet)


@cli.command()
@click.pass_obj
def phase(obj: Context):
    """Threshold leverage across elasticities of substitution (phase.csv, phase_regimes.csv)."""
    cfg = obj.config
    diagram = phase_diagram(cfg.economy(), cfg["grid.inv_rho"], cfg["grid.lambda"])
    diagram.validate()
    obj.emit("phase.csv", ("inv_rho", "lambda_bar"), diagram.rows)
    obj.emit("phase_regimes.csv", ("inv_rho", "lambda", "regime"), diagram.regimes)


@cli.command()
@click.pass_obj
def steady(obj: Context):
    """Interior steady state of the closed economy (steady.csv)."""
    econ = obj.config.economy()
    ss = solve_steady_state(econ)
    row = (ss.K, ss.zbar, ss.W, ss.P, ss.R, ss.rent, ss.price_rent, ss.residuals[0], ss.residuals[1], len(ss.roots))
    obj.emit("steady.csv", ("K", "zbar", "W", "P", "R", "rent", "price_rent", "residual_K", "residual_z", "n_roots"), [row])


@cli.command()
@click.pass_obj
def growth(obj: Context):
    """Long-run growth rate and, when G > 1, the saddle-path eigenvalues (growth.csv)."""
    econ = obj.config.economy()
    g = solve_growth_rate(econ)
    eig = saddle_eigenvalues(econ, g) if g.G > 1 else (math.nan, math.nan)
    regime = Regime.BUBBLY if g.bubbly else Regime.FUNDAMENTAL
    obj.emit(
        "growth.csv",
        ("lambda", "G", "v", "lambda_bar", "regime", "residual", "eig_stable", "eig_unstable"),
        [(g.lam, g.G, g.v, g.lambda_bar, regime, g.residual, eig[0], eig[1])],
    )


def _shock_economy(cfg: RunConfig, base):
    changes = {}
    if cfg.get("shock.lambda") is not None:
        changes["lam"] = cfg["shock.lambda"]
    if cfg.get("shock.gamma") is not None:
        changes["dist"] = Exponential(cfg["shock.gamma"])
    return cfg.economy(**changes) if changes else None


def _path_rows(path):
    path.validate()  # fail closed before anything is written
    return list(path.rows())


@cli.command()
@click.pass_obj
def transition(obj: Context):
    """Equilibrium path from init.K0, optionally under a temporary shock (transition.csv)."""
    cfg = obj.config
    base = cfg.economy()
    shocked = _shock_economy(cfg, base)
    K0 = cfg.get("init.K0")
    if K0 is None:
        K0 = solve_steady_state(base).K if base.lam < leverage_threshold(base) else 1.0
    schedule = [(0, shocked), (cfg["shock.end"], base)] if shocked else base
    path = solve_transition(schedule, K0, T=cfg["horizon.T"], J=cfg["knots.J"])
    rows = _path_rows(path)
    obj.emit("transition.csv", PATH_HEADER, rows)
    obj.say(f"equilibrium error {path.error:.3e}")


@cli.command()
@click.pass_obj
def fig2(obj: Context):
    """Temporary leverage and productivity booms from the steady state (fig2_*.csv)."""
    cfg = obj.config
    base = cfg.economy()
    shock_lambda = cfg.get("shock.lambda", 2.0)
    shock_gamma = cfg.get("shock.gamma", -math.log(0.15))
    experiments = leverage_and_productivity_booms(
        base, shock_lambda, shock_gamma,
        duration=cfg["shock.end"], T=cfg["horizon.T"], J=cfg["knots.J"], pre_periods=cfg["horizon.pre"],
    )
    rendered = []
    for exp in experiments:
        raw = _path_rows(exp.path)
        price, rent, ratio = exp.normalized()
        norm = list(zip(exp.path.t, price, rent, ratio, exp.path.regime))
        rendered.append((exp, raw, norm))
    for exp, raw, norm in rendered:
        obj.emit(f"fig2_{exp.name}.csv", PATH_HEADER, raw)
        obj.emit(f"fig2_{exp.name}_normalized.csv", ("t", "price", "rent", "price_rent", "regime"), norm)


@cli.command()
@click.pass_obj
def trend(obj: Context):
    """Open-economy trend-stationary equilibrium at the configured leverage (trend.csv)."""
    cfg = obj.config
    econ = cfg.economy()
    eq = solve_trend_stationary(econ, K0=cfg.get("init.K0", 1.0), D=cfg["tech.D"])
    header = ("regime", "lambda", "lambda_bar", "R", "G", "zbar", "alpha_coef", "B", "bubble_coef", "fundamental_level", "residual")
    row = (eq.regime, eq.lam, leverage_threshold(econ), eq.R, eq.G, eq.zbar, eq.alpha_coef, eq.B, eq.bubble_coef, eq.fundamental_level, eq.residual)
    obj.emit("trend.csv", header, [row])
    obj.say(f"{eq.regime.value} equilibrium: R = {eq.R:.10g}, G = {eq.G:.10g}")


@cli.command()
@click.pass_obj
def rates(obj: Context):
    """Equilibrium interest rate across the leverage grid (rates.csv)."""
    cfg = obj.config
    points = rate_curve(cfg.economy(), cfg["grid.lambda"], K0=cfg.get("init.K0", 1.0), D=cfg["tech.D"])
    obj.emit("rates.csv", ("lambda", "R", "G", "regime"), [(p.lam, p.R, p.G, p.regime) for p in points])


@cli.command()
@click.option("--mc/--no-mc", default=False, show_default=True, help="Add Monte Carlo Hill estimates (slow).")
@click.pass_obj
def pareto(obj: Context, mc: bool):
    """Pareto exponent of wealth across the leverage grid (pareto.csv)."""
    cfg = obj.config
    rows = []
    for lam in cfg["grid.lambda"]:
        econ = cfg.economy(lam=lam)
        eq = solve_trend_stationary(econ, D=cfg["tech.D"])
        spec = WealthProcessSpec.from_equilibrium(econ, eq)
        sol = solve_pareto_exponent(spec)
        row = [lam, sol.regime, sol.R, sol.zeta]
        if mc:
            panel = simulate_wealth_panel(spec, cfg["mc.N"], cfg["mc.T"], obj.seed, cfg["mc.top_fraction"])
            row += [panel.hill, panel.ci[0], panel.ci[1]]
        rows.append(row)
    header = ("lambda", "regime", "R", "zeta") + (("hill", "ci_lo", "ci_hi") if mc else ())
    obj.emit("pareto.csv", header, rows)


@cli.command()
@click.pass_obj
def simulate(obj: Context):
    """Terminal relative-wealth cross-section at the configured leverage (simulate.csv)."""
    cfg = obj.config
    econ = cfg.economy()
    eq = solve_trend_stationary(econ, D=cfg["tech.D"])
    spec = WealthProcessSpec.from_equilibrium(econ, eq)
    panel = simulate_wealth_panel(spec, cfg["mc.N"], cfg["mc.T"], obj.seed, cfg["mc.top_fraction"])
    obj.emit("simulate.csv", ("s",), ((s,) for s in panel.samples))
    zeta = solve_pareto_exponent(spec).zeta
    obj.emit(
        "simulate_summary.csv",
        ("lambda", "regime", "zeta", "hill", "ci_lo", "ci_hi", "tail_count"),
        [(econ.lam, eq.regime, zeta, panel.hill, panel.ci[0], panel.ci[1], panel.tail_count)],
    )


def _read_series(path: Path):
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            reader = csv.DictReader(fh)
            fields = set(reader.fieldnames or ())
            if not {"t", "rent", "price"} <= fields:
                raise ConfigError(f"{path}: needs columns t, rent, price (and optionally rate)")
            rows = list(reader)
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    try:
        rows.sort(key=lambda r: int(r["t"]))
        rent = np.array([float(r["rent"]) for r in rows])
        price = np.array([float(r["price"]) for r in rows])
        rate = np.array([float(r["rate"]) for r in rows]) if "rate" in fields else None
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{path}: non-numeric entry") from exc
    return rent, price, rate


@cli.command()
@click.argument("series", type=click.Path(exists=True, dir_okay=False))
@click.pass_obj
def bubbletest(obj: Context, series):
    """Classify a price/rent series as bubbly or fundamental (bubbletest.csv, bubbletest.txt)."""
    rent, price, rate = _read_series(Path(series))
    verdict = montrucchio_test(rent, price)
    rates_used = rate if rate is not None else implied_rates(price, rent)
    try:
        V0 = fundamental_value(rent, rates_used, 0)
    except ModelError:
        V0 = math.nan
    row = (
        verdict.classification, verdict.fitted_ratio, verdict.tvc_estimate, verdict.partial_sums[-1],
        len(price), verdict.degenerate, price[0], V0,
    )
    obj.emit(
        "bubbletest.csv",
        ("classification", "fitted_ratio", "tvc_estimate", "sum_rent_price", "n", "degenerate", "P0", "V0"),
        [row],
    )
    summary = (
        f"classification: {verdict.classification.value}\n"
        f"periods: {len(price)}\n"
        f"fitted yield ratio: {fmt(verdict.fitted_ratio)}\n"
        f"sum of rent/price: {fmt(verdict.partial_sums[-1])}\n"
        f"extrapolated q_T P_T / P_0: {fmt(verdict.tvc_estimate)}\n"
        f"price P0: {fmt(price[0])}, fundamental value V0: {fmt(V0)}\n"
    )
    write_atomic(obj.out / "bubbletest.txt", summary)
    obj.say(summary.rstrip())


def _report_error(category: str, exc: BaseException) -> int:
    record = {"error": category, "type": type(exc).__name__, "message": str(exc)}
    click.echo(json.dumps(record, sort_keys=True), err=True)
    return EXIT_CODES[category]


def main(argv=None) -> int:
    """Entry point; returns (and exits with) the process exit code."""
    try:
        cli.main(args=argv, prog_name="landbubble", standalone_mode=False)
        code = 0
    except click.exceptions.Exit as exc:
        code = exc.exit_code
    except click.exceptions.Abort:
        code = 1
    except click.ClickException as exc:
        exc.show()
        code = _report_error("config", exc)
    except ModelError as exc:
        code = _report_error(exc.category, exc)
    except (ValueError, ArithmeticError) as exc:
        code = _report_error("domain", exc)
    if argv is None:
        sys.exit(code)
    return code


if __name__ == "__main__":
    main()
