"""Flat ``key = value`` run configuration.

One setting per line, ``#`` starts a comment, dotted keys group related
settings. Grids accept either a comma-separated list or an inclusive
``start:stop:step`` range.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .economy import CES, EconomyParams, Exponential, TwoSectorLinear
from .errors import ConfigError, ModelError

# key -> (default, description); None means "no default, optional"
KEYS: dict[str, tuple[object, str]] = {
    "beta": (0.95, "discount factor in (0, 1)"),
    "lambda": (1.0, "leverage limit >= 1"),
    "upsilon": (0.975, "survival probability in (0, 1) for the wealth layer"),
    "tech.kind": ("CES", "CES or TwoSectorLinear"),
    "tech.A": (1.0, "CES productivity"),
    "tech.alpha": (0.5, "CES capital share"),
    "tech.rho": (1.0, "CES inverse elasticity of substitution (1 = Cobb-Douglas)"),
    "tech.delta": (0.08, "CES depreciation rate"),
    "tech.m": (0.92, "linear technology: return on capital"),
    "tech.D": (1.0, "land rent (linear technology; open-economy rent)"),
    "dist.gamma": (math.log(10.0), "decay rate of exponential productivity"),
    "grid.inv_rho": ("0.25,0.5,0.75,1,1.5,2,3,4", "elasticity grid 1/rho for phase"),
    "grid.lambda": ("1:3:0.1", "leverage grid for phase, rates, pareto"),
    "horizon.T": (200, "periods per transition segment"),
    "horizon.pre": (5, "steady-state periods reported before a shock"),
    "knots.J": (10, "free spline knots in the transition solver"),
    "init.K0": (None, "initial capital (default: steady state, or 1)"),
    "shock.lambda": (None, "leverage during the shock window"),
    "shock.gamma": (None, "productivity decay rate during the shock window"),
    "shock.start": (0, "first shocked period"),
    "shock.end": (10, "first period after the shock"),
    "mc.N": (1_000_000, "Monte Carlo chains"),
    "mc.T": (1000, "Monte Carlo periods"),
    "mc.top_fraction": (0.01, "tail fraction for the Hill estimate"),
}

INT_KEYS = {"horizon.T", "horizon.pre", "knots.J", "shock.start", "shock.end", "mc.N", "mc.T"}
STR_KEYS = {"tech.kind"}
GRID_KEYS = {k for k in KEYS if k.startswith("grid.")}


def parse_grid(text: str, key: str) -> tuple[float, ...]:
    text = text.strip()
    try:
        if ":" in text:
            start, stop, step = (float(p) for p in text.split(":"))
            if not step > 0:
                raise ConfigError(f"{key}: range step must be positive")
            n = int(math.floor((stop - start) / step + 1e-9)) + 1
            values = tuple(float(np.round(start + i * step, 12)) for i in range(n))
        else:
            values = tuple(float(p) for p in text.split(",") if p.strip())
    except ValueError as exc:
        raise ConfigError(f"{key}: cannot parse grid {text!r}") from exc
    if not values:
        raise ConfigError(f"{key}: grid is empty")
    if any(not math.isfinite(v) for v in values):
        raise ConfigError(f"{key}: grid values must be finite")
    if any(b <= a for a, b in zip(values, values[1:])):
        raise ConfigError(f"{key}: grid must be sorted strictly increasing")
    return values


def _convert(key: str, raw) -> object:
    if raw is None:
        return None
    if key in GRID_KEYS:
        return parse_grid(str(raw), key)
    if key in STR_KEYS:
        return str(raw).strip()
    try:
        if key in INT_KEYS:
            as_float = float(raw)
            if as_float != int(as_float):
                raise ValueError
            return int(as_float)
        return float(raw)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{key}: invalid value {raw!r}") from exc


@dataclass(frozen=True)
class RunConfig:
    values: dict[str, object] = field(default_factory=dict)

    def __getitem__(self, key: str):
        return self.values[key]

    def get(self, key: str, default=None):
        val = self.values.get(key)
        return default if val is None else val

    def economy(self, **overrides) -> EconomyParams:
        """Build ``EconomyParams``; model-parameter errors become config errors."""
        kind = self["tech.kind"]
        try:
            if kind == "CES":
                tech = CES(self["tech.A"], self["tech.alpha"], self["tech.rho"], self["tech.delta"])
            elif kind == "TwoSectorLinear":
                tech = TwoSectorLinear(self["tech.m"], self["tech.D"])
            else:
                raise ConfigError(f"tech.kind must be CES or TwoSectorLinear, got {kind!r}")
            econ = EconomyParams(
                beta=self["beta"], lam=self["lambda"], tech=tech,
                dist=Exponential(self["dist.gamma"]), upsilon=self["upsilon"],
            )
            return econ.replace(**overrides) if overrides else econ
        except ConfigError:
            raise
        except (ModelError, ValueError) as exc:
            raise ConfigError(str(exc)) from exc


def parse_config_text(text: str, source: str = "<config>") -> RunConfig:
    raw: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value'")
        key, value = (p.strip() for p in line.split("=", 1))
        if key not in KEYS:
            raise ConfigError(f"{source}:{lineno}: unknown key {key!r}")
        if key in raw:
            raise ConfigError(f"{source}:{lineno}: duplicate key {key!r}")
        raw[key] = value
    return build_config(raw)


def build_config(raw: dict[str, object]) -> RunConfig:
    values = {}
    for key, (default, _) in KEYS.items():
        values[key] = _convert(key, raw.get(key, default))
    if values["shock.end"] <= values["shock.start"]:
        raise ConfigError("shock.end must come after shock.start")
    if values["shock.start"] != 0:
        raise ConfigError("shock.start must be 0 (the shock opens the reported path)")
    for key in ("horizon.T", "knots.J", "mc.N", "mc.T"):
        if values[key] < 1:
            raise ConfigError(f"{key} must be positive")
    if not 0 < values["mc.top_fraction"] <= 0.5:
        raise ConfigError("mc.top_fraction must lie in (0, 0.5]")
    return RunConfig(values)


def load_config(path: str | Path | None) -> RunConfig:
    if path is None:
        return build_config({})
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_config_text(text, str(path))


def describe_keys() -> str:
    width = max(len(k) for k in KEYS)
    lines = []
    for key, (default, doc) in KEYS.items():
        shown = "-" if default is None else default
        lines.append(f"{key:<{width}}  {doc} [default: {shown}]")
    return "\n".join(lines)
