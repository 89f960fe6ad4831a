"""
Flat ``key = value`` scenario configuration.

Lines starting with ``#`` are comments. Every key must be known; values are
parsed and validated here, so the commands only ever see clean numbers.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import InvalidInputError

FORMAT_VERSION = "1"
SCENARIOS = ("linear_birefringence", "zener", "custom_tabulated")

PARAMETER_KEYS = ("k1", "gamma", "lambda", "lambda_grid", "eps", "s0", "s1", "table", "seed",
                  "psi_i", "psi_p")
NUMERIC_KEYS = ("steps", "fd_h", "grid", "expansion_grid", "samples")
OUTPUT_KEYS = ("out", "format_version")
KEYS = ("scenario",) + PARAMETER_KEYS + NUMERIC_KEYS + OUTPUT_KEYS

# (key, default, meaning) -- printed verbatim by --show-defaults
DEFAULTS_TABLE = (
    ("scenario", "linear_birefringence", "linear_birefringence | zener | custom_tabulated"),
    ("k1", "1.0", "birefringence strength of the linear example [1/length]"),
    ("s0", "0.0", "path start [length]"),
    ("s1", "2.0", "path end [length]"),
    ("eps", "0.0 (verify: 0.01)", "perturbation parameter"),
    ("gamma", "1.0", "Zener sweep rate [1/length]"),
    ("lambda", "5.0 (respond: 0.695)", "Zener adiabaticity parameter"),
    ("lambda_grid", "0:5:501", "sweep grid a:b:n or comma list"),
    ("table", "-", "custom_tabulated CSV: s,base_k0,base_k1,base_k2,base_k3,pert_k0,pert_k1,pert_k2,pert_k3"),
    ("seed", "-", "custom_tabulated without table: random smooth profile from this seed"),
    ("psi_i", "0,0,1", "custom_tabulated injected state as a Bloch vector"),
    ("psi_p", "1,0,0", "custom_tabulated polarizer state as a Bloch vector"),
    ("steps", "auto", "integrator steps: max(1000, 20000 * integral |kappa| ds)"),
    ("fd_h", "1e-4 (eps) / 5e-4 (lambda)", "finite-difference step, one Richardson level"),
    ("grid", "32", "Gauss-Legendre panels (8 nodes each) for the bounds"),
    ("expansion_grid", "128", "trapezoid points per axis for the expansion check"),
    ("samples", "400", "trajectory samples written by simulate"),
    ("out", "trajectory.csv | sweep.csv | report.csv", "output path, '-' for stdout"),
    ("format_version", FORMAT_VERSION, "CSV schema version"),
)


class ConfigError(InvalidInputError):
    """Invalid configuration file or command-line value."""


@dataclass
class ScenarioConfig:
    scenario: str = "linear_birefringence"
    parameters: dict = field(default_factory=dict)
    numerics: dict = field(default_factory=dict)
    out: str | None = None
    format_version: str = FORMAT_VERSION

    def get(self, key, default=None):
        if key in self.parameters:
            return self.parameters[key]
        return self.numerics.get(key, default)


def _float(key, raw):
    try:
        v = float(raw)
    except (TypeError, ValueError):
        raise ConfigError(f"{key}: expected a number, got {raw!r}") from None
    if not math.isfinite(v):
        raise ConfigError(f"{key}: value must be finite")
    return v


def _positive_int(key, raw):
    try:
        v = int(str(raw).strip())
    except ValueError:
        raise ConfigError(f"{key}: expected a positive integer, got {raw!r}") from None
    if v < 1:
        raise ConfigError(f"{key}: expected a positive integer, got {raw!r}")
    return v


def parse_grid(raw) -> np.ndarray:
    """'a:b:n' (n points from a to b) or a comma-separated list; must be strictly increasing."""
    text = str(raw).strip()
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ConfigError(f"lambda_grid: expected a:b:n, got {raw!r}")
        a, b = _float("lambda_grid", parts[0]), _float("lambda_grid", parts[1])
        n = _positive_int("lambda_grid", parts[2])
        grid = np.linspace(a, b, n)
    else:
        grid = np.array([_float("lambda_grid", p) for p in text.split(",") if p.strip()])
    if grid.size == 0:
        raise ConfigError("lambda_grid is empty")
    if np.any(np.diff(grid) <= 0):
        raise ConfigError("lambda_grid must be strictly increasing")
    if np.any(grid < 0):
        raise ConfigError("lambda_grid values must be non-negative")
    return grid


def parse_bloch(key, raw) -> np.ndarray:
    parts = [p for p in str(raw).split(",") if p.strip()]
    if len(parts) != 3:
        raise ConfigError(f"{key}: expected a Bloch vector x,y,z, got {raw!r}")
    v = np.array([_float(key, p) for p in parts])
    n = np.linalg.norm(v)
    if n == 0:
        raise ConfigError(f"{key}: Bloch vector must be non-zero")
    return v / n


def set_value(cfg: ScenarioConfig, key, raw):
    """Validate one key/value pair and store it on ``cfg``."""
    if key not in KEYS:
        raise ConfigError(f"unknown configuration key {key!r}")
    if key == "scenario":
        if raw not in SCENARIOS:
            raise ConfigError(f"scenario must be one of {', '.join(SCENARIOS)}; got {raw!r}")
        cfg.scenario = raw
    elif key == "out":
        cfg.out = str(raw)
    elif key == "format_version":
        if str(raw) != FORMAT_VERSION:
            raise ConfigError(f"unsupported format_version {raw!r} (this build writes {FORMAT_VERSION})")
        cfg.format_version = str(raw)
    elif key == "lambda_grid":
        cfg.parameters[key] = parse_grid(raw)
    elif key in ("psi_i", "psi_p"):
        cfg.parameters[key] = parse_bloch(key, raw)
    elif key == "table":
        cfg.parameters[key] = str(raw)
    elif key == "seed":
        try:
            cfg.parameters[key] = int(str(raw).strip())
        except ValueError:
            raise ConfigError(f"seed: expected an integer, got {raw!r}") from None
    elif key in ("steps", "grid", "expansion_grid", "samples"):
        cfg.numerics[key] = _positive_int(key, raw)
    elif key == "fd_h":
        v = _float(key, raw)
        if v <= 0:
            raise ConfigError("fd_h must be positive")
        cfg.numerics[key] = v
    else:
        v = _float(key, raw)
        if key in ("gamma", "k1") and v <= 0:
            raise ConfigError(f"{key} must be positive")
        if key == "lambda" and v < 0:
            raise ConfigError("lambda must be non-negative")
        cfg.parameters[key] = v
    return cfg


def parse_config(text: str) -> ScenarioConfig:
    cfg = ScenarioConfig()
    seen = set()
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key = value")
        key, _, value = line.partition("=")
        key, value = key.strip(), value.split("#", 1)[0].strip()
        if key in seen:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        seen.add(key)
        set_value(cfg, key, value)
    if "s0" in cfg.parameters and "s1" in cfg.parameters and cfg.parameters["s1"] <= cfg.parameters["s0"]:
        raise ConfigError("need s1 > s0")
    return cfg


def load_config(path) -> ScenarioConfig:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    return parse_config(text)


def format_defaults() -> str:
    width = max(len(k) for k, _, _ in DEFAULTS_TABLE)
    vwidth = max(len(v) for _, v, _ in DEFAULTS_TABLE)
    return "\n".join(f"{k:<{width}}  {v:<{vwidth}}  {doc}" for k, v, doc in DEFAULTS_TABLE)
