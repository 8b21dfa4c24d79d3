"""Run configuration: line-oriented ``key = value`` files with sections.

Format: ``#`` starts a comment, sections are ``[reaction]``,
``[diffusion]``, ``[solver]`` and ``[output]`` (keys may also appear
before any section header). Unknown keys and malformed lines are hard
errors reported with their line number. Omitted keys fall back to the
linear-regime defaults.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, fields, replace

from .model import REGIME_LABELS, ModelParameters, regime_parameters

__all__ = ["RunConfig", "ConfigError", "parse_config", "load_config"]

SECTIONS = ("", "reaction", "diffusion", "solver", "output")


class ConfigError(ValueError):
    """Malformed configuration text."""


def _positive(name):
    def check(v):
        if not v > 0:
            raise ValueError(f"{name} must be positive")
        return v
    return check


def _even_positive(v):
    v = int(v)
    if v <= 0 or v % 2:
        raise ValueError("N must be a positive even integer")
    return v


def _at_least_one(v):
    v = int(v)
    if v < 1:
        raise ValueError("must be >= 1")
    return v


@dataclass(frozen=True)
class RunConfig:
    """Fully resolved run settings; defaults are the linear regime."""

    regime: str = "linear"
    # reaction/diffusion parameter overrides (None = regime preset)
    eta: float | None = None
    a: float | None = None
    b: float | None = None
    H: float | None = None
    d1: float | None = None
    d2: float | None = None
    d11: float | None = None
    d22: float | None = None
    d12: float | None = None
    Lx: float = 5.0
    # discretization
    N: int = 64
    dt: float = 5e-4
    dealias: bool = False
    # parameter values / sweep
    C: float = -0.5
    C_start: float = -0.5
    C_end: float = -1.5
    C_steps: int = 100
    delta_C: float = -0.01
    # run control
    t_end: float = 10.0
    tau: float = 100.0
    record_every: int = 10
    divergence_threshold: float = 1e3
    # solver settings
    newton_tol: float = 1e-10
    orbit_tol: float = 5e-4
    max_iter: int = 50
    orbit_max_iter: int = 20
    monodromy_h: float = 1e-3
    workers: int = 1
    guess_amplitude: float = 0.5
    guess_mode: int = 3
    transient: float = 50.0
    period_guess: float = 3.0
    stability_threshold: float = 1e-3
    # output
    out_dir: str = "."

    def parameters(self) -> ModelParameters:
        """Model parameters: regime preset plus explicit overrides."""
        p = regime_parameters(self.regime, C=self.C)
        overrides = {
            name: getattr(self, name)
            for name in ("eta", "a", "b", "H", "d1", "d2", "d11", "d22", "d12")
            if getattr(self, name) is not None
        }
        return replace(p, Lx=self.Lx, **overrides)

    def as_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(RunConfig)}


def _parse_bool(text: str) -> bool:
    lowered = text.strip().lower()
    if lowered in ("true", "yes", "on", "1"):
        return True
    if lowered in ("false", "no", "off", "0"):
        return False
    raise ValueError(f"expected a boolean, got {text!r}")


def _parse_regime(text: str) -> str:
    if text not in REGIME_LABELS:
        raise ValueError(f"unknown regime {text!r}; expected one of {REGIME_LABELS}")
    return text


_FLOAT_KEYS = {"eta", "a", "b", "H", "d1", "d2", "d11", "d22", "d12",
               "C", "C_start", "C_end", "delta_C"}
_CHECKED = {
    "Lx": lambda t: _positive("Lx")(float(t)),
    "dt": lambda t: _positive("dt")(float(t)),
    "t_end": lambda t: _positive("t_end")(float(t)),
    "tau": lambda t: _positive("tau")(float(t)),
    "transient": lambda t: _positive("transient")(float(t)),
    "period_guess": lambda t: _positive("period_guess")(float(t)),
    "newton_tol": lambda t: _positive("newton_tol")(float(t)),
    "orbit_tol": lambda t: _positive("orbit_tol")(float(t)),
    "monodromy_h": lambda t: _positive("monodromy_h")(float(t)),
    "divergence_threshold": lambda t: _positive("divergence_threshold")(float(t)),
    "stability_threshold": lambda t: _positive("stability_threshold")(float(t)),
    "guess_amplitude": lambda t: float(t),
    "N": _even_positive,
    "C_steps": _at_least_one,
    "record_every": lambda t: _positive("record_every")(int(t)),
    "max_iter": lambda t: _positive("max_iter")(int(t)),
    "orbit_max_iter": lambda t: _positive("orbit_max_iter")(int(t)),
    "workers": lambda t: _positive("workers")(int(t)),
    "guess_mode": lambda t: int(t),
    "regime": _parse_regime,
    "dealias": _parse_bool,
    "out_dir": str,
}


def parse_config(text: str) -> RunConfig:
    """Parse configuration text into a fully resolved :class:`RunConfig`."""
    values: dict[str, object] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            section = line[1:-1].strip()
            if section not in SECTIONS[1:]:
                raise ConfigError(f"line {lineno}: unknown section [{section}]")
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, _, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if key in values:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        try:
            if key in _FLOAT_KEYS:
                values[key] = float(value)
            elif key in _CHECKED:
                values[key] = _CHECKED[key](value)
            else:
                raise ConfigError(f"line {lineno}: unknown key {key!r}")
        except ConfigError:
            raise
        except ValueError as exc:
            raise ConfigError(f"line {lineno}: bad value for {key!r}: {exc}") from exc
    if "out_dir" not in values and "BVAM_OUT_DIR" in os.environ:
        values["out_dir"] = os.environ["BVAM_OUT_DIR"]
    return RunConfig(**values)


def load_config(path) -> RunConfig:
    with open(path) as fh:
        return parse_config(fh.read())
