"""Scenario parameters, figure presets and unit conventions.

Every rate and frequency is measured in units of the decay rate of level
|1>, which is still kept as an explicit field (``gamma1``, default 1) so
that scaling tests can vary it.  The pump phase is fixed to zero; only the
relative phase ``dphi`` between the microwave and the pump is stored.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np


class ConfigError(ValueError):
    """Raised when a scenario or grid violates its invariants."""


class DegenerateEigenvaluesError(ArithmeticError):
    """The closed-form solution is undefined because the two exponents coincide."""


class NumericalError(RuntimeError):
    """A numerical route failed to converge or violated a sampling bound."""


class GridTooNarrowError(NumericalError):
    """The spectral grid misses a non-negligible part of the emitted norm."""


CONFIG_KEYS = ("gamma1", "gamma2", "omega", "delta", "omega21", "p", "theta", "dphi")
GRID_KEYS = ("delta_min", "delta_max", "n_points")


@dataclass(frozen=True)
class AtomConfig:
    gamma1: float = 1.0
    gamma2: float = 0.0
    omega: float = 0.0
    delta: float = 0.0
    omega21: float = 1.0
    p: float = 0.0
    theta: float = math.pi / 4
    dphi: float = 0.0

    def replace(self, **changes) -> "AtomConfig":
        data = asdict(self)
        unknown = set(changes) - set(data)
        if unknown:
            raise ConfigError(f"unknown config field(s): {sorted(unknown)}")
        data.update(changes)
        return AtomConfig(**data)

    def to_dict(self) -> dict:
        return {k: float(getattr(self, k)) for k in CONFIG_KEYS}

    @classmethod
    def from_dict(cls, data: dict) -> "AtomConfig":
        unknown = set(data) - set(CONFIG_KEYS)
        if unknown:
            raise ConfigError(f"unknown config field(s): {sorted(unknown)}")
        return cls(**{k: float(v) for k, v in data.items()})

    @property
    def initial_amplitudes(self) -> tuple[complex, complex]:
        return complex(math.sin(self.theta)), complex(math.cos(self.theta))


@dataclass(frozen=True)
class ModeGrid:
    """Uniform grid of emission detunings measured from the doublet midpoint."""

    delta_min: float
    delta_max: float
    n_points: int = 2001

    def __post_init__(self):
        if not (math.isfinite(self.delta_min) and math.isfinite(self.delta_max)):
            raise ConfigError("grid bounds must be finite")
        if not self.delta_min < self.delta_max:
            raise ConfigError("grid requires delta_min < delta_max")
        if int(self.n_points) != self.n_points or self.n_points < 2:
            raise ConfigError("grid needs at least 2 points")
        object.__setattr__(self, "n_points", int(self.n_points))

    @property
    def spacing(self) -> float:
        return (self.delta_max - self.delta_min) / (self.n_points - 1)

    @property
    def points(self) -> np.ndarray:
        return np.linspace(self.delta_min, self.delta_max, self.n_points)

    def to_dict(self) -> dict:
        return {"delta_min": float(self.delta_min), "delta_max": float(self.delta_max),
                "n_points": self.n_points}


def validate(config: AtomConfig) -> AtomConfig:
    """Return ``config`` unchanged if all invariants hold, else raise ConfigError."""
    for name in CONFIG_KEYS:
        value = getattr(config, name)
        if not isinstance(value, (int, float)) or not math.isfinite(value):
            raise ConfigError(f"{name}: non-finite value {value!r}")
    if config.gamma1 <= 0:
        raise ConfigError("gamma1: reference rate must be positive")
    if config.gamma2 < 0:
        raise ConfigError("gamma2: decay rate must be non-negative")
    if config.omega < 0:
        raise ConfigError("omega: Rabi frequency must be non-negative")
    if config.omega21 < 0:
        raise ConfigError("omega21: doublet splitting must be non-negative")
    if not 0.0 <= config.p <= 1.0:
        raise ConfigError("p: alignment out of range [0, 1]")
    if not 0.0 <= config.theta <= math.pi / 2 + 1e-12:
        raise ConfigError("theta: preparation angle out of range [0, pi/2]")
    return config


@dataclass(frozen=True)
class ScenarioPreset:
    name: str
    config: AtomConfig
    grid: ModeGrid
    p_variants: tuple[float, ...] = field(default=(0.0,))


_FIG3 = AtomConfig(gamma1=1.0, gamma2=0.0, omega=0.15, delta=0.0, omega21=1.0,
                   theta=math.pi / 4)
_FIG5 = AtomConfig(gamma1=1.0, gamma2=1.0, omega=5.0, delta=0.0, omega21=3.0,
                   theta=math.pi / 4)
_NARROW_GRID = ModeGrid(-4.0, 4.0, 2001)
_WIDE_GRID = ModeGrid(-12.0, 12.0, 2001)


def _build_presets() -> dict[str, ScenarioPreset]:
    out = {}
    for tag, dphi in zip("abc", (0.0, 0.5 * math.pi, math.pi)):
        out[f"fig3{tag}"] = ScenarioPreset(f"fig3{tag}", _FIG3.replace(dphi=dphi),
                                           _NARROW_GRID, (0.0,))
    for tag, g2 in zip("abc", (0.075, 0.15, 0.3)):
        out[f"fig4{tag}"] = ScenarioPreset(f"fig4{tag}", _FIG3.replace(gamma2=g2),
                                           _NARROW_GRID, (0.0, 1.0))
    for tag, frac in zip("abcde", (0.0, 0.25, 0.5, 0.75, 1.0)):
        out[f"fig5{tag}"] = ScenarioPreset(f"fig5{tag}", _FIG5.replace(dphi=frac * math.pi),
                                           _WIDE_GRID, (0.0, 1.0))
    return out


PRESETS = _build_presets()
FIGURES = {"fig3": ("fig3a", "fig3b", "fig3c"),
           "fig4": ("fig4a", "fig4b", "fig4c"),
           "fig5": ("fig5a", "fig5b", "fig5c", "fig5d", "fig5e")}


def preset(name: str) -> ScenarioPreset:
    try:
        return PRESETS[name]
    except KeyError:
        raise ConfigError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}") from None


def dumps_config(config: AtomConfig, grid: ModeGrid | None = None) -> str:
    """Canonical JSON (fixed key order, round-trip safe floats)."""
    data = config.to_dict()
    if grid is not None:
        data.update(grid.to_dict())
    return json.dumps(data, separators=(",", ":"))


def loads_config(text: str) -> tuple[AtomConfig, ModeGrid | None]:
    data = json.loads(text)
    if not isinstance(data, dict):
        raise ConfigError("config document must be a JSON object")
    unknown = set(data) - set(CONFIG_KEYS) - set(GRID_KEYS)
    if unknown:
        raise ConfigError(f"unknown config key(s): {sorted(unknown)}")
    config = validate(AtomConfig.from_dict({k: data[k] for k in CONFIG_KEYS if k in data}))
    grid = None
    present = [k for k in GRID_KEYS if k in data]
    if present:
        if len(present) != len(GRID_KEYS):
            raise ConfigError(f"grid needs all of {GRID_KEYS}")
        grid = ModeGrid(float(data["delta_min"]), float(data["delta_max"]), data["n_points"])
    return config, grid


def load_config_file(path: str | Path) -> tuple[AtomConfig, ModeGrid | None]:
    return loads_config(Path(path).read_text())
