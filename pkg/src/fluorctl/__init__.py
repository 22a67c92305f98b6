"""Spontaneous emission from a phase-prepared, microwave-driven V-type atom."""

__version__ = "0.1.0"

from .model import (AtomConfig, ConfigError, DegenerateEigenvaluesError, GridTooNarrowError,
                    ModeGrid, NumericalError, preset)

__all__ = ["AtomConfig", "ConfigError", "DegenerateEigenvaluesError", "GridTooNarrowError",
           "ModeGrid", "NumericalError", "preset", "__version__"]
