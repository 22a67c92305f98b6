"""Feature extraction from spectra: peaks, minima, sum rule, phase scans."""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.signal import find_peaks, peak_widths

from . import analytic, numeric
from .analytic import Spectrum
from .model import AtomConfig, ConfigError, DegenerateEigenvaluesError, GridTooNarrowError, ModeGrid

DEFAULT_PROMINENCE = 0.02
EXACT_ZERO_RATIO = 1e-6
NUMERIC_ZERO_RATIO = 1e-3


@dataclass(frozen=True)
class Peak:
    position: float
    height: float
    half_width: float


@dataclass(frozen=True)
class Minimum:
    position: float
    depth: float
    ratio: float


@dataclass(frozen=True)
class SpectralFeatures:
    peaks: list[Peak]
    minima: list[Minimum]
    integral: float

    @property
    def peak_count(self) -> int:
        return len(self.peaks)

    def to_dict(self) -> dict:
        return {"peak_count": self.peak_count, "integral": self.integral,
                "peaks": [asdict(p) for p in self.peaks],
                "minima": [asdict(m) for m in self.minima]}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


@dataclass(frozen=True)
class PhaseScan:
    phases: np.ndarray
    features: list[SpectralFeatures]
    config: AtomConfig
    spectra: list[Spectrum] = field(default_factory=list, repr=False)


def _arrays(spectrum) -> tuple[np.ndarray, np.ndarray]:
    if isinstance(spectrum, Spectrum):
        x, y = spectrum.delta, spectrum.s_total
    else:
        x, y = (np.asarray(a, dtype=float) for a in spectrum)
    if x.size < 3 or x.shape != y.shape:
        raise ValueError("spectrum needs at least 3 points on matching arrays")
    steps = np.diff(x)
    if np.any(steps <= 0) or np.ptp(steps) > 1e-9 * max(abs(x[0]), abs(x[-1]), 1.0):
        raise ValueError("spectrum grid must be uniform and increasing")
    return x, y


def _vertex(x: np.ndarray, y: np.ndarray, i: int) -> tuple[float, float]:
    """Refine the extremum at sample i with the interpolating quartic through i-2 .. i+2.

    The refined point is searched between the two neighbours of i.  Near
    the edges a parabola through three points is used instead, and an edge
    sample is returned unchanged.
    """
    if i <= 0 or i >= len(y) - 1:
        return float(x[i]), float(y[i])
    half = 2 if 2 <= i <= len(y) - 3 else 1
    h = x[1] - x[0]
    u = np.arange(-half, half + 1, dtype=float)
    coef = np.polyfit(u, y[i - half:i + half + 1], 2 * half)
    fine = np.linspace(-1.0, 1.0, 401)
    vals = np.polyval(coef, fine)
    k = int(np.argmin(vals) if y[i] <= y[i - 1] else np.argmax(vals))
    return float(x[i] + fine[k] * h), float(vals[k])


def extract_features(spectrum, prominence_threshold: float = DEFAULT_PROMINENCE) -> SpectralFeatures:
    x, y = _arrays(spectrum)
    integral = float(np.trapezoid(y, x))
    top = float(y.max())
    if top <= 0:
        return SpectralFeatures([], [], integral)
    idx, props = find_peaks(y, prominence=prominence_threshold * top)
    h = x[1] - x[0]
    peaks = []
    for k, i in enumerate(idx):
        pos, height = _vertex(x, y, i)
        # width at half the absolute height, capped at the peak's own base
        rel = min(0.5 * y[i] / props["prominences"][k], 1.0)
        width = peak_widths(y, [i], rel_height=rel)[0][0]
        peaks.append(Peak(pos, height, 0.5 * width * h))
    minima = []
    bounds = [0, *idx, len(y) - 1]
    for lo, hi in zip(bounds[:-1], bounds[1:]):
        if hi - lo < 2:
            continue
        j = lo + 1 + int(np.argmin(y[lo + 1:hi]))
        is_edge_segment = lo == 0 or hi == len(y) - 1
        if is_edge_segment and not (y[j] < y[j - 1] and y[j] <= y[j + 1]):
            continue
        pos, depth = _vertex(x, y, j)
        depth = max(depth, 0.0)
        minima.append(Minimum(pos, depth, depth / top))
    return SpectralFeatures(peaks, minima, integral)


def deepest_minimum(spectrum, window: tuple[float, float]) -> tuple[float, float]:
    """Lowest point inside ``window`` and its depth relative to the global maximum.

    The sampled minimum is refined by local polynomial interpolation, which
    recovers exact zeros that fall between grid points.
    """
    x, y = _arrays(spectrum)
    lo, hi = window
    if lo >= hi or lo < x[0] or hi > x[-1]:
        raise ValueError(f"window {window} outside grid [{x[0]}, {x[-1]}]")
    inside = np.flatnonzero((x >= lo) & (x <= hi))
    j = int(inside[np.argmin(y[inside])])
    pos, depth = _vertex(x, y, j)
    return pos, max(depth, 0.0) / float(y.max())


def tail_estimate(spectrum, probe_fraction: float = 0.1) -> tuple[float, float]:
    """Spectral weight beyond each grid edge from the asymptotic K / (d - c)^2 law.

    K and c are fitted through the edge sample and a sample ``probe_fraction``
    of the span further in.  Raises GridTooNarrowError when either edge is
    not in that decaying regime.
    """
    x, y = _arrays(spectrum)
    k = max(2, int(round(probe_fraction * (len(x) - 1))))
    out = []
    for edge, probe in ((0, k), (len(x) - 1, len(x) - 1 - k)):
        se, si = y[edge], y[probe]
        if se <= 0 and si <= 0:
            out.append(0.0)
            continue
        if not 0 < se < si:
            raise GridTooNarrowError("grid too narrow: spectrum not decaying toward the edge")
        re, ri = math.sqrt(se), math.sqrt(si)
        center = (re * x[edge] - ri * x[probe]) / (re - ri)
        if (x[probe] - center) * (x[edge] - center) <= 0 or abs(x[edge] - center) < abs(x[probe] - center):
            raise GridTooNarrowError("grid too narrow: edge not in the asymptotic tail")
        out.append(float(se * abs(x[edge] - center)))
    return out[0], out[1]


def wide_grid(half_width: float = 500.0, spacing: float = 0.01) -> ModeGrid:
    """Symmetric grid wide enough that the extrapolated tails stay below 1e-3."""
    n = int(round(2 * half_width / spacing)) + 1
    return ModeGrid(-half_width, half_width, n)


def sum_rule(spectrum, max_tail: float = 0.1) -> float:
    """Total emitted probability: trapezoid integral plus the extrapolated tails.

    Raises GridTooNarrowError when the extrapolated tail exceeds ``max_tail``
    of the total.
    """
    x, y = _arrays(spectrum)
    core = float(np.trapezoid(y, x))
    if y.max() <= 0:
        return core
    left, right = tail_estimate((x, y))
    total = core + left + right
    if left + right > max_tail * abs(total):
        raise GridTooNarrowError(
            f"grid too narrow: {left + right:.3g} of the norm lies outside [{x[0]}, {x[-1]}]")
    return total


def compute_spectrum(config: AtomConfig, grid: ModeGrid, method: str = "auto",
                     quality: numeric.Quality = numeric.DEFAULT_QUALITY) -> Spectrum:
    """Dispatch to the closed form (p = 0) or the Markov + Fourier route."""
    if method == "auto":
        method = "analytic" if config.p == 0 else "fourier"
    if method == "analytic":
        try:
            return analytic.spectrum_p0(config, grid)
        except DegenerateEigenvaluesError:
            return numeric.spectrum(config, grid, quality)
    if method == "fourier":
        return numeric.spectrum(config, grid, quality)
    raise ConfigError(f"unknown spectrum method {method!r}")


def phase_scan(config: AtomConfig, grid: ModeGrid, phases, method: str = "auto",
               prominence_threshold: float = DEFAULT_PROMINENCE,
               quality: numeric.Quality = numeric.DEFAULT_QUALITY) -> PhaseScan:
    phases = np.asarray(phases, dtype=float)
    if phases.ndim != 1 or phases.size == 0:
        raise ValueError("phases must be a non-empty 1-D sequence")
    if np.any(np.diff(phases) <= 0) or phases[0] < 0 or phases[-1] > math.pi + 1e-12:
        raise ValueError("phases must increase strictly within [0, pi]")
    spectra = [compute_spectrum(config.replace(dphi=float(ph)), grid, method, quality)
               for ph in phases]
    feats = [extract_features(s, prominence_threshold) for s in spectra]
    return PhaseScan(phases, feats, config, spectra)


def has_zero(spectrum, window: tuple[float, float], ratio: float = EXACT_ZERO_RATIO
             ) -> float | None:
    """Position of a spectral zero inside ``window``, or None if the minimum is shallower."""
    pos, depth = deepest_minimum(spectrum, window)
    return pos if depth < ratio else None
