"""Closed-form dynamics and emission spectrum without cross-channel coupling (p = 0).

With the drive phase absorbed into the rotating frame the two excited-state
amplitudes obey a constant 2x2 linear system, so

    b1(t) = C1 exp(l1 t) + C2 exp(l2 t),   b2(t) = C1' exp(l1 t) + C2' exp(l2 t),

and the long-time photon amplitude splits into two channels

    A(d) = C1 / (d + w21/2 - i l1) + C2 / (d + w21/2 - i l2)
    B(d) = C1'/ (d - w21/2 - D - i l1) + C2'/ (d - w21/2 - D - i l2)

with d the emission detuning from the doublet midpoint.  Spectra are
normalized as S = (g1 |A|^2 + g2 |B|^2 + 2 p sqrt(g1 g2) Re(A conj B)) / 2pi,
which integrates to the total emitted probability (unity).
"""

from __future__ import annotations

import cmath
import logging
import math
from dataclasses import dataclass

import numpy as np

from .model import AtomConfig, ConfigError, DegenerateEigenvaluesError, ModeGrid

log = logging.getLogger(__name__)

DEGENERACY_TOL = 1e-9
REAL_ZERO_TOL = 1e-9


@dataclass(frozen=True)
class EigenSolution:
    lambda1: complex
    lambda2: complex
    c1: complex
    c2: complex
    c1p: complex
    c2p: complex


@dataclass(frozen=True)
class ChannelAmplitudes:
    """Per-channel photon amplitudes on a grid, coupling magnitudes factored out."""

    a_of_delta: np.ndarray
    b_of_delta: np.ndarray


@dataclass(frozen=True)
class Spectrum:
    grid: ModeGrid
    s_total: np.ndarray
    s_ch1: np.ndarray
    s_ch2: np.ndarray
    s_cross: np.ndarray
    channels: ChannelAmplitudes
    normalization: float
    method: str = "analytic"

    @property
    def delta(self) -> np.ndarray:
        return self.grid.points


def drift_matrix(config: AtomConfig) -> np.ndarray:
    """Generator M of d/dt (b1, b2) = M (b1, b2) with the cross-channel terms dropped."""
    drive = 1j * config.omega * cmath.exp(1j * config.dphi)
    return np.array([[-config.gamma1 / 2, -drive],
                     [-1j * config.omega * cmath.exp(-1j * config.dphi),
                      1j * config.delta - config.gamma2 / 2]], dtype=complex)


def characteristic(config: AtomConfig) -> tuple[complex, complex]:
    """Trace and determinant of the drift matrix."""
    trace = 1j * config.delta - (config.gamma1 + config.gamma2) / 2
    det = config.omega ** 2 + (config.gamma1 / 2) * (config.gamma2 / 2 - 1j * config.delta)
    return trace, det


def eigenvalues(config: AtomConfig, allow_degenerate: bool = False) -> tuple[complex, complex]:
    """Exponents of the closed-form solution; ``lambda1`` takes the '+' root.

    The root is written as ``tr/2 + (i/2) sqrt(4 det - tr^2)`` with the
    principal square root, which fixes the labelling used by every
    coefficient formula downstream.
    """
    trace, det = characteristic(config)
    disc = 4 * det - trace ** 2
    # a signed negative zero imaginary part would flip the principal branch
    disc = complex(disc.real + 0.0, disc.imag + 0.0)
    root = 0.5j * cmath.sqrt(disc)
    l1, l2 = trace / 2 + root, trace / 2 - root
    if not allow_degenerate and abs(l1 - l2) < DEGENERACY_TOL * config.gamma1:
        raise DegenerateEigenvaluesError(
            f"|l1 - l2| = {abs(l1 - l2):.3g} below threshold; use numeric.propagate")
    return l1, l2


def coefficients(config: AtomConfig) -> EigenSolution:
    l1, l2 = eigenvalues(config)
    s, c = math.sin(config.theta), math.cos(config.theta)
    g1, g2 = config.gamma1, config.gamma2
    drive = 1j * config.omega * cmath.exp(1j * config.dphi)
    drive_c = 1j * config.omega * cmath.exp(-1j * config.dphi)
    c1 = ((l2 + g1 / 2) * s + drive * c) / (l2 - l1)
    c2 = ((l1 + g1 / 2) * s + drive * c) / (l1 - l2)
    c1p = ((l2 + g2 / 2 - 1j * config.delta) * c + drive_c * s) / (l2 - l1)
    c2p = ((l1 + g2 / 2 - 1j * config.delta) * c + drive_c * s) / (l1 - l2)
    return EigenSolution(l1, l2, c1, c2, c1p, c2p)


def amplitudes(config: AtomConfig, t) -> tuple[np.ndarray, np.ndarray]:
    """Rotating-frame amplitudes (b1, b2) at times ``t`` (scalar or array)."""
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ValueError("times must be non-negative")
    sol = coefficients(config)
    e1, e2 = np.exp(sol.lambda1 * t), np.exp(sol.lambda2 * t)
    return sol.c1 * e1 + sol.c2 * e2, sol.c1p * e1 + sol.c2p * e2


def channel_offsets(config: AtomConfig) -> tuple[float, float]:
    """Shifts turning the emission detuning into each channel's transform frequency."""
    return config.omega21 / 2, -config.omega21 / 2 - config.delta


def channel_amplitudes(config: AtomConfig, grid: ModeGrid) -> ChannelAmplitudes:
    sol = coefficients(config)
    d = grid.points
    o1, o2 = channel_offsets(config)
    x1, x2 = d + o1, d + o2
    lams = (sol.lambda1, sol.lambda2)
    return ChannelAmplitudes(_pole_sum((sol.c1, sol.c2), lams, x1),
                             _pole_sum((sol.c1p, sol.c2p), lams, x2))


def _pole_sum(coefs, lams, x: np.ndarray) -> np.ndarray:
    out = np.zeros(x.shape, dtype=complex)
    # a vanishing coefficient contributes nothing, even on its own pole
    with np.errstate(divide="ignore", invalid="ignore"):
        for c, lam in zip(coefs, lams):
            if c != 0:
                out += c / (x - 1j * lam)
    return out


def assemble_spectrum(config: AtomConfig, grid: ModeGrid, channels: ChannelAmplitudes,
                      method: str) -> Spectrum:
    a, b = channels.a_of_delta, channels.b_of_delta
    s_ch1 = config.gamma1 * np.abs(a) ** 2 / (2 * np.pi)
    # a non-decaying level may put a pole of B on the real axis; it never radiates
    if config.gamma2 == 0:
        s_ch2 = np.zeros_like(s_ch1)
        s_cross = np.zeros_like(s_ch1)
    else:
        s_ch2 = config.gamma2 * np.abs(b) ** 2 / (2 * np.pi)
        s_cross = (2 * config.p * math.sqrt(config.gamma1 * config.gamma2)
                   * np.real(a * np.conj(b)) / (2 * np.pi))
    s_total = s_ch1 + s_ch2 + s_cross
    norm = float(np.trapezoid(s_total, grid.points))
    return Spectrum(grid, s_total, s_ch1, s_ch2, s_cross, channels, norm, method)


def _require_p0(config: AtomConfig) -> None:
    if config.p != 0:
        raise ConfigError("analytic requires p = 0")


def spectrum_p0(config: AtomConfig, grid: ModeGrid) -> Spectrum:
    _require_p0(config)
    spec = assemble_spectrum(config, grid, channel_amplitudes(config, grid), "analytic")
    if spec.normalization < 0.999:
        log.warning("grid [%g, %g] captures only %.4f of the emitted norm",
                    grid.delta_min, grid.delta_max, spec.normalization)
    return spec


def weak_field_spectrum(config: AtomConfig, grid: ModeGrid) -> Spectrum:
    """Single-channel weak-drive approximation (gamma2 = 0, resonant drive, theta = pi/4).

    Both exponents are expanded to first order in omega^2/gamma1, which keeps
    the numerator zero at d = -w21/2 - omega exp(i dphi).
    """
    if config.gamma2 != 0 or config.delta != 0 or not math.isclose(config.theta, math.pi / 4):
        raise ConfigError("weak-field form needs gamma2 = 0, delta = 0, theta = pi/4")
    _require_p0(config)
    g1, om = config.gamma1, config.omega
    x = grid.points + config.omega21 / 2
    shift = 2 * om ** 2 / g1
    a = (x + om * cmath.exp(1j * config.dphi)) / (
        math.sqrt(2) * (x + 0.5j * g1 - 1j * shift) * (x + 1j * shift))
    return assemble_spectrum(config, grid, ChannelAmplitudes(a, np.zeros_like(a)), "weak_field")


def equal_decay_spectrum(config: AtomConfig, grid: ModeGrid) -> Spectrum:
    """Four-Lorentzian-pole form valid for gamma1 = gamma2 and a resonant drive."""
    if not math.isclose(config.gamma1, config.gamma2, rel_tol=1e-12) or config.delta != 0:
        raise ConfigError("equal-decay form needs gamma1 = gamma2 and delta = 0")
    _require_p0(config)
    g, om = config.gamma1, config.omega
    s, c = math.sin(config.theta), math.cos(config.theta)
    ph = cmath.exp(1j * config.dphi)
    x1 = grid.points + config.omega21 / 2
    x2 = grid.points - config.omega21 / 2 - config.delta
    a = 0.5 * ((s - ph * c) / (x1 + om + 0.5j * g) + (s + ph * c) / (x1 - om + 0.5j * g))
    b = 0.5 * ((c - s / ph) / (x2 + om + 0.5j * g) + (c + s / ph) / (x2 - om + 0.5j * g))
    return assemble_spectrum(config, grid, ChannelAmplitudes(a, b), "equal_decay")


def fano_zero(config: AtomConfig) -> float | None:
    """Exact real zero of the channel-1 spectrum when level |2> does not decay.

    For gamma2 = 0 the channel-1 numerator is linear in the detuning with root
    x0 = -delta - omega exp(i dphi) cot(theta) (x measured from the |1>
    transition).  Returns the emission detuning of the zero, or None when the
    root leaves the real axis.
    """
    if config.gamma2 != 0:
        raise ConfigError("fano_zero is defined for gamma2 = 0")
    if math.sin(config.theta) == 0:
        return None
    x0 = -config.delta - config.omega * cmath.exp(1j * config.dphi) / math.tan(config.theta)
    if abs(x0.imag) >= REAL_ZERO_TOL * config.gamma1:
        return None
    return x0.real - config.omega21 / 2


def pole_weights(config: AtomConfig) -> tuple[float, float]:
    """Integrated Lorentzian weight carried by each exponent's pole pair.

    Returns ``(w1, w2)`` with w_j = (g1 |C_j|^2 + g2 |C_j'|^2) / (2 |Re l_j|),
    i.e. the spectral area of the isolated pole terms, interference between
    poles excluded.
    """
    sol = coefficients(config)
    out = []
    for lam, cj, cjp in ((sol.lambda1, sol.c1, sol.c1p), (sol.lambda2, sol.c2, sol.c2p)):
        out.append((config.gamma1 * abs(cj) ** 2 + config.gamma2 * abs(cjp) ** 2)
                   / (2 * abs(lam.real)))
    return out[0], out[1]


def pole_centers(config: AtomConfig) -> dict[str, tuple[float, float]]:
    """Emission detunings where each exponent's pole sits, per channel."""
    l1, l2 = eigenvalues(config)
    o1, o2 = channel_offsets(config)
    # pole of 1/(x - i l) at x = i l, real part -Im l
    return {"lambda1": (-l1.imag - o1, -l1.imag - o2),
            "lambda2": (-l2.imag - o1, -l2.imag - o2)}
