"""Dressed-state picture of the driven doublet.

The drive Hamiltonian in the rotating frame of the amplitude equations is

    H = [[0, W exp(i dphi)], [W exp(-i dphi), -D]]

with eigenenergies E+- = (-D +- sqrt(D^2 + 4 W^2)) / 2 and mixing angle
tan(psi) = E- / W, psi in (-pi/2, 0).  The dressed amplitudes are

    b+ = exp(-i dphi) cos(psi) b1 + sin(psi) b2
    b- = -exp(-i dphi) sin(psi) b1 + cos(psi) b2

This is the unitary that actually diagonalizes H for every dphi; it agrees
with the plain rotation at dphi = 0 and gives identical populations for
all dphi.  The |+> row carries the energy E- of H in this frame, so the
peaks of |+> sit at d = -w21/2 - W and w21/2 - W for a resonant drive.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

from .model import AtomConfig, ConfigError, NumericalError


@dataclass(frozen=True)
class DressedFrame:
    psi: float
    e_plus: float
    e_minus: float
    e_split: float
    gamma_plus: float | None = None
    gamma_minus: float | None = None
    gamma_cross_pm: float | None = None
    gamma_cross_mp: float | None = None


@dataclass(frozen=True)
class DressedAmplitudes:
    b_plus: np.ndarray | complex
    b_minus: np.ndarray | complex

    @property
    def populations(self):
        return np.abs(self.b_plus) ** 2, np.abs(self.b_minus) ** 2


@dataclass(frozen=True)
class DressedTrajectory:
    """Slowly varying dressed amplitudes (dressed energies factored out)."""

    times: np.ndarray
    b_plus: np.ndarray
    b_minus: np.ndarray
    frame: DressedFrame
    config: AtomConfig

    def to_bare(self) -> tuple[np.ndarray, np.ndarray]:
        d_plus = self.b_plus * np.exp(-1j * self.frame.e_minus * self.times)
        d_minus = self.b_minus * np.exp(-1j * self.frame.e_plus * self.times)
        return from_dressed(DressedAmplitudes(d_plus, d_minus), self.config)


def drive_hamiltonian(config: AtomConfig) -> np.ndarray:
    ph = cmath.exp(1j * config.dphi)
    return np.array([[0.0, config.omega * ph],
                     [config.omega / ph, -config.delta]], dtype=complex)


def dressed_frame(config: AtomConfig) -> DressedFrame:
    """Eigenenergies, mixing angle and, for gamma2 = 0, the dressed decay rates."""
    if config.omega <= 0:
        raise ConfigError("dressed frame needs omega > 0 (mixing angle undefined)")
    root = math.hypot(config.delta, 2 * config.omega)
    e_plus = (-config.delta + root) / 2
    e_minus = (-config.delta - root) / 2
    psi = math.atan(e_minus / config.omega)
    rates = {}
    if config.gamma2 == 0:
        g_plus = config.gamma1 * math.cos(psi) ** 2
        g_minus = config.gamma1 * math.sin(psi) ** 2
        cross = math.sqrt(g_plus * g_minus)
        rates = dict(gamma_plus=g_plus, gamma_minus=g_minus,
                     gamma_cross_pm=cross, gamma_cross_mp=cross)
    return DressedFrame(psi, e_plus, e_minus, e_plus - e_minus, **rates)


def transform_matrix(config: AtomConfig) -> np.ndarray:
    """Unitary V with (b+, b-) = V (b1, b2)."""
    psi = dressed_frame(config).psi
    c, s = math.cos(psi), math.sin(psi)
    ph = cmath.exp(-1j * config.dphi)
    return np.array([[ph * c, s], [-ph * s, c]], dtype=complex)


def to_dressed(b1, b2, config: AtomConfig) -> DressedAmplitudes:
    v = transform_matrix(config)
    b1, b2 = np.asarray(b1, dtype=complex), np.asarray(b2, dtype=complex)
    return DressedAmplitudes(v[0, 0] * b1 + v[0, 1] * b2, v[1, 0] * b1 + v[1, 1] * b2)


def from_dressed(amps: DressedAmplitudes, config: AtomConfig) -> tuple[np.ndarray, np.ndarray]:
    vh = transform_matrix(config).conj().T
    bp, bm = np.asarray(amps.b_plus, dtype=complex), np.asarray(amps.b_minus, dtype=complex)
    return vh[0, 0] * bp + vh[0, 1] * bm, vh[1, 0] * bp + vh[1, 1] * bm


def dressed_initial(config: AtomConfig) -> DressedAmplitudes:
    """Dressed amplitudes of the prepared superposition sin(theta)|1> + cos(theta)|2>."""
    if config.delta == 0 and config.omega > 0:
        s, c = math.sin(config.theta), math.cos(config.theta)
        ph = cmath.exp(-1j * config.dphi)
        return DressedAmplitudes((ph * s - c) / math.sqrt(2), (ph * s + c) / math.sqrt(2))
    b1, b2 = config.initial_amplitudes
    return to_dressed(b1, b2, config)


def propagate_dressed(config: AtomConfig, horizon: float, n_samples: int = 2001,
                      initial: DressedAmplitudes | None = None, tol: float = 1e-11
                      ) -> DressedTrajectory:
    """Integrate the dressed amplitude equations for a non-decaying level |2>.

        db+/dt = -g+ b+ / 2 - g+- b- exp(-i E' t) / 2
        db-/dt = -g- b- / 2 - g-+ b+ exp(+i E' t) / 2

    with E' = E+ - E-.  The oscillation sign follows from |+> carrying the
    lower eigenenergy of the drive Hamiltonian in this frame.
    """
    if config.gamma2 != 0:
        raise ConfigError("dressed decay rates are only available for gamma2 = 0")
    if config.p != 0:
        raise ConfigError("dressed propagation ignores cross-channel terms; needs p = 0")
    if horizon <= 0:
        raise ValueError("horizon must be positive")
    frame = dressed_frame(config)
    if initial is None:
        initial = dressed_initial(config)
    gp, gm = frame.gamma_plus, frame.gamma_minus
    gpm, gmp = frame.gamma_cross_pm, frame.gamma_cross_mp
    split = frame.e_split

    def rhs(t, y):
        ph = cmath.exp(-1j * split * t)
        return np.array([-0.5 * gp * y[0] - 0.5 * gpm * y[1] * ph,
                         -0.5 * gm * y[1] - 0.5 * gmp * y[0] * ph.conjugate()])

    times = np.linspace(0.0, horizon, n_samples)
    y0 = np.array([complex(initial.b_plus), complex(initial.b_minus)])
    sol = solve_ivp(rhs, (0.0, horizon), y0, method="DOP853", t_eval=times, rtol=tol, atol=tol)
    if sol.status != 0:
        raise NumericalError(f"dressed integration failed: {sol.message}")
    return DressedTrajectory(times, sol.y[0], sol.y[1], frame, config)
