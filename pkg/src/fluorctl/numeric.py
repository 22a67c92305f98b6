"""Time-domain integration with the cross-channel terms, and spectra from it.

Two independent routes are provided:

* the Markov-reduced amplitude equations (rotating frame, b2 = a2 exp(i D t)),
  integrated adaptively and Fourier transformed on the half line;
* a brute-force model with an explicit comb of discretized vacuum modes, in
  which the cross-channel interference is not inserted by hand but arises
  from both transitions coupling to the same modes.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp
from scipy.signal import czt

from .analytic import (ChannelAmplitudes, Spectrum, assemble_spectrum, channel_offsets, coefficients,
                       eigenvalues)
from .model import AtomConfig, DegenerateEigenvaluesError, ModeGrid, NumericalError


@dataclass(frozen=True)
class Quality:
    """Numerical knobs shared by the Markov and mode-comb routes."""

    tol: float = 1e-10
    stop_threshold: float = 1e-10
    t_max: float = 1e4
    dt_out_max: float = 0.01
    nyquist_margin: float = 4.0
    integrator: str = "DOP853"
    oracle_modes: int = 8001
    oracle_span_factor: float = 8.0
    oracle_horizon_factor: float = 12.0
    oracle_tol: float = 1e-10
    oracle_residual_tol: float = 1e-4

    def to_dict(self) -> dict:
        return dict(self.__dict__)


DEFAULT_QUALITY = Quality()


@dataclass(frozen=True)
class Trajectory:
    times: np.ndarray
    b1: np.ndarray
    b2: np.ndarray
    step_used: float
    residual_norm: float

    @property
    def populations(self) -> tuple[np.ndarray, np.ndarray]:
        return np.abs(self.b1) ** 2, np.abs(self.b2) ** 2


@dataclass(frozen=True)
class ModeOracleResult:
    grid: ModeGrid
    mode_populations: np.ndarray
    couplings: dict = field(repr=False)
    excited_residual: float = 0.0
    conservation_error: float = 0.0
    horizon: float = 0.0

    @property
    def density(self) -> np.ndarray:
        return self.mode_populations / self.grid.spacing


def markov_rhs(config: AtomConfig):
    """Right-hand side of the rotating-frame amplitude equations, cross terms included."""
    g1, g2 = config.gamma1, config.gamma2
    drive = 1j * config.omega * cmath.exp(1j * config.dphi)
    drive_c = 1j * config.omega * cmath.exp(-1j * config.dphi)
    cross = config.p * math.sqrt(g1 * g2) / 2
    chi = config.omega21 + config.delta
    d2 = 1j * config.delta - g2 / 2

    def rhs(t, y):
        b1, b2 = y[0], y[1]
        ph = cmath.exp(-1j * chi * t)
        return np.array([-g1 / 2 * b1 - (drive + cross * ph) * b2,
                         d2 * b2 - (drive_c + cross * ph.conjugate()) * b1])

    return rhs


def output_step(config: AtomConfig, grid: ModeGrid | None, quality: Quality = DEFAULT_QUALITY) -> float:
    """Uniform resampling step: a fixed margin below the Nyquist limit of the transform."""
    dt = quality.dt_out_max / config.gamma1
    if grid is not None:
        fmax = _max_transform_frequency(config, grid)
        if fmax > 0:
            dt = min(dt, math.pi / (quality.nyquist_margin * fmax))
    return dt


def _max_transform_frequency(config: AtomConfig, grid: ModeGrid) -> float:
    o1, o2 = channel_offsets(config)
    ends = (grid.delta_min, grid.delta_max)
    return max(abs(e + o) for e in ends for o in (o1, o2))


def propagate(config: AtomConfig, stop_threshold: float | None = None, tol: float | None = None,
              dt_out: float | None = None, quality: Quality = DEFAULT_QUALITY) -> Trajectory:
    """Integrate until the excited-state norm drops below ``stop_threshold``.

    The adaptive solution is resampled on a uniform grid ending exactly at the
    stopping time; ``dt_out`` defaults to ``quality.dt_out_max / gamma1``.
    """
    stop = quality.stop_threshold if stop_threshold is None else stop_threshold
    tol = quality.tol if tol is None else tol
    if not 0 < stop < 1:
        raise ValueError("stop_threshold must lie in (0, 1)")
    if tol <= 0:
        raise ValueError("tol must be positive")
    rhs = markov_rhs(config)
    y0 = np.array(config.initial_amplitudes, dtype=complex)
    if float(np.sum(np.abs(y0) ** 2)) < stop:
        raise ValueError("initial norm already below stop threshold")

    def below(t, y):
        return abs(y[0]) ** 2 + abs(y[1]) ** 2 - stop

    below.terminal = True
    below.direction = -1
    t_max = quality.t_max / config.gamma1
    sol = solve_ivp(rhs, (0.0, t_max), y0, method=quality.integrator, rtol=tol, atol=tol,
                    dense_output=True, events=below)
    if sol.status == -1:
        raise NumericalError(f"integration failed: {sol.message}")
    if sol.status != 1:
        raise NumericalError(f"norm did not fall below {stop:g} before t = {t_max:g}")
    t_stop = float(sol.t_events[0][0])
    dt = quality.dt_out_max / config.gamma1 if dt_out is None else dt_out
    n = max(1, math.ceil(t_stop / dt))
    times = np.linspace(0.0, t_stop, n + 1)
    y = sol.sol(times)
    y[:, 0] = y0
    residual = float(abs(y[0, -1]) ** 2 + abs(y[1, -1]) ** 2)
    return Trajectory(times, y[0].copy(), y[1].copy(), t_stop / n, residual)


def half_line_transform(samples: np.ndarray, dt: float, freqs_start: float, freqs_step: float,
                        n_freqs: int, deriv0: complex | None = None,
                        derivs_end: np.ndarray | None = None) -> np.ndarray:
    """Trapezoid sum of f(t) exp(i w t) over the sampled interval, for a uniform set of w.

    Evaluated as a chirp-z transform.  When the derivative of ``samples`` at
    both ends is supplied the leading Euler-Maclaurin end correction is
    applied, which raises the quadrature to fourth order.
    """
    w = samples.astype(complex).copy()
    w[0] *= 0.5
    w[-1] *= 0.5
    total = czt(w, m=n_freqs, w=cmath.exp(1j * freqs_step * dt),
                a=cmath.exp(-1j * freqs_start * dt)) * dt
    if deriv0 is not None and derivs_end is not None:
        freqs = freqs_start + freqs_step * np.arange(n_freqs)
        t_end = dt * (len(samples) - 1)
        f0 = deriv0 + 1j * freqs * samples[0]
        f1 = (derivs_end + 1j * freqs * samples[-1]) * np.exp(1j * freqs * t_end)
        total -= dt ** 2 / 12 * (f1 - f0)
    return total


def _decay_rate_estimate(traj: Trajectory) -> float:
    norm = np.abs(traj.b1) ** 2 + np.abs(traj.b2) ** 2
    k = max(1, len(norm) // 10)
    ratio = norm[-k - 1] / max(norm[-1], 1e-300)
    span = traj.times[-1] - traj.times[-k - 1]
    return max(math.log(max(ratio, 1.0 + 1e-12)) / (2 * span), 1e-12)


def channel_transforms(trajectory: Trajectory, config: AtomConfig, grid: ModeGrid
                       ) -> tuple[ChannelAmplitudes, float]:
    """Channel amplitudes A, B from the half-line Fourier transform of (b1, b2).

    Returns the amplitudes and a bound on the truncation tail
    |b(T)| / kappa, kappa being the decay rate observed at the end.
    """
    dt = trajectory.step_used
    fmax = _max_transform_frequency(config, grid)
    if fmax * dt > math.pi:
        raise NumericalError(
            f"Nyquist violation: sample step {dt:g} too coarse for |frequency| {fmax:g}")
    rhs = markov_rhs(config)
    t_end = trajectory.times[-1]
    y0 = np.array([trajectory.b1[0], trajectory.b2[0]])
    y1 = np.array([trajectory.b1[-1], trajectory.b2[-1]])
    d0, d1 = rhs(0.0, y0), rhs(t_end, y1)
    o1, o2 = channel_offsets(config)
    step = grid.spacing
    a = -1j * half_line_transform(trajectory.b1, dt, grid.delta_min + o1, step, grid.n_points,
                                  d0[0], d1[0])
    b = -1j * half_line_transform(trajectory.b2, dt, grid.delta_min + o2, step, grid.n_points,
                                  d0[1], d1[1])
    tail = math.sqrt(trajectory.residual_norm) / _decay_rate_estimate(trajectory)
    return ChannelAmplitudes(a, b), tail


def spectrum(config: AtomConfig, grid: ModeGrid, quality: Quality = DEFAULT_QUALITY) -> Spectrum:
    """Emission spectrum for any alignment p from the Markov equations."""
    traj = propagate(config, dt_out=output_step(config, grid, quality), quality=quality)
    channels, _ = channel_transforms(traj, config, grid)
    return assemble_spectrum(config, grid, channels, "fourier")


def decay_integral(trajectory: Trajectory, config: AtomConfig) -> float:
    """Probability emitted up to the last sample, from the time-domain decay rate.

    g1 |b1|^2 + g2 |b2|^2 + 2 p sqrt(g1 g2) Re(conj(b1) b2 exp(-i (w21 + D) t)),
    integrated by the trapezoid rule.
    """
    t = trajectory.times
    b1, b2 = trajectory.b1, trajectory.b2
    chi = config.omega21 + config.delta
    rate = (config.gamma1 * np.abs(b1) ** 2 + config.gamma2 * np.abs(b2) ** 2
            + 2 * config.p * math.sqrt(config.gamma1 * config.gamma2)
            * np.real(np.conj(b1) * b2 * np.exp(-1j * chi * t)))
    return float(np.trapezoid(rate, t))


# --- discretized-mode oracle -------------------------------------------------

def _oracle_lattice(config: AtomConfig, grid: ModeGrid, quality: Quality):
    n = int(quality.oracle_modes)
    if n % 2 == 0:
        n += 1
    half = quality.oracle_span_factor * (grid.delta_max - grid.delta_min) / 2
    step = 2 * half / (n - 1)
    sep = abs(config.omega21 + config.delta)
    if sep > 0:
        # keep both transitions and their midpoint on one common lattice
        step = (sep / 2) / max(1, round((sep / 2) / step))
        n = 2 * math.ceil(half / step) + 1
    return n, step


def default_horizon(config: AtomConfig, quality: Quality = DEFAULT_QUALITY) -> float:
    try:
        sol = coefficients(config)
        # an exponent with no amplitude in it does not limit the decay
        rates = [abs(lam.real) for lam, c, cp in ((sol.lambda1, sol.c1, sol.c1p),
                                                  (sol.lambda2, sol.c2, sol.c2p))
                 if abs(c) + abs(cp) > 1e-14]
    except DegenerateEigenvaluesError:
        rates = [abs(lam.real) for lam in eigenvalues(config, allow_degenerate=True)]
    slowest = min(rates)
    return quality.oracle_horizon_factor / max(slowest, 1e-6 * config.gamma1)


def mode_oracle(config: AtomConfig, grid: ModeGrid, horizon: float | None = None,
                quality: Quality = DEFAULT_QUALITY) -> ModeOracleResult:
    """Integrate the excited amplitudes together with an explicit comb of vacuum modes.

    Each bath is a uniform comb with flat coupling g = sqrt(gamma dd / 2 pi).
    A private bath is centered on its own transition so that the band edges
    produce no level shift; a bath shared by both transitions (p > 0) is
    centered on the doublet midpoint.  For 0 < p < 1 level |2> couples to the
    shared comb with weight p and to a private comb with sqrt(1 - p^2).
    Returns |a_k(T)|^2 per lattice point, summed over baths.
    """
    if horizon is None:
        horizon = default_horizon(config, quality)
    n, step = _oracle_lattice(config, grid, quality)
    if horizon > math.pi / step:
        raise NumericalError(
            f"horizon {horizon:g} exceeds half the comb recurrence time {2 * math.pi / step:g}")
    tr1 = -config.omega21 / 2
    tr2 = config.omega21 / 2 + config.delta
    mid = (tr1 + tr2) / 2
    g = math.sqrt(step / (2 * math.pi))
    sg1, sg2 = math.sqrt(config.gamma1), math.sqrt(config.gamma2)
    p = config.p
    baths = []  # (center, coupling to |1>, coupling to |2>)
    if p == 0:
        baths.append((tr1, sg1 * g, 0.0))
        if config.gamma2 > 0:
            baths.append((tr2, 0.0, sg2 * g))
    else:
        baths.append((mid, sg1 * g, p * sg2 * g))
        if p < 1 and config.gamma2 > 0:
            baths.append((tr2, 0.0, math.sqrt(1 - p * p) * sg2 * g))
    offsets = np.arange(n) - (n - 1) // 2
    det, k1, k2, idx = [], [], [], []
    for center, c1, c2 in baths:
        base = round((center - tr1) / step)
        det.append(tr1 + (base + offsets) * step)
        idx.append(base + offsets)
        k1.append(np.full(n, c1))
        k2.append(np.full(n, c2))
    det, k1, k2, idx = (np.concatenate(v) for v in (det, k1, k2, idx))
    if det.min() > grid.delta_min or det.max() < grid.delta_max:
        raise NumericalError("mode comb does not cover the requested grid")

    w1 = det - tr1
    sep = tr2 - tr1
    drive = 1j * config.omega * cmath.exp(1j * config.dphi)
    drive_c = 1j * config.omega * cmath.exp(-1j * config.dphi)
    d2 = 1j * config.delta

    def rhs(t, y):
        e1 = np.exp(1j * w1 * t)
        e2 = e1 * cmath.exp(-1j * sep * t)
        b1, b2, modes = y[0], y[1], y[2:]
        out = np.empty_like(y)
        out[0] = -drive * b2 - 1j * np.dot(k1, modes * e1.conj())
        out[1] = d2 * b2 - drive_c * b1 - 1j * np.dot(k2, modes * e2.conj())
        out[2:] = -1j * (k1 * b1 * e1 + k2 * b2 * e2)
        return out

    y0 = np.zeros(2 + det.size, dtype=complex)
    y0[0], y0[1] = config.initial_amplitudes
    checks = np.linspace(0.0, horizon, 21)
    sol = solve_ivp(rhs, (0.0, horizon), y0, method=quality.integrator, t_eval=checks,
                    rtol=quality.oracle_tol, atol=quality.oracle_tol * g)
    if sol.status != 0:
        raise NumericalError(f"mode oracle integration failed: {sol.message}")
    total = np.sum(np.abs(sol.y) ** 2, axis=0)
    conservation = float(np.max(np.abs(total - 1.0)))
    final = sol.y[:, -1]
    residual = float(abs(final[0]) ** 2 + abs(final[1]) ** 2)
    if residual > quality.oracle_residual_tol:
        raise NumericalError(f"insufficient horizon: excited residual {residual:.3g}")
    lo, hi = int(idx.min()), int(idx.max())
    pops = np.zeros(hi - lo + 1)
    np.add.at(pops, idx - lo, np.abs(final[2:]) ** 2)
    lattice = ModeGrid(tr1 + lo * step, tr1 + hi * step, hi - lo + 1)
    return ModeOracleResult(lattice, pops, {"step": step, "gamma1_mode": k1, "gamma2_mode": k2},
                            residual, conservation, horizon)
