import cmath
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import random_config
from fluorctl import analytic
from fluorctl.model import AtomConfig, ConfigError, DegenerateEigenvaluesError, ModeGrid, preset

FIG3 = preset("fig3a").config
FIG5 = preset("fig5a").config


def quadratic_roots(config):
    """Independent oracle: numpy polynomial roots of the characteristic polynomial."""
    tr, det = analytic.characteristic(config)
    return sorted(np.roots([1.0, -tr, det]), key=lambda z: (z.real, z.imag))


def test_eigen_identities_randomized():
    rng = np.random.default_rng(12345)
    worst = 0.0
    for _ in range(1000):
        cfg = random_config(rng)
        tr, det = analytic.characteristic(cfg)
        l1, l2 = analytic.eigenvalues(cfg, allow_degenerate=True)
        worst = max(worst, abs(l1 + l2 - tr) / max(1.0, abs(tr)),
                    abs(l1 * l2 - det) / max(1.0, abs(det)))
    assert worst < 1e-12


def test_eigenvalue_examples():
    l1, l2 = analytic.eigenvalues(FIG3)
    assert l1 == pytest.approx(-0.45, abs=1e-14) and l2 == pytest.approx(-0.05, abs=1e-14)
    assert sorted([l1, l2], key=lambda z: z.real) == pytest.approx(quadratic_roots(FIG3))
    g, om = 0.7, 2.3
    l1, l2 = analytic.eigenvalues(AtomConfig(gamma1=g, gamma2=g, omega=om))
    assert {complex(round(z.real, 12), round(z.imag, 12)) for z in (l1, l2)} == \
        {complex(-g / 2, om), complex(-g / 2, -om)}
    l1, l2 = analytic.eigenvalues(AtomConfig(gamma1=1.0, gamma2=0.4, omega=0.0))
    assert sorted([l1.real, l2.real]) == pytest.approx([-0.5, -0.2], abs=1e-15)
    assert l1.imag == l2.imag == 0.0


def test_degenerate_eigenvalues_raise():
    # gamma1 = 1, gamma2 = 0, omega = 1/4 gives a double root at -1/4
    cfg = AtomConfig(gamma1=1.0, gamma2=0.0, omega=0.25)
    with pytest.raises(DegenerateEigenvaluesError):
        analytic.eigenvalues(cfg)
    l1, l2 = analytic.eigenvalues(cfg, allow_degenerate=True)
    assert abs(l1 - l2) < 1e-6


def test_initial_conditions_randomized():
    rng = np.random.default_rng(7)
    for _ in range(300):
        cfg = random_config(rng)
        sol = analytic.coefficients(cfg)
        assert abs(sol.c1 + sol.c2 - math.sin(cfg.theta)) < 1e-10
        assert abs(sol.c1p + sol.c2p - math.cos(cfg.theta)) < 1e-10


def test_weak_field_coefficients():
    g1, om, dphi = 1.0, 0.01, 0.7
    sol = analytic.coefficients(AtomConfig(gamma1=g1, omega=om, dphi=dphi))
    drive = 1j * om * cmath.exp(1j * dphi)
    assert sol.c1 == pytest.approx(math.sqrt(2) / g1 * (g1 / 2 + drive), abs=5 * om ** 2)
    assert sol.c2 == pytest.approx(-math.sqrt(2) / g1 * drive, abs=5 * om ** 2)


def test_pure_state_coefficients():
    sol = analytic.coefficients(AtomConfig(gamma1=1.0, gamma2=0.3, theta=math.pi / 2))
    assert sorted([abs(sol.c1), abs(sol.c2)]) == pytest.approx([0.0, 1.0], abs=1e-15)


def test_amplitudes_satisfy_ode():
    rng = np.random.default_rng(3)
    for _ in range(50):
        cfg = random_config(rng)
        try:
            sol = analytic.coefficients(cfg)
        except DegenerateEigenvaluesError:
            continue
        t = rng.uniform(0, 5, size=8)
        b1, b2 = analytic.amplitudes(cfg, t)
        e1, e2 = np.exp(sol.lambda1 * t), np.exp(sol.lambda2 * t)
        db1 = sol.lambda1 * sol.c1 * e1 + sol.lambda2 * sol.c2 * e2
        db2 = sol.lambda1 * sol.c1p * e1 + sol.lambda2 * sol.c2p * e2
        m = analytic.drift_matrix(cfg)
        scale = 1 + np.abs(m).max()
        assert np.allclose(db1, m[0, 0] * b1 + m[0, 1] * b2, atol=1e-10 * scale)
        assert np.allclose(db2, m[1, 0] * b1 + m[1, 1] * b2, atol=1e-10 * scale)


def test_norm_derivative_by_finite_differences():
    rng = np.random.default_rng(11)
    h = 1e-5
    for _ in range(100):
        cfg = random_config(rng)
        t = rng.uniform(0.1, 4.0)
        try:
            (p1m, p2m), (p1, p2), (p1p, p2p) = (
                (np.abs(b) ** 2 for b in analytic.amplitudes(cfg, s)) for s in (t - h, t, t + h))
        except DegenerateEigenvaluesError:
            continue
        fd = ((p1p + p2p) - (p1m + p2m)) / (2 * h)
        exact = -cfg.gamma1 * p1 - cfg.gamma2 * p2
        assert abs(fd - exact) <= 1e-6 * max(abs(exact), 1e-3)


def test_label_swap_invariance():
    """Exchanging the two roots in the coefficient formulas leaves b(t) unchanged."""
    rng = np.random.default_rng(5)
    for _ in range(50):
        cfg = random_config(rng)
        sol = analytic.coefficients(cfg)
        s, c = math.sin(cfg.theta), math.cos(cfg.theta)
        drive = 1j * cfg.omega * cmath.exp(1j * cfg.dphi)
        l1, l2 = sol.lambda2, sol.lambda1  # swapped labels
        c1 = ((l2 + cfg.gamma1 / 2) * s + drive * c) / (l2 - l1)
        c2 = ((l1 + cfg.gamma1 / 2) * s + drive * c) / (l1 - l2)
        t = np.linspace(0, 3, 7)
        b1, _ = analytic.amplitudes(cfg, t)
        assert np.allclose(b1, c1 * np.exp(l1 * t) + c2 * np.exp(l2 * t), atol=1e-10)


def test_amplitudes_at_zero_and_equal_decay_populations():
    b1, b2 = analytic.amplitudes(FIG3.replace(theta=0.3), 0.0)
    assert b1 == pytest.approx(math.sin(0.3)) and b2 == pytest.approx(math.cos(0.3))
    t = np.linspace(0, 6, 301)
    g, om = FIG5.gamma1, FIG5.omega
    for dphi in (0.0, math.pi):
        p1, p2 = (np.abs(b) ** 2 for b in analytic.amplitudes(FIG5.replace(dphi=dphi), t))
        assert np.allclose(p1, 0.5 * np.exp(-g * t), atol=1e-12)
        assert np.allclose(p2, 0.5 * np.exp(-g * t), atol=1e-12)
    p1, p2 = (np.abs(b) ** 2 for b in analytic.amplitudes(FIG5.replace(dphi=math.pi / 2), t))
    assert np.allclose(p1, 0.5 * np.exp(-g * t) * (1 + np.sin(2 * om * t)), atol=1e-12)
    assert np.allclose(p2, 0.5 * np.exp(-g * t) * (1 - np.sin(2 * om * t)), atol=1e-12)


def test_negative_time_rejected():
    with pytest.raises(ValueError):
        analytic.amplitudes(FIG3, -1.0)


def test_spectrum_requires_p0():
    with pytest.raises(ConfigError, match="analytic requires p = 0"):
        analytic.spectrum_p0(FIG3.replace(p=1.0), ModeGrid(-4, 4, 11))


def test_fig3a_exact_zero():
    grid = ModeGrid(-0.65, 0.65, 3)
    spec = analytic.spectrum_p0(FIG3, grid)
    assert spec.s_total[0] < 1e-30
    assert analytic.fano_zero(FIG3) == pytest.approx(-0.65, abs=1e-15)
    assert analytic.fano_zero(FIG3.replace(dphi=math.pi)) == pytest.approx(-0.35, abs=1e-15)
    assert analytic.fano_zero(FIG3.replace(dphi=math.pi / 2)) is None


@given(st.floats(0.2, 1.4), st.floats(0.05, 0.6), st.floats(0.3, 3.0))
def test_zero_location_any_theta(theta, omega, omega21):
    cfg = AtomConfig(gamma1=1.0, omega=omega, omega21=omega21, theta=theta)
    x0 = -omega21 / 2 - omega / math.tan(theta)
    assert analytic.fano_zero(cfg) == pytest.approx(x0, abs=1e-12)
    try:
        spec = analytic.spectrum_p0(cfg, ModeGrid(x0 - 1, x0 + 1, 3))
    except DegenerateEigenvaluesError:
        return
    assert spec.s_total[1] <= 1e-20 * spec.s_total.max() + 1e-28


def test_zeros_mirror_about_midpoint_offset():
    for pr in ("fig3a", "fig4a"):
        cfg = preset("fig3a").config
        z0, zpi = analytic.fano_zero(cfg), analytic.fano_zero(cfg.replace(dphi=math.pi))
        assert z0 + zpi == pytest.approx(-cfg.omega21, abs=1e-14)


def test_equal_decay_matches_general_form():
    rng = np.random.default_rng(17)
    grid = ModeGrid(-15, 15, 1201)
    for _ in range(20):
        g = rng.uniform(0.3, 2.0)
        cfg = AtomConfig(gamma1=g, gamma2=g, omega=rng.uniform(0.1, 6), omega21=rng.uniform(0, 5),
                         theta=rng.uniform(0, math.pi / 2), dphi=rng.uniform(0, 2 * math.pi))
        a = analytic.spectrum_p0(cfg, grid).s_total
        b = analytic.equal_decay_spectrum(cfg, grid).s_total
        assert np.max(np.abs(a - b) / np.maximum(np.abs(b), 1e-300)) < 1e-12 or \
            np.max(np.abs(a - b)) < 1e-12 * b.max()


def test_equal_decay_preconditions():
    with pytest.raises(ConfigError):
        analytic.equal_decay_spectrum(FIG3, ModeGrid(-1, 1, 5))
    with pytest.raises(ConfigError):
        analytic.weak_field_spectrum(FIG5, ModeGrid(-1, 1, 5))


@pytest.mark.parametrize("dphi, zero", [(0.0, -0.65), (math.pi, -0.35), (math.pi / 2, None)])
def test_weak_field_form(dphi, zero):
    cfg = FIG3.replace(dphi=dphi)
    grid = ModeGrid(-3, 3, 6001)
    weak = analytic.weak_field_spectrum(cfg, grid).s_total
    # the expansion converges as the drive weakens
    for om, tol in ((0.05, 0.03), (0.02, 0.005)):
        c = cfg.replace(omega=om)
        w, e = (f(c, grid).s_total for f in (analytic.weak_field_spectrum, analytic.spectrum_p0))
        assert np.max(np.abs(w - e)) < tol * e.max()
    i = int(np.argmin(np.abs(grid.points - (zero if zero is not None else -0.5))))
    if zero is None:
        assert weak[i] > 1e-2 * weak.max()
    else:
        assert weak[i] < 1e-25


def test_fig5a_lorentzian_pair():
    grid = ModeGrid(-12, 12, 2001)
    spec = analytic.spectrum_p0(FIG5, grid)
    x = grid.points
    lor = sum(0.5 / (2 * np.pi) * FIG5.gamma1 / ((x - c) ** 2 + 0.25) for c in (3.5, 6.5))
    assert np.max(np.abs(spec.s_total - lor)) < 1e-12


def test_single_lorentzian_half_width():
    grid = ModeGrid(-5, 5, 100001)
    cfg = AtomConfig(gamma1=1.3, theta=math.pi / 2, omega21=1.0)
    s = analytic.spectrum_p0(cfg, grid).s_total
    above = grid.points[s >= s.max() / 2]
    assert (above[-1] - above[0]) / 2 == pytest.approx(cfg.gamma1 / 2, abs=2 * grid.spacing)
    assert grid.points[np.argmax(s)] == pytest.approx(-0.5, abs=grid.spacing)


def test_pole_weights_sum_and_centers():
    cfg = preset("fig5c").config
    w1, w2 = analytic.pole_weights(cfg)
    # interference between distinct poles integrates to zero for the equal-decay case
    assert w1 + w2 == pytest.approx(1.0, abs=1e-12)
    centers = analytic.pole_centers(FIG5)
    assert sorted(centers["lambda1"]) == pytest.approx([-6.5, -3.5])
    assert sorted(centers["lambda2"]) == pytest.approx([3.5, 6.5])
    assert analytic.pole_weights(FIG5)[0] < 1e-30
