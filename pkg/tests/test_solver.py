import numpy as np
import pytest
from scipy.optimize import brentq

from hodowave.errors import DomainError, SolverError
from hodowave.harness import perturb_coefficient
from hodowave.solver import (
    PhysicalParams,
    continuation_path,
    crest_trough,
    limiting_steepness,
    residual,
    solve_wave,
    stokes_expansion,
    stokes_phase_speed,
    surface_elevation,
)

# Regression values for L=100 m, d=10 m, H=5 m (N=256). N=512 reproduces c to
# round-off, and the residual below confirms the solution independently.
W1_C = -10.076061059189486
W1_PHI = 1007.6061059189486
W1_M = 98.13498809171162


def dispersion_speed(L, d, g=9.8, omega=7.3e-5):
    """Linear speed with the rotation coupling, by root-finding (independent of the solver)."""
    k = 2 * np.pi / L

    def gap(c):
        return c * c - (g + 2 * omega * c) / k * np.tanh(k * d)

    return brentq(gap, 1e-3, 1e3, xtol=1e-15)


def test_flat_wave_closed_form(flat):
    speed = dispersion_speed(100.0, 10.0)
    assert flat.is_flat
    assert -flat.c == pytest.approx(speed, rel=1e-14)
    assert flat.phi_max == pytest.approx(100.0 * speed, rel=1e-14)
    assert flat.m_abs == pytest.approx(10.0 * speed, rel=1e-14)
    assert flat.bernoulli_B == pytest.approx(0.5 * flat.c**2, rel=1e-14)
    assert flat.g_eff == pytest.approx(9.8 + 2 * 7.3e-5 * speed, rel=1e-15)
    assert residual(flat) < 1e-13


def test_flat_speed_near_rotation_free_value():
    # Without rotation the closed form gives 9.3199 m/s; rotation adds about 7e-4 m/s.
    assert dispersion_speed(100.0, 10.0, omega=0.0) == pytest.approx(9.3199, abs=1e-4)


@pytest.mark.parametrize("depth", [50.0, 100.0])
def test_small_height_matches_linear_dispersion(depth):
    w = solve_wave(PhysicalParams(100.0, depth, 0.1))
    assert -w.c == pytest.approx(dispersion_speed(100.0, depth), rel=1e-5)


def test_small_height_shallow_shows_amplitude_correction():
    # At d/L = 0.1, H/L = 1e-3 the second-order correction is about 4e-5.
    w = solve_wave(PhysicalParams(100.0, 10.0, 0.1))
    rel = -w.c / dispersion_speed(100.0, 10.0) - 1
    assert 1e-5 < rel < 1e-4


def test_w1_regression(w1):
    assert w1.c == pytest.approx(W1_C, rel=1e-12)
    assert w1.phi_max == pytest.approx(W1_PHI, rel=1e-12)
    assert w1.m_abs == pytest.approx(W1_M, rel=1e-12)
    assert w1.residual_norm < 1e-12
    assert residual(w1) <= w1.params.newton_tol


def test_w1_invariants(w1):
    crest, trough = crest_trough(w1)
    assert crest - trough == pytest.approx(5.0, abs=1e-10 * 100)
    assert w1.c < 0 and w1.g_eff > w1.params.g
    assert w1.g_eff == pytest.approx(w1.params.g - 2 * w1.params.omega * w1.c, rel=1e-15)
    q = np.linspace(0, w1.phi_max / 2, 200)
    eta = surface_elevation(w1, q)
    assert np.all(np.diff(eta) < 0)
    assert np.allclose(surface_elevation(w1, -q), eta, atol=1e-12)


def test_mode_doubling_changes_nothing(w1):
    fine = solve_wave(PhysicalParams(100.0, 10.0, 5.0, modes=512))
    assert fine.c == pytest.approx(w1.c, rel=1e-13)
    assert fine.m_abs == pytest.approx(w1.m_abs, rel=1e-13)


def test_stokes_order_one_is_linear():
    p = PhysicalParams(100.0, 10.0, 1.0)
    speed, _ = stokes_phase_speed(p, 1)
    assert speed == pytest.approx(dispersion_speed(100.0, 10.0), rel=1e-14)


def test_stokes_flat_is_flat_wave(flat):
    s = stokes_expansion(PhysicalParams(100.0, 10.0, 0.0))
    assert s.c == pytest.approx(flat.c, rel=1e-15)
    assert s.is_flat


def test_stokes_difference_is_quartic():
    ratios = np.array([0.005, 0.01, 0.02])
    diffs = []
    for r in ratios:
        p = PhysicalParams(100.0, 20.0, r * 100.0)
        diffs.append(abs(-solve_wave(p).c - stokes_phase_speed(p, 3)[0]))
    slope = np.polyfit(np.log(ratios), np.log(diffs), 1)[0]
    assert slope == pytest.approx(4.0, abs=0.3)


def test_stokes_order_rejected():
    with pytest.raises(DomainError):
        stokes_expansion(PhysicalParams(100.0, 10.0, 1.0), order=4)


def test_coriolis_raises_speed():
    base = dict(wavelength=100.0, depth=10.0, height=3.0)
    rot = solve_wave(PhysicalParams(**base))
    still = solve_wave(PhysicalParams(**base, omega=0.0))
    assert abs(rot.c) > abs(still.c)


def test_continuation_regression():
    waves = continuation_path(PhysicalParams(100.0, 10.0, 5.0), [1.0, 2.0, 3.0, 4.0, 5.0])
    speeds = np.array([-w.c for w in waves])
    assert len(waves) == 5 and np.all(np.diff(speeds) > 0)
    assert speeds[0] == pytest.approx(9.360150811693925, rel=1e-12)
    assert speeds[-1] == pytest.approx(-W1_C, rel=1e-12)


def test_continuation_edge_cases(flat):
    assert continuation_path(PhysicalParams(100.0, 10.0, 0.0), []) == []
    (w,) = continuation_path(PhysicalParams(100.0, 10.0, 0.0), [0.0])
    assert w.is_flat and w.c == pytest.approx(flat.c, rel=1e-15)
    with pytest.raises(DomainError):
        continuation_path(PhysicalParams(100.0, 10.0, 2.0), [2.0, 1.0])


@pytest.mark.parametrize(
    "kwargs",
    [
        dict(wavelength=-1.0, depth=10.0, height=1.0),
        dict(wavelength=100.0, depth=0.0, height=1.0),
        dict(wavelength=100.0, depth=10.0, height=-1.0),
        dict(wavelength=100.0, depth=10.0, height=20.0),
        dict(wavelength=100.0, depth=10.0, height=1.0, modes=0),
    ],
)
def test_invalid_params(kwargs):
    with pytest.raises(DomainError):
        PhysicalParams(**kwargs)


def test_steepness_cap_tracks_limit():
    assert limiting_steepness(10.0) == pytest.approx(0.142, rel=1e-12)
    cap = 0.85 * limiting_steepness(0.1) * 100
    PhysicalParams(100.0, 10.0, cap * 0.999)
    with pytest.raises(DomainError):
        PhysicalParams(100.0, 10.0, cap * 1.001)


def test_iteration_budget_exhaustion_is_reported():
    with pytest.raises(SolverError) as info:
        solve_wave(PhysicalParams(100.0, 10.0, 5.0, max_newton_iters=1, continuation_steps=1))
    assert info.value.height is not None


def test_perturbed_coefficient_breaks_residual(w1):
    assert residual(perturb_coefficient(w1, 0, 1e-3)) > w1.params.newton_tol
