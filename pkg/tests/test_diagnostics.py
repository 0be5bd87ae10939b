import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from hodowave import diagnostics as dg
from hodowave.errors import DomainError, UnsupportedExponentError
from hodowave.flow import flow_constants


def test_flat_integral_means(flat):
    half_c2 = 0.5 * flat.c**2
    for p in (0.0, 0.3 * flat.m_abs, flat.m_abs):
        assert dg.integral_mean_Ms(flat, 1.0, p) == pytest.approx(half_c2, rel=1e-14)
        assert dg.integral_mean_Ms(flat, -2.0, p) == pytest.approx(half_c2**-2, rel=1e-14)


def test_means_decrease_to_bed(w1):
    assert dg.integral_mean_Ms(w1, 1.0, 0.0) >= dg.integral_mean_Ms(w1, 1.0, w1.m_abs)


@given(st.floats(-0.4999, 0.4999))
def test_mean_exponent_gap_rejected(s):
    with pytest.raises(UnsupportedExponentError):
        dg.check_mean_exponent(s)


@given(st.one_of(st.floats(-50, -0.5), st.floats(0.5, 50)))
def test_mean_exponent_outside_gap_accepted(s):
    dg.check_mean_exponent(s)


def test_period_exponent_ranges():
    for s in (-1.0, 0.5, 1.0, 1.5, 3.0):
        dg.check_period_exponent(s, "moving")
    for s in (0.75, 1.25):
        with pytest.raises(UnsupportedExponentError):
            dg.check_period_exponent(s, "moving")
    for s in (-0.5, 0.0, 0.5, 2.0):
        dg.check_period_exponent(s, "fixed")
    for s in (-0.25, 0.25):
        with pytest.raises(UnsupportedExponentError):
            dg.check_period_exponent(s, "fixed")
    with pytest.raises(DomainError):
        dg.check_period_exponent(1.0, "sideways")


def test_grid_and_level_guards(w1):
    with pytest.raises(DomainError):
        dg.period_T(w1, 0.0, n_q=32)
    with pytest.raises(DomainError):
        dg.period_T(w1, -1.0)
    with pytest.raises(DomainError):
        dg.region_area(w1, w1.m_abs, n_p=8)


def test_flat_period(flat):
    for p in (0.0, flat.m_abs):
        assert dg.period_T(flat, p) == pytest.approx(100.0 / -flat.c, rel=1e-14)


def test_period_bound_and_ordering(w1):
    T0, Tm = dg.period_T(w1, 0.0), dg.period_T(w1, w1.m_abs)
    assert T0 >= Tm
    assert Tm <= w1.wavelength / flow_constants(w1).delta


def test_flat_fixed_energy_vanishes(flat):
    assert dg.energy_period_fixed(flat, 0.5 * flat.m_abs) == pytest.approx(0.0, abs=1e-20)


def test_fixed_energy_bounds(w1):
    half_phi = 0.5 * w1.phi_max
    for p in np.linspace(0, w1.m_abs, 9):
        e = dg.energy_period_fixed(w1, p)
        assert 0 < e <= half_phi
        cs = half_phi * np.sqrt(dg.integral_mean_Ms(w1, 2.0, p, of="E0") * dg.integral_mean_Ms(w1, -2.0, p))
        assert e <= cs


def test_moving_energy_constant(w1, flat):
    for wave in (w1, flat):
        for p in (0.0, wave.m_abs):
            assert dg.energy_period_moving(wave, p) == pytest.approx(0.5 * wave.phi_max, rel=1e-12)


def test_exponent_energy_reductions(w1):
    p = 0.4 * w1.m_abs
    assert dg.energy_period_s(w1, 1.0, p, frame="moving") == pytest.approx(0.5 * w1.phi_max, rel=1e-12)
    assert dg.energy_period_s(w1, 0.0, p, frame="fixed") == pytest.approx(0.5 * dg.period_T(w1, p), rel=1e-12)


def test_flat_exponent_energy_closed_form(flat):
    s = 2.0
    expected = 2 ** (s - 2) * flat.phi_max * (0.5 * flat.c**2) ** (s - 1)
    assert dg.energy_period_s(flat, s, 10.0, frame="moving") == pytest.approx(expected, rel=1e-14)


def test_region_energy(w1):
    assert dg.region_energy(w1, 0.0) == 0.0
    half = 0.5 * w1.m_abs
    assert dg.region_energy(w1, half, frame="moving") == pytest.approx(0.25 * w1.phi_max * w1.m_abs, rel=1e-10)


def test_region_energy_derivative(w1):
    p, h = 0.5 * w1.m_abs, 1e-3 * w1.m_abs
    slope = (dg.region_energy(w1, p + h) - dg.region_energy(w1, p - h)) / (2 * h)
    assert slope == pytest.approx(dg.energy_period_fixed(w1, p), rel=1e-5)


def test_area_derivative(w1):
    p, h = 0.3 * w1.m_abs, 1e-3 * w1.m_abs
    slope = (dg.region_area(w1, p + h) - dg.region_area(w1, p - h)) / (2 * h)
    assert slope == pytest.approx(dg.period_T(w1, p), rel=1e-5)


def test_flat_area_is_rectangle(flat):
    p = 0.6 * flat.m_abs
    assert dg.region_area(flat, p) == pytest.approx(100.0 * p / -flat.c, rel=1e-13)


def test_area_matches_cell_area(w1):
    S = dg.region_area(w1, w1.m_abs)
    assert S == pytest.approx(dg.cell_area(w1), rel=1e-6)
    # Mean level zero: the cell area is L d.
    assert S == pytest.approx(100.0 * 10.0, rel=1e-10)


def test_area_and_length_bounds_on_steep_wave(w1):
    d0 = flow_constants(w1).delta0
    assert dg.region_area(w1, w1.m_abs) <= w1.m_abs * w1.phi_max / (2 * d0**2)
    assert dg.streamline_length(w1, w1.m_abs) <= np.sqrt(2) * w1.phi_max / (2 * d0)


def test_flat_wave_saturates_corrected_bounds(flat):
    # Uniform flow attains |m| phi_max / delta0^2 and phi_max / delta0 exactly,
    # so any bound with an extra factor below one fails here.
    d0 = flow_constants(flat).delta0
    assert dg.region_area(flat, flat.m_abs) == pytest.approx(flat.m_abs * flat.phi_max / d0**2, rel=1e-12)
    assert dg.streamline_length(flat, flat.m_abs) == pytest.approx(flat.phi_max / d0, rel=1e-12)


def test_lengths(w1, flat):
    assert dg.streamline_length(flat, 0.2 * flat.m_abs) == pytest.approx(100.0, rel=1e-13)
    top, bed = dg.streamline_length(w1, 0.0), dg.streamline_length(w1, w1.m_abs)
    assert top >= bed
    assert bed == pytest.approx(100.0, rel=1e-12)


def test_cell_energy(flat, w1):
    mv, fx, det = dg.total_cell_energy(flat)
    speed = -flat.c
    assert mv == pytest.approx(100 * speed * 10 * speed / 2, rel=1e-12)
    assert fx == pytest.approx(0.0, abs=1e-20)
    mv, fx, det = dg.total_cell_energy(w1)
    target = 0.5 * w1.phi_max * w1.m_abs
    assert mv == pytest.approx(target, rel=1e-8)
    assert det["moving_physical"] == pytest.approx(target, rel=1e-8)
    assert det["fixed_physical"] == pytest.approx(fx, rel=1e-8)


def test_surface_extrema(w1, flat):
    ex = dg.surface_energy_extrema(w1)
    assert ex.crest_ok and ex.trough_ok and ex.interior_max_on_surface
    assert abs(ex.bernoulli_gap) < 10 * w1.params.newton_tol
    assert ex.bernoulli_spread < 10 * w1.params.newton_tol
    assert dg.surface_energy_extrema(flat).status == "skipped"


@pytest.mark.parametrize(
    "functional, s",
    [("Ms", -1.0), ("T", None), ("EnergyFixed", None), ("Length", None), ("EnergyMovingS", 2.0)],
)
def test_quadrature_refinement(w1, functional, s):
    grid = np.linspace(0, w1.m_abs, 5)
    a = dg.diagnostic_curve(w1, functional, s=s, p_grid=grid, n_q=512).values
    b = dg.diagnostic_curve(w1, functional, s=s, p_grid=grid, n_q=1024).values
    assert np.max(np.abs(b / a - 1)) < 1e-10


def test_curve_contract(w1):
    c = dg.diagnostic_curve(w1, "T", n_points=65)
    assert c.values.size == 65 and c.units == "s" and c.s is None
    assert np.all(c.values > 0) and np.all(np.diff(c.p_grid) > 0)
    with pytest.raises(DomainError):
        dg.diagnostic_curve(w1, "Ms")
    with pytest.raises(DomainError):
        dg.diagnostic_curve(w1, "T", p_grid=[0.0, 2.0, 1.0])
    with pytest.raises(ValueError):
        dg.diagnostic_curve(w1, "Nonsense")
