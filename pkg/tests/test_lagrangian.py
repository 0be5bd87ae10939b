import csv

import numpy as np
import pytest

from hodowave import diagnostics as dg
from hodowave.errors import DomainError
from hodowave.flow import surface_profile
from hodowave.lagrangian import (
    integrate_many,
    integrate_particle,
    integrate_particle_physical,
    pattern_shift_check,
    time_domain_energy,
    trace_streamline,
    write_trajectory_csv,
)


def test_flat_streamline_is_horizontal(flat):
    p = 0.3 * flat.m_abs
    line = trace_streamline(flat, p, 64)
    assert np.allclose(line.z, -p / -flat.c, atol=1e-12)
    assert np.allclose(line.slope, 0.0, atol=1e-15)


def test_surface_streamline_matches_profile(w1):
    line = trace_streamline(w1, 0.0, 256)
    prof = surface_profile(w1, 256)
    # surface_profile starts at the trough; the streamline starts at the crest.
    shifted = np.roll(prof, -128, axis=0)
    shifted[128:, 0] += w1.wavelength
    assert np.max(np.abs(line.x - shifted[:, 0])) < 1e-10 * w1.wavelength
    assert np.max(np.abs(line.z - shifted[:, 1])) < 1e-10 * w1.wavelength


def test_bed_streamline_is_flat(w1):
    line = trace_streamline(w1, w1.m_abs, 128)
    assert np.max(np.abs(line.z + 10.0)) < 1e-10


def test_streamline_slope_matches_geometry(w1):
    line = trace_streamline(w1, 0.5 * w1.m_abs, 512)
    assert np.max(np.abs(line.slope_from_geometry() - line.slope)) < 1e-6


def test_trace_guards(w1):
    with pytest.raises(DomainError):
        trace_streamline(w1, 0.0, 32)
    with pytest.raises(DomainError):
        integrate_particle(w1, 0.0, 0.0, tol=1e-13)


def test_flat_period_and_energy(flat):
    tr = integrate_particle(flat, 0.0, 0.5 * flat.m_abs)
    assert tr.measured_period == pytest.approx(100.0 / -flat.c, rel=1e-12)
    assert time_domain_energy(flat, 0.5 * flat.m_abs, frame="fixed") == pytest.approx(0.0, abs=1e-20)
    assert pattern_shift_check(flat, 0.5 * flat.m_abs)


def test_start_point_independence(w1):
    p = 0.5 * w1.m_abs
    starts = [k * w1.phi_max / 8 for k in range(8)]
    periods = np.array([t.measured_period for t in integrate_many(w1, starts, p)])
    assert np.ptp(periods) / periods.mean() < 1e-8
    assert periods.mean() == pytest.approx(dg.period_T(w1, p), rel=1e-7)


def test_time_domain_energies(w1):
    p = 0.5 * w1.m_abs
    assert time_domain_energy(w1, p, 0.0, "moving") == pytest.approx(0.5 * w1.phi_max, rel=1e-7)
    fixed_ref = dg.energy_period_fixed(w1, p)
    values = [time_domain_energy(w1, p, q0, "fixed") for q0 in np.arange(4) * w1.phi_max / 4]
    assert np.allclose(values, fixed_ref, rtol=1e-6)
    with pytest.raises(DomainError):
        time_domain_energy(w1, p, 0.0, "rotating")


def test_trajectory_invariants(w1):
    p = 0.25 * w1.m_abs
    tr = integrate_particle(w1, 17.0, p)
    assert np.all(tr.points_qp[:, 1] == p)
    assert np.all(np.diff(tr.times) > 0)
    assert tr.arclength == pytest.approx(dg.streamline_length(w1, p), rel=1e-6)
    line = trace_streamline(w1, p, 1024)
    assert tr.arclength == pytest.approx(line.arclength(), rel=1e-6)


@pytest.mark.parametrize("frac", [0.0, 0.5, 1.0])
def test_physical_cross_check(w1, frac):
    p = frac * w1.m_abs
    ref = integrate_particle(w1, 0.3, p, tol=1e-11)
    phys = integrate_particle_physical(w1, 0.3, p, tol=1e-11)
    assert phys.measured_period == pytest.approx(ref.measured_period, rel=1e-10)
    assert phys.p_drift < 1e-9 * w1.m_abs


@pytest.mark.parametrize("frac", [0.0, 0.5, 1.0])
def test_pattern_shift(w1, frac):
    assert pattern_shift_check(w1, frac * w1.m_abs)


def test_pattern_shift_negative_control(w1):
    assert not pattern_shift_check(w1, 0.5 * w1.m_abs, period_fraction=0.99)


def test_trajectory_csv(w1, tmp_path):
    tr = integrate_particle(w1, 0.0, 10.0, n_out=33)
    path = tmp_path / "t.csv"
    write_trajectory_csv(tr, path)
    rows = list(csv.reader(open(path)))
    assert rows[0] == ["t", "q", "p", "x", "z", "u", "w"]
    assert len(rows) == 34
    assert float(rows[-1][0]) == pytest.approx(tr.measured_period, rel=1e-15)
