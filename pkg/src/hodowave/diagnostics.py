"""Streamline and kinetic-energy functionals of a solved wave.

Every functional is an integral over a level line ``p = const`` of the strip
(periodic trapezoid rule in ``q``, spectrally accurate) or over ``[0, p]`` of
such line integrals (Gauss-Legendre in ``p``).  ``p = 0`` is the free surface.

Units: ``Ms`` carries (m^2/s^2)^s, ``T`` seconds, per-period energies
m^2/s (kinetic energy per unit mass times time), region energies m^4/s^2 per
unit mass and span, ``Area`` m^2 and ``Length`` m.
"""

from __future__ import annotations

import enum
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate, optimize

from .errors import DomainError, UnsupportedExponentError
from .solver import ConformalWave
from .spectral import eval_map_derivative, eval_on_line

DEFAULT_NQ = 512
DEFAULT_NP = 32


class Functional(str, enum.Enum):
    Ms = "Ms"
    T = "T"
    EnergyFixed = "EnergyFixed"
    EnergyMoving = "EnergyMoving"
    EnergyFixedS = "EnergyFixedS"
    EnergyMovingS = "EnergyMovingS"
    RegionEnergyFixed = "RegionEnergyFixed"
    RegionEnergyMoving = "RegionEnergyMoving"
    RegionEnergyFixedS = "RegionEnergyFixedS"
    RegionEnergyMovingS = "RegionEnergyMovingS"
    Area = "Area"
    Length = "Length"


UNITS = {
    Functional.Ms: "(m^2/s^2)^s",
    Functional.T: "s",
    Functional.EnergyFixed: "m^2/s",
    Functional.EnergyMoving: "m^2/s",
    Functional.EnergyFixedS: "m^(2s)/s^(2s-1)",
    Functional.EnergyMovingS: "m^(2s)/s^(2s-1)",
    Functional.RegionEnergyFixed: "m^4/s^2",
    Functional.RegionEnergyMoving: "m^4/s^2",
    Functional.RegionEnergyFixedS: "m^(2s+2)/s^(2s)",
    Functional.RegionEnergyMovingS: "m^(2s+2)/s^(2s)",
    Functional.Area: "m^2",
    Functional.Length: "m",
}


@dataclass
class DiagnosticCurve:
    functional: Functional
    p_grid: np.ndarray
    values: np.ndarray
    quadrature_n: int
    s: float | None = None
    meta: dict = field(default_factory=dict)

    @property
    def units(self) -> str:
        return UNITS[self.functional]


def _in_gap(s: float) -> bool:
    return -0.5 < s < 0.5


def check_mean_exponent(s: float) -> None:
    if _in_gap(s):
        raise UnsupportedExponentError(f"exponent {s!r} lies in the excluded gap (-1/2, 1/2)")


def check_period_exponent(s: float, frame: str) -> None:
    if frame == "moving":
        if s == 1.0 or not _in_gap(s - 1.0):
            return
        raise UnsupportedExponentError(
            f"moving-frame exponent {s!r} must lie in (-inf, 1/2] U [3/2, inf) or equal 1"
        )
    if frame == "fixed":
        if s == 0.0 or not _in_gap(s):
            return
        raise UnsupportedExponentError(
            f"fixed-frame exponent {s!r} must lie in (-inf, -1/2] U [1/2, inf) or equal 0"
        )
    raise DomainError(f"unknown frame {frame!r}")


def _check_nq(n_q: int) -> None:
    if n_q < 64:
        raise DomainError("n_q must be at least 64")


def line_fields(wave: ConformalWave, p: float, n_q: int = DEFAULT_NQ):
    """``(E, E0, dZ/dzeta)`` at ``q_l = l phi_max / n_q`` on the level ``p``."""
    _check_nq(n_q)
    if not 0.0 <= p <= wave.m_abs * (1 + 1e-12):
        raise DomainError(f"p = {p!r} outside [0, {wave.m_abs!r}]")
    dz = eval_on_line(wave.series, min(p, wave.m_abs), n_q, derivative=True)
    fprime = 1.0 / dz
    E = 0.5 * np.abs(fprime) ** 2
    E0 = 0.5 * np.abs(fprime + wave.c) ** 2
    return E, E0, dz


def _line_mean(values) -> float:
    return float(np.mean(values))


def integral_mean_Ms(wave: ConformalWave, s: float, p: float, n_q: int = DEFAULT_NQ, of: str = "E") -> float:
    """q-average of ``E**s`` (or ``E0**s`` with ``of="E0"``) along the level ``p``."""
    check_mean_exponent(s)
    E, E0, _ = line_fields(wave, p, n_q)
    base = E if of == "E" else E0
    return _line_mean(base**s)


def period_T(wave: ConformalWave, p: float, n_q: int = DEFAULT_NQ) -> float:
    """Time for a particle on streamline ``p`` to traverse one wavelength."""
    E, _, _ = line_fields(wave, p, n_q)
    T = wave.phi_max * _line_mean(1.0 / (2.0 * E))
    via_mean = 0.5 * wave.phi_max * _line_mean(E**-1.0)
    assert abs(T - via_mean) <= 1e-12 * T
    return T


def energy_period_fixed(wave: ConformalWave, p: float, n_q: int = DEFAULT_NQ) -> float:
    """Fixed-frame kinetic energy accumulated over one streamline period."""
    E, E0, dz = line_fields(wave, p, n_q)
    ratio_form = 0.5 * wave.phi_max * _line_mean(E0 / E)
    map_form = 0.5 * wave.phi_max * _line_mean(np.abs(1.0 + wave.c * dz) ** 2)
    scale = max(abs(ratio_form), 1e-6 * wave.phi_max)
    assert abs(ratio_form - map_form) <= 1e-10 * scale, (ratio_form, map_form)
    return ratio_form


def energy_period_moving(wave: ConformalWave, p: float, n_q: int = DEFAULT_NQ) -> float:
    """Moving-frame counterpart; equals ``phi_max / 2`` on every streamline."""
    E, _, _ = line_fields(wave, p, n_q)
    return 0.5 * wave.phi_max * _line_mean((2.0 * E) * (1.0 / (2.0 * E)))


def energy_period_s(wave: ConformalWave, s: float, p: float, n_q: int = DEFAULT_NQ, frame: str = "moving") -> float:
    """Per-period energy with exponent ``s``: ``2**(s-2) * int E**(s-1) dq`` (moving)
    or ``2**(s-2) * int E0**s / E dq`` (fixed)."""
    check_period_exponent(s, frame)
    E, E0, _ = line_fields(wave, p, n_q)
    if frame == "moving":
        mean = _line_mean(E ** (s - 1.0))
    elif s == int(s) and s >= 0:
        mean = _line_mean(E0**s / E)
    else:
        mean = _fixed_frame_mean(wave, s, p, n_q, E, E0)
    return 2.0 ** (s - 2.0) * wave.phi_max * mean


def _fixed_frame_mean(wave: ConformalWave, s: float, p: float, n_q: int, E, E0) -> float:
    """q-mean of ``E0**s / E`` when ``E0**s`` may be non-smooth.

    ``E0`` vanishes where the fixed-frame velocity does, which happens only on
    the bed where ``u`` changes sign.  There ``E0**s`` has a kink (``s > 0``)
    or a non-integrable singularity (``s < 0``), and close to the bed the
    integrand is nearly so.  The trapezoid value is kept when doubling the grid
    confirms it; otherwise adaptive quadrature splits at the bed zeros of ``u``.
    """
    with np.errstate(divide="ignore"):
        coarse = _line_mean(E0**s / E)
        E2, E02, _ = line_fields(wave, p, 2 * n_q)
        fine = _line_mean(E02**s / E2)
    if np.isfinite(coarse) and abs(fine - coarse) <= 1e-13 * abs(fine):
        return coarse
    zeros = bed_velocity_zeros(wave)
    if zeros.size and s < 0 and wave.m_abs - p <= 1e-12 * wave.m_abs:
        return float("inf")
    from .flow import energies

    def integrand(q):
        e, e0 = energies(wave, q, min(p, wave.m_abs))
        return float(e0) ** s / float(e)

    # Near the bed the peak around each zero has a width proportional to the
    # distance to the bed, so breakpoints are graded on that scale.
    gap = max(wave.m_abs - p, 1e-16 * wave.m_abs)
    offsets = gap * np.logspace(-1, 4, 11)
    points = np.concatenate([zeros, (zeros[None, :] + offsets[:, None]).ravel(), (zeros[None, :] - offsets[:, None]).ravel()])
    points = np.unique(points[(points > 0) & (points < wave.phi_max)])
    # Within ~1e-6 |m| of the bed the integrand inherits the cancellation in
    # u + c, and QUADPACK reports round-off; the value is still the best available.
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        total, _ = integrate.quad(
            integrand, 0.0, wave.phi_max, points=list(points) or None, epsabs=0.0, epsrel=1e-12, limit=2000
        )
    return total / wave.phi_max


def bed_velocity_zeros(wave: ConformalWave, n_scan: int = 512) -> np.ndarray:
    """Strip abscissae in ``[0, phi_max)`` where the fixed-frame ``u`` vanishes on the bed."""
    q = wave.phi_max * np.arange(n_scan + 1) / n_scan
    u = (1.0 / eval_map_derivative(wave.series, q, wave.m_abs)).real + wave.c

    def u_at(x):
        return float((1.0 / eval_map_derivative(wave.series, x, wave.m_abs)).real) + wave.c

    roots = []
    for i in np.flatnonzero(np.sign(u[:-1]) * np.sign(u[1:]) < 0):
        roots.append(optimize.brentq(u_at, q[i], q[i + 1], xtol=1e-14 * wave.phi_max))
    return np.array(roots)


def streamline_length(wave: ConformalWave, p: float, n_q: int = DEFAULT_NQ) -> float:
    """Arclength of streamline ``p`` over one wavelength."""
    E, _, _ = line_fields(wave, p, n_q)
    return np.sqrt(2.0) / 2.0 * wave.phi_max * _line_mean(E**-0.5)


def _gauss_in_p(func, p: float, n_p: int) -> float:
    if n_p < 16:
        raise DomainError("n_p must be at least 16")
    if p == 0.0:
        return 0.0
    nodes, weights = np.polynomial.legendre.leggauss(n_p)
    pts = 0.5 * p * (nodes + 1.0)
    return 0.5 * p * float(sum(w * func(x) for x, w in zip(pts, weights)))


def region_energy(
    wave: ConformalWave,
    p: float,
    n_q: int = DEFAULT_NQ,
    n_p: int = DEFAULT_NP,
    frame: str = "fixed",
    s: float | None = None,
) -> float:
    """Kinetic energy between the surface and streamline ``p``.

    Without ``s`` this integrates the per-period energy (fixed or moving) in
    ``p``; with ``s`` it integrates the exponent-``s`` per-period energy.
    """
    if not 0.0 <= p <= wave.m_abs * (1 + 1e-12):
        raise DomainError(f"p = {p!r} outside [0, {wave.m_abs!r}]")
    if s is None:
        line = energy_period_fixed if frame == "fixed" else energy_period_moving
        if frame not in ("fixed", "moving"):
            raise DomainError(f"unknown frame {frame!r}")
        return _gauss_in_p(lambda x: line(wave, x, n_q), p, n_p)
    check_period_exponent(s, frame)
    return _gauss_in_p(lambda x: energy_period_s(wave, s, x, n_q, frame), p, n_p)


def region_area(wave: ConformalWave, p: float, n_q: int = DEFAULT_NQ, n_p: int = DEFAULT_NP) -> float:
    """Area between the surface and streamline ``p`` over one wavelength."""
    if not 0.0 <= p <= wave.m_abs * (1 + 1e-12):
        raise DomainError(f"p = {p!r} outside [0, {wave.m_abs!r}]")
    return _gauss_in_p(lambda x: period_T(wave, x, n_q), p, n_p)


def cell_area(wave: ConformalWave, n_q: int = DEFAULT_NQ) -> float:
    """Physical area of one periodicity cell, ``int (eta + d) dx``, traced along the surface."""
    z = eval_on_line(wave.series, 0.0, n_q).imag
    xq = eval_on_line(wave.series, 0.0, n_q, derivative=True).real
    return wave.phi_max * float(np.mean((z + wave.params.depth) * xq))


def total_cell_energy(wave: ConformalWave, n_q: int = DEFAULT_NQ, n_p: int = DEFAULT_NP, n_x: int = 64):
    """Kinetic energy of one periodicity cell, moving and fixed frames.

    Both are also computed by direct quadrature in physical space and
    returned in ``details``.
    """
    if n_q < 64 or n_p < 16:
        raise DomainError("grids must be at least 64 x 16")

    def moving_line(p):
        E, _, dz = line_fields(wave, p, n_q)
        return wave.phi_max * _line_mean(E * np.abs(dz) ** 2)

    moving = _gauss_in_p(moving_line, wave.m_abs, n_p)
    fixed = _gauss_in_p(lambda p: energy_period_fixed(wave, p, n_q), wave.m_abs, n_p)
    details = {
        "moving_physical": physical_cell_energy(wave, n_x=n_x, n_z=n_p),
        "fixed_physical": physical_cell_energy(wave, n_x=n_x, n_z=n_p, frame="fixed"),
    }
    return moving, fixed, details


def physical_cell_energy(wave: ConformalWave, n_x: int = 64, n_z: int = 32, frame: str = "moving") -> float:
    """``iint E dx dz`` (or ``E0`` with ``frame="fixed"``) over one cell by
    column quadrature in physical space.

    Trapezoid in ``x``, Gauss-Legendre on ``[-d, eta(x)]`` in each column;
    velocities come from inverting the map at every node.
    """
    from .flow import invert_many, surface_heights, velocity

    L = wave.wavelength
    d = wave.params.depth
    xs = L * (np.arange(n_x) / n_x - 0.5)
    tops = surface_heights(wave, xs)
    nodes, weights = np.polynomial.legendre.leggauss(n_z)
    half = 0.5 * (tops + d)
    X = np.broadcast_to(xs[:, None], (n_x, n_z))
    Zs = -d + half[:, None] * (nodes[None, :] + 1.0)
    q, p = invert_many(wave, X.ravel(), Zs.ravel())
    u_rel, w = velocity(wave, q, p)
    if frame == "fixed":
        u_rel = u_rel + wave.c
    E = (0.5 * (u_rel**2 + w**2)).reshape(n_x, n_z)
    return float(np.sum(half * (E @ weights))) * L / n_x


@dataclass
class ExtremaResult:
    status: str
    q_min: float = float("nan")
    q_max: float = float("nan")
    crest_ok: bool = False
    trough_ok: bool = False
    interior_max_on_surface: bool = False
    E_crest: float = float("nan")
    E_trough: float = float("nan")
    bernoulli_gap: float = float("nan")
    bernoulli_spread: float = float("nan")
    note: str = ""


def surface_energy_extrema(wave: ConformalWave, n_q: int = 1024, n_interior: tuple = (256, 33)) -> ExtremaResult:
    """Locate the extrema of ``E`` on the surface and compare with the crest/trough.

    Also checks that the maximum over a dense interior grid is attained on the
    surface, and reports ``E(trough) - E(crest) - g_eff H`` and the spread of
    ``E + g_eff eta`` along the surface.
    """
    if wave.is_flat:
        return ExtremaResult(status="skipped", note="flat wave: E is constant")
    E, _, _ = line_fields(wave, 0.0, n_q)
    z = eval_on_line(wave.series, 0.0, n_q).imag
    cell = wave.phi_max / n_q
    i_min = int(np.argmin(E))
    i_max = int(np.argmax(E))
    q = cell * np.arange(n_q)
    half = n_q // 2

    def circ_dist(i, j):
        k = abs(i - j) % n_q
        return min(k, n_q - k)

    nq_i, np_i = n_interior
    interior_max = -np.inf
    for p in np.linspace(0.0, wave.m_abs, np_i)[1:]:
        Ei, _, _ = line_fields(wave, p, nq_i)
        interior_max = max(interior_max, float(Ei.max()))
    E_crest, E_trough = float(E[0]), float(E[half])
    bern = E + wave.g_eff * z
    return ExtremaResult(
        status="ok",
        q_min=float(q[i_min]),
        q_max=float(q[i_max]),
        crest_ok=circ_dist(i_min, 0) <= 1,
        trough_ok=circ_dist(i_max, half) <= 1,
        interior_max_on_surface=interior_max <= float(E.max()) * (1 + 1e-12),
        E_crest=E_crest,
        E_trough=E_trough,
        bernoulli_gap=(E_trough - E_crest) - wave.g_eff * wave.params.height,
        bernoulli_spread=float(np.max(np.abs(bern - wave.bernoulli_B))),
    )


_LINE = {
    Functional.T: lambda w, p, s, nq, npl: period_T(w, p, nq),
    Functional.Ms: lambda w, p, s, nq, npl: integral_mean_Ms(w, s, p, nq),
    Functional.EnergyFixed: lambda w, p, s, nq, npl: energy_period_fixed(w, p, nq),
    Functional.EnergyMoving: lambda w, p, s, nq, npl: energy_period_moving(w, p, nq),
    Functional.EnergyFixedS: lambda w, p, s, nq, npl: energy_period_s(w, s, p, nq, "fixed"),
    Functional.EnergyMovingS: lambda w, p, s, nq, npl: energy_period_s(w, s, p, nq, "moving"),
    Functional.RegionEnergyFixed: lambda w, p, s, nq, npl: region_energy(w, p, nq, npl, "fixed"),
    Functional.RegionEnergyMoving: lambda w, p, s, nq, npl: region_energy(w, p, nq, npl, "moving"),
    Functional.RegionEnergyFixedS: lambda w, p, s, nq, npl: region_energy(w, p, nq, npl, "fixed", s),
    Functional.RegionEnergyMovingS: lambda w, p, s, nq, npl: region_energy(w, p, nq, npl, "moving", s),
    Functional.Area: lambda w, p, s, nq, npl: region_area(w, p, nq, npl),
    Functional.Length: lambda w, p, s, nq, npl: streamline_length(w, p, nq),
}

NEEDS_S = {
    Functional.Ms,
    Functional.EnergyFixedS,
    Functional.EnergyMovingS,
    Functional.RegionEnergyFixedS,
    Functional.RegionEnergyMovingS,
}


def uniform_p_grid(wave: ConformalWave, n_points: int = 65) -> np.ndarray:
    if n_points < 2:
        raise DomainError("a p-grid needs at least two points")
    return np.linspace(0.0, wave.m_abs, n_points)


def diagnostic_curve(
    wave: ConformalWave,
    functional,
    s: float | None = None,
    p_grid=None,
    n_points: int = 65,
    n_q: int = DEFAULT_NQ,
    n_p: int = DEFAULT_NP,
) -> DiagnosticCurve:
    """Sample one functional on a p-grid (uniform with ``n_points`` by default)."""
    functional = Functional(functional)
    if functional in NEEDS_S and s is None:
        raise DomainError(f"{functional.value} needs an exponent s")
    grid = uniform_p_grid(wave, n_points) if p_grid is None else np.asarray(p_grid, dtype=float)
    if np.any(np.diff(grid) <= 0):
        raise DomainError("p-grid must be strictly ascending")
    line = _LINE[functional]
    values = np.array([line(wave, float(p), s, n_q, n_p) for p in grid])
    return DiagnosticCurve(functional, grid, values, n_q, s if functional in NEEDS_S else None)
