"""Point evaluation of the flow: positions, velocities, energies, flow constants."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import optimize

from .errors import DomainError, InversionError
from .solver import ConformalWave
from .spectral import eval_map, eval_map_and_derivative, eval_map_derivative, eval_on_line


@dataclass(frozen=True)
class FlowSample:
    q: float
    p: float
    x: float
    z: float
    u_rel: float
    w: float
    E: float
    E0: float


@dataclass(frozen=True)
class FlowConstants:
    """``delta`` and ``delta0`` are the same number: the minimum of ``u - c``
    over one periodicity cell equals the minimum over the whole fluid, and
    over the closed rectangle through the map."""

    phi_max: float
    m_abs: float
    delta: float
    delta0: float
    bernoulli_B: float
    delta_tolerance: float = 0.0


def velocity(wave: ConformalWave, q, p):
    """Moving-frame ``(u - c, w)`` at strip points; arrays broadcast."""
    fprime = 1.0 / eval_map_derivative(wave.series, q, p)
    return fprime.real, -fprime.imag


def energies(wave: ConformalWave, q, p):
    """Moving-frame ``E`` and fixed-frame ``E0`` at strip points."""
    u_rel, w = velocity(wave, q, p)
    E = 0.5 * (u_rel**2 + w**2)
    E0 = 0.5 * ((u_rel + wave.c) ** 2 + w**2)
    return E, E0


def sample_at_qp(wave: ConformalWave, q: float, p: float) -> FlowSample:
    Z = complex(eval_map(wave.series, q, p))
    u_rel, w = velocity(wave, q, p)
    u_rel, w = float(u_rel), float(w)
    return FlowSample(
        q=float(q),
        p=float(p),
        x=Z.real,
        z=Z.imag,
        u_rel=u_rel,
        w=w,
        E=0.5 * (u_rel**2 + w**2),
        E0=0.5 * ((u_rel + wave.c) ** 2 + w**2),
    )


def surface_height_at(wave: ConformalWave, x: float) -> float:
    """``eta(x)`` by inverting ``x(q, 0)`` (monotone in ``q``)."""
    L = wave.wavelength
    shift = np.floor((x + 0.5 * L) / L) * L
    xr = x - shift
    series = wave.series

    def gap(q):
        return float(eval_map(series, q, 0.0).real) - xr

    lo, hi = -0.5 * wave.phi_max, 0.5 * wave.phi_max
    q = optimize.brentq(gap, lo - 1e-9 * wave.phi_max, hi + 1e-9 * wave.phi_max, xtol=1e-15 * wave.phi_max)
    return float(eval_map(series, q, 0.0).imag)


def surface_heights(wave: ConformalWave, xs, tol: float = 1e-13, max_iters: int = 50):
    """Vectorised ``eta(x)``: Newton on ``x(q, 0) = x`` seeded by the affine map."""
    series = wave.series
    xs = np.asarray(xs, dtype=float)
    q = xs / series.linear_slope
    atol = tol * wave.wavelength
    for _ in range(max_iters):
        Z, dz = eval_map_and_derivative(series, q, 0.0)
        gap = Z.real - xs
        if np.all(np.abs(gap) <= atol):
            return Z.imag
        q = q - gap / dz.real
    raise InversionError("surface height lookup did not converge")


def invert_map(wave: ConformalWave, x: float, z: float, tol: float = 1e-12, max_iters: int = 50):
    """Strip coordinates ``(q, p)`` of the physical point ``(x, z)``.

    Complex Newton on ``Z(zeta) = x + i z``, seeded from the flat affine map;
    falls back to the nearest sample of a coarse grid if Newton stalls.
    """
    series = wave.series
    L = wave.wavelength
    d = wave.params.depth
    scale = max(L, d)
    if z < -d - 1e-12 * scale or z > surface_height_at(wave, x) + 1e-12 * scale:
        raise DomainError(f"point ({x!r}, {z!r}) lies outside the fluid")
    target = complex(x, z)
    seed = (target - 1j * series.mean_level) / series.linear_slope
    zeta = _newton_invert(series, target, seed, tol * scale, max_iters)
    if zeta is None:
        zeta = _newton_invert(series, target, _coarse_seed(wave, target), tol * scale, max_iters)
    if zeta is None:
        raise InversionError(f"map inversion failed at ({x!r}, {z!r})")
    q, p = zeta.real, -zeta.imag
    slack = 1e-9 * wave.m_abs
    if p < -slack or p > wave.m_abs + slack:
        raise DomainError(f"point ({x!r}, {z!r}) maps outside the strip (p = {p!r})")
    return float(q), float(np.clip(p, 0.0, wave.m_abs))


def _newton_invert(series, target, zeta, atol, max_iters):
    h = series.depth_p
    for _ in range(max_iters):
        p = min(max(-zeta.imag, 0.0), h)
        zeta = complex(zeta.real, -p)
        diff = complex(eval_map(series, zeta.real, p)) - target
        if abs(diff) <= atol:
            return zeta
        zeta = zeta - diff / complex(eval_map_derivative(series, zeta.real, p))
    return None


def invert_many(wave: ConformalWave, x, z, tol: float = 1e-12, max_iters: int = 50):
    """Vectorised :func:`invert_map` without the domain pre-check; returns ``(q, p)`` arrays."""
    series = wave.series
    target = np.asarray(x, dtype=float) + 1j * np.asarray(z, dtype=float)
    zeta = (target - 1j * series.mean_level) / series.linear_slope
    atol = tol * max(wave.wavelength, wave.params.depth)
    for _ in range(max_iters):
        p = np.clip(-zeta.imag, 0.0, series.depth_p)
        zeta = zeta.real - 1j * p
        Z, dz = eval_map_and_derivative(series, zeta.real, p)
        diff = Z - target
        if np.all(np.abs(diff) <= atol):
            return zeta.real, p
        zeta = zeta - diff / dz
    raise InversionError("vectorised map inversion did not converge")


def _coarse_seed(wave, target):
    q = np.linspace(-wave.phi_max / 2, wave.phi_max / 2, 65)
    p = np.linspace(0.0, wave.m_abs, 17)
    Q, P = np.meshgrid(q, p)
    Z = eval_map(wave.series, Q, P)
    L = wave.wavelength
    dx = np.mod(Z.real - target.real + L / 2, L) - L / 2
    i = np.argmin(np.abs(dx + 1j * (Z.imag - target.imag)))
    shift = np.round((target.real - Z.real.flat[i]) / L) * wave.phi_max
    return complex(Q.flat[i] + shift, -P.flat[i])


def flow_constants(wave: ConformalWave, scan_grid=(128, 32)) -> FlowConstants:
    """Flow constants with ``delta = min (u - c)`` from a grid scan plus local polish."""
    nq, npl = scan_grid
    if nq < 64 or npl < 16:
        raise DomainError("scan grid must be at least 64 x 16")
    q = wave.phi_max * np.arange(nq) / nq
    p = np.linspace(0.0, wave.m_abs, npl)
    Q, P = np.meshgrid(q, p)
    u_rel, _ = velocity(wave, Q, P)
    j, i = np.unravel_index(np.argmin(u_rel), u_rel.shape)
    delta = float(u_rel[j, i])
    if not wave.is_flat:
        dq = wave.phi_max / nq
        dp = wave.m_abs / (npl - 1)

        def speed(v):
            return float(velocity(wave, v[0], v[1])[0])

        res = optimize.minimize(
            speed,
            x0=[q[i], p[j]],
            method="L-BFGS-B",
            bounds=[(q[i] - dq, q[i] + dq), (max(0.0, p[j] - dp), min(wave.m_abs, p[j] + dp))],
            options={"ftol": 1e-15, "gtol": 1e-13},
        )
        delta = min(delta, float(res.fun))
    return FlowConstants(
        phi_max=wave.phi_max,
        m_abs=wave.m_abs,
        delta=delta,
        delta0=delta,
        bernoulli_B=wave.bernoulli_B,
        delta_tolerance=1e-8 * delta,
    )


def boundary_min_speed(wave: ConformalWave, n_q: int = 1024) -> float:
    """Minimum of ``u - c`` over the surface and bed lines only."""
    lows = []
    for p in (0.0, wave.m_abs):
        fprime = 1.0 / eval_on_line(wave.series, p, n_q, derivative=True)
        lows.append(fprime.real.min())
    return float(min(lows))


def surface_profile(wave: ConformalWave, n: int = 256):
    """``n`` samples ``(x, eta(x))`` over one period, crest at ``x = 0``.

    Samples sit at the images of a uniform ``q``-grid starting at the crest,
    shifted to ``x`` in ``[-L/2, L/2)``.
    """
    if n < 16:
        raise DomainError("surface_profile needs n >= 16")
    q = wave.phi_max * (np.arange(n) / n - 0.5)
    Z = eval_map(wave.series, q, 0.0)
    return np.column_stack([Z.real, Z.imag])
