"""Newton solver for steady equatorial waves in conformal variables.

For irrotational flow the f-plane momentum equations integrate to

    E + P - 2 omega psi + (g - 2 omega c) z = const,

so on the free surface (``psi = 0``, ``P = P_atm``) the dynamic condition is the
classical one with an effective gravity ``g_eff = g - 2 omega c``.  The solver
works in dimensionless units (lengths scaled by ``L / 2 pi``, speeds by
``sqrt(g_eff L / 2 pi)``) where ``g_eff`` drops out entirely, then closes the
coupling ``g_eff <-> c`` exactly when converting back.

Dimensionless unknowns: real mode amplitudes ``a_n`` (crest at ``q = 0``), the
mean level ``mu``, the squared speed ``c2`` and the Bernoulli constant ``b``.
Equations: surface Bernoulli at ``N + 1`` collocation points on the half
period, zero mean surface elevation, and the crest-to-trough height.
"""

from __future__ import annotations

import hashlib
import json
import logging
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from .errors import DomainError, NearStagnationError, SolverError
from .spectral import StripSeries, eval_map, eval_map_derivative, eval_on_line

log = logging.getLogger(__name__)

EARTH_OMEGA = 7.3e-5
STEEPNESS_CAP_FRACTION = 0.85


def limiting_steepness(depth_ratio: float) -> float:
    """Limiting ``H/L`` for relative depth ``d/L`` (Miche's fit to the tables)."""
    return 0.142 * np.tanh(2.0 * np.pi * depth_ratio)


def linear_phase_speed(wavelength, depth, g_eff):
    """Linear dispersion ``sqrt((g_eff / k) tanh(k d))``."""
    k = 2.0 * np.pi / wavelength
    return np.sqrt(g_eff / k * np.tanh(k * depth))


def close_effective_gravity(c_hat2: float, wavelength: float, g: float, omega: float):
    """Solve ``|c|^2 = c_hat2 (g + 2 omega |c|) / k`` for ``|c|``; returns ``(|c|, g_eff)``."""
    a = c_hat2 * wavelength / (2.0 * np.pi)
    speed = omega * a + np.sqrt((omega * a) ** 2 + a * g)
    return float(speed), float(g + 2.0 * omega * speed)


@dataclass(frozen=True)
class PhysicalParams:
    wavelength: float
    depth: float
    height: float
    g: float = 9.8
    omega: float = EARTH_OMEGA
    modes: int = 256
    newton_tol: float = 1e-12
    max_newton_iters: int = 50
    continuation_steps: int = 8

    def __post_init__(self):
        if not (self.wavelength > 0 and self.depth > 0):
            raise DomainError("wavelength and depth must be positive")
        if self.height < 0:
            raise DomainError("wave height must be non-negative")
        if not self.g > 0 or self.omega < 0:
            raise DomainError("need g > 0 and omega >= 0")
        if self.modes < 8:
            raise DomainError("at least 8 modes are required")
        if self.continuation_steps < 1 or self.max_newton_iters < 1:
            raise DomainError("iteration counts must be positive")
        cap = STEEPNESS_CAP_FRACTION * limiting_steepness(self.depth / self.wavelength)
        if self.height / self.wavelength > cap:
            raise DomainError(
                f"H/L = {self.height / self.wavelength:.4f} exceeds the steepness cap {cap:.4f}"
            )

    @property
    def kd(self) -> float:
        return 2.0 * np.pi * self.depth / self.wavelength

    @property
    def kh(self) -> float:
        return 2.0 * np.pi * self.height / self.wavelength

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class ConformalWave:
    series: StripSeries
    c: float
    phi_max: float
    m_abs: float
    bernoulli_B: float
    g_eff: float
    residual_norm: float
    params: PhysicalParams
    newton_iters: int = field(default=0, compare=False)

    @property
    def wavelength(self) -> float:
        return self.params.wavelength

    @property
    def is_flat(self) -> bool:
        return not np.any(self.series.coeffs)

    def dimensionless_state(self) -> np.ndarray:
        """Solver unknowns ``[a_1..a_N, mu, c2, b]`` recovered from the wave."""
        scale = self.wavelength / (2.0 * np.pi)
        unit = self.g_eff * scale
        return np.concatenate(
            [
                self.series.coeffs.real / scale,
                [self.series.mean_level / scale, self.c**2 / unit, self.bernoulli_B / unit],
            ]
        )

    def fingerprint(self) -> str:
        payload = {
            "coeffs": [float(v).hex() for v in self.series.coeffs.real],
            "coeffs_im": [float(v).hex() for v in self.series.coeffs.imag],
            "scalars": [
                float(v).hex()
                for v in (
                    self.series.mean_level,
                    self.c,
                    self.phi_max,
                    self.m_abs,
                    self.bernoulli_B,
                    self.g_eff,
                )
            ],
            "params": self.params.to_dict(),
        }
        blob = json.dumps(payload, sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]


class _Problem:
    """Dimensionless collocation system for fixed relative depth ``kd``."""

    def __init__(self, n_modes: int, kd: float):
        self.N = n_modes
        self.kd = kd
        self.n = np.arange(1, n_modes + 1, dtype=float)
        theta = np.pi * np.arange(n_modes + 1) / n_modes
        self.C = np.cos(np.outer(theta, self.n))
        self.S = np.sin(np.outer(theta, self.n))
        self.odd = 1.0 - (-1.0) ** self.n

    def unpack(self, u):
        N = self.N
        return u[:N], u[N], u[N + 1], u[N + 2]

    def residual(self, u, kh):
        a, mu, c2, b = self.unpack(u)
        n = self.n
        e = np.exp(-2.0 * n * (mu + self.kd))
        eta = mu + self.C @ (a * (1 - e))
        gr = 1 + self.C @ (n * a * (1 + e))
        gi = self.S @ (n * a * (e - 1))
        bern = c2 / (2 * (gr * gr + gi * gi)) + eta - b
        mean = mu + 0.5 * np.sum(n * a * a * (1 - e * e))
        height = np.sum(a * (1 - e) * self.odd) - kh
        return np.concatenate([bern, [mean, height]])

    def jacobian(self, u):
        a, mu, c2, b = self.unpack(u)
        n = self.n
        N = self.N
        e = np.exp(-2.0 * n * (mu + self.kd))
        de = -2.0 * n * e
        gr = 1 + self.C @ (n * a * (1 + e))
        gi = self.S @ (n * a * (e - 1))
        q = gr * gr + gi * gi
        w = -c2 / (q * q)
        J = np.zeros((N + 3, N + 3))
        dgr_da = self.C * (n * (1 + e))
        dgi_da = self.S * (n * (e - 1))
        J[: N + 1, :N] = w[:, None] * (gr[:, None] * dgr_da + gi[:, None] * dgi_da) + self.C * (1 - e)
        dgr_dmu = self.C @ (n * a * de)
        dgi_dmu = self.S @ (n * a * de)
        deta_dmu = 1 - self.C @ (a * de)
        J[: N + 1, N] = w * (gr * dgr_dmu + gi * dgi_dmu) + deta_dmu
        J[: N + 1, N + 1] = 1.0 / (2 * q)
        J[: N + 1, N + 2] = -1.0
        J[N + 1, :N] = n * a * (1 - e * e)
        J[N + 1, N] = 1 - np.sum(n * a * a * e * de)
        J[N + 2, :N] = (1 - e) * self.odd
        J[N + 2, N] = -np.sum(a * de * self.odd)
        return J

    def flat_state(self):
        u = np.zeros(self.N + 3)
        t = np.tanh(self.kd)
        u[self.N + 1] = t
        u[self.N + 2] = t / 2
        return u

    def newton(self, u, kh, tol, max_iters):
        """Newton on the collocation system.  Returns ``(u, resid, iters)``.

        Iterates until the residual stops improving (round-off floor), then
        accepts if it is below ``tol``.
        """
        r = self.residual(u, kh)
        res = np.max(np.abs(r))
        for it in range(1, max_iters + 1):
            if not np.isfinite(res):
                break
            u_new = u - np.linalg.solve(self.jacobian(u), r)
            r_new = self.residual(u_new, kh)
            res_new = np.max(np.abs(r_new))
            if res_new >= 0.5 * res and res <= tol:
                return u, res, it
            u, r, res = u_new, r_new, res_new
        if res <= tol:
            return u, res, max_iters
        raise SolverError(f"Newton did not converge (residual {res:.3e})", residual=res)


def _resize_state(u, n_from, n_to):
    out = np.zeros(n_to + 3)
    m = min(n_from, n_to)
    out[:m] = u[:m]
    out[n_to:] = u[n_from:]
    return out


def _continue(problem, u, kh_from, kh_to, steps, tol, max_iters):
    """March the height from ``kh_from`` to ``kh_to``; halve the step on failure."""
    if kh_to == kh_from:
        return problem.newton(u, kh_to, tol, max_iters)
    span = kh_to - kh_from
    floor = abs(span) / 1024.0
    step = span / steps
    kh = kh_from
    iters = 0
    res = np.inf
    while abs(kh_to - kh) > 0:
        trial = kh + step
        if (step > 0 and trial > kh_to) or (step < 0 and trial < kh_to):
            trial = kh_to
        start = u
        if not np.any(u[: problem.N]):
            # Flat state is a bifurcation point; seed with the linear mode.
            start = u.copy()
            start[0] = trial / (2.0 * (1.0 - np.exp(-2.0 * (u[problem.N] + problem.kd))))
        try:
            u_new, res, it = problem.newton(start, trial, tol, max_iters)
        except (SolverError, np.linalg.LinAlgError) as exc:
            step /= 2.0
            if abs(step) < floor:
                raise SolverError(
                    f"continuation stalled at kH = {kh:.6g}: {exc}",
                    residual=getattr(exc, "residual", float("nan")),
                ) from exc
            continue
        u, kh = u_new, trial
        iters += it
    return u, res, iters


def _wave_from_state(u, params: PhysicalParams, n_modes: int) -> ConformalWave:
    a, mu, c2, b = u[:n_modes], u[n_modes], u[n_modes + 1], u[n_modes + 2]
    L = params.wavelength
    scale = L / (2.0 * np.pi)
    speed, g_eff = close_effective_gravity(float(c2), L, params.g, params.omega)
    mu, b = float(mu), float(b)
    phi_max = speed * L
    tau = mu + params.kd
    m_abs = tau * phi_max / (2.0 * np.pi)
    series = StripSeries(
        linear_slope=L / phi_max,
        mean_level=mu * scale,
        coeffs=a * scale,
        period_q=phi_max,
        depth_p=m_abs,
    )
    return ConformalWave(
        series=series,
        c=-speed,
        phi_max=phi_max,
        m_abs=m_abs,
        bernoulli_B=b * g_eff * scale,
        g_eff=g_eff,
        residual_norm=float("nan"),
        params=params,
    )


def residual(wave: ConformalWave, n_grid: int | None = None) -> float:
    """Max surface Bernoulli defect ``|E + g_eff z - B|`` in m^2/s^2 over a uniform grid."""
    n_grid = n_grid or max(4 * wave.series.n_modes, 64)
    z = eval_on_line(wave.series, 0.0, n_grid)
    try:
        dz = eval_on_line(wave.series, 0.0, n_grid, derivative=True)
    except NearStagnationError:
        return float("inf")
    energy = 0.5 / np.abs(dz) ** 2
    return float(np.max(np.abs(energy + wave.g_eff * z.imag - wave.bernoulli_B)))


def solve_wave(params: PhysicalParams, seed: ConformalWave | None = None) -> ConformalWave:
    """Converged wave for ``params``, optionally continued from ``seed``."""
    N = params.modes
    problem = _Problem(N, params.kd)
    scale_e = params.g * params.wavelength / (2.0 * np.pi)
    # Loose collocation acceptance; the dimensional grid residual is the contract.
    tol = max(params.newton_tol / scale_e, 1e-11)
    if seed is not None and seed.params.kd == params.kd:
        u0 = _resize_state(seed.dimensionless_state(), seed.series.n_modes, N)
        kh0 = seed.params.kh
        steps = params.continuation_steps
    else:
        u0 = problem.flat_state()
        kh0 = 0.0
        steps = params.continuation_steps
    if params.height == 0:
        u, iters = problem.flat_state(), 0
    else:
        try:
            u, _, iters = _continue(
                problem, u0, kh0, params.kh, steps, tol, params.max_newton_iters
            )
        except SolverError as exc:
            exc.height = params.height
            raise
    wave = _wave_from_state(u, params, N)
    res = residual(wave)
    if not res <= params.newton_tol:
        raise SolverError(
            f"surface residual {res:.3e} exceeds tolerance {params.newton_tol:.1e}; "
            "increase the number of modes",
            residual=res,
            height=params.height,
        )
    min_speed = float(np.min(1.0 / np.abs(eval_on_line(wave.series, 0.0, 4 * N, derivative=True))))
    if min_speed < 1e-6 * abs(wave.c):
        raise SolverError("stagnation detected on the surface", residual=res)
    wave = replace(wave, residual_norm=res, newton_iters=iters)
    log.debug("solved H=%g: c=%.12g residual=%.2e", params.height, wave.c, res)
    return wave


def continuation_path(params: PhysicalParams, height_targets) -> list[ConformalWave]:
    """Solve a sequence of ascending heights, seeding each from the previous one."""
    waves = []
    prev = None
    for h in height_targets:
        if prev is not None and h < prev.params.height:
            raise DomainError("height targets must be ascending")
        target = replace(params, height=float(h))
        try:
            wave = solve_wave(target, seed=prev)
        except SolverError as exc:
            raise SolverError(
                f"failed at H = {h!r}: {exc}", residual=exc.residual, height=h
            ) from exc
        waves.append(wave)
        prev = wave
    return waves


def stokes_phase_speed(params: PhysicalParams, order: int = 3) -> tuple[float, float]:
    """Stokes-expansion phase speed (first definition); returns ``(|c|, g_eff)``."""
    if order not in (1, 2, 3):
        raise DomainError("Stokes expansion supports orders 1 to 3")
    kd = params.kd
    eps = params.kh / 2.0
    t = np.tanh(kd)
    s = 1.0 / np.cosh(2.0 * kd)
    c_hat = np.sqrt(t)
    if order == 3:
        c_hat += eps**2 * np.sqrt(t) * (2.0 + 7.0 * s * s) / (4.0 * (1.0 - s) ** 2)
    return close_effective_gravity(c_hat**2, params.wavelength, params.g, params.omega)


def stokes_expansion(params: PhysicalParams, order: int = 3) -> ConformalWave:
    """Approximate wave from the finite-depth Stokes expansion.

    The phase speed carries the expansion to the requested order; the map is
    the height-matched linear conformal mode.  The Bernoulli constant is the
    surface mean of ``E + g_eff z``, and the residual is measured honestly.
    """
    speed, g_eff = stokes_phase_speed(params, order)
    N = params.modes
    kd, kh = params.kd, params.kh
    mu = 0.0
    a1 = 0.0
    for _ in range(60):
        e1 = np.exp(-2.0 * (mu + kd))
        a1 = kh / (2.0 * (1.0 - e1))
        mu = -0.5 * a1 * a1 * (1.0 - e1 * e1)
    u = np.zeros(N + 3)
    u[0] = a1
    u[N] = mu
    unit = g_eff * params.wavelength / (2.0 * np.pi)
    u[N + 1] = speed**2 / unit
    wave = _wave_from_state(u, params, N)
    n_grid = max(4 * N, 64)
    z = eval_on_line(wave.series, 0.0, n_grid)
    dz = eval_on_line(wave.series, 0.0, n_grid, derivative=True)
    bern = 0.5 / np.abs(dz) ** 2 + wave.g_eff * z.imag
    wave = replace(wave, bernoulli_B=float(np.mean(bern)), g_eff=g_eff, c=-speed)
    return replace(wave, residual_norm=residual(wave))


def surface_elevation(wave: ConformalWave, q):
    """Surface elevation ``z(q, 0)`` as a function of the potential."""
    return eval_map(wave.series, q, 0.0).imag


def crest_trough(wave: ConformalWave):
    """``(eta_crest, eta_trough)`` from the map at ``q = 0`` and ``q = phi_max / 2``."""
    z = eval_map(wave.series, np.array([0.0, wave.phi_max / 2.0]), 0.0).imag
    return float(z[0]), float(z[1])


def surface_energy(wave: ConformalWave, q):
    dz = eval_map_derivative(wave.series, q, 0.0)
    return 0.5 / np.abs(dz) ** 2
