"""Claim checks, the claim registry, verification runs and persistence.

Every claim evaluates to a :class:`PropertyReport` whose ``worst_margin`` is
dimensionless (already divided by the relevant scale), so ``status == "pass"``
exactly when ``worst_margin >= -tolerance``.  Claims listed in
``SUSPECT_CLAIMS`` report ``"finding"`` instead of ``"fail"``: their stated
form is doubtful and the numbers, not the statement, are the arbiter.
"""

from __future__ import annotations

import csv
import json
import os
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from . import __version__
from . import diagnostics as dg
from .errors import DomainError, HodowaveError
from .flow import FlowConstants, flow_constants, invert_map, sample_at_qp
from .lagrangian import integrate_particle, pattern_shift_gap, trace_streamline
from .solver import ConformalWave, PhysicalParams, residual
from .spectral import StripSeries, eval_map_derivative

WORKERS_ENV = "HODOWAVE_WORKERS"

# Tolerance classes (relative).
TOL_IDENTITY = 1e-10
TOL_QUADRATURE = 1e-8
TOL_ORACLE = 1e-6
TOL_DERIVATIVE = 1e-5
TOL_SIGN = 1e-9
STRICT_MARGIN = 1e-12

MEAN_EXPONENTS = (-2.0, -1.0, -0.5, 0.5, 1.0, 2.0)
MOVING_EXPONENTS = (-1.0, 0.5, 2.0)
FIXED_EXPONENTS = (-1.0, 0.5, 2.0)
REGION_FIXED_EXPONENTS = (0.5, 2.0)
REGION_MOVING_EXPONENTS = (-1.0, 2.0)


# --------------------------------------------------------------------------
# curve checks


@dataclass(frozen=True)
class CheckResult:
    status: str
    worst_margin: float


def _scale(values, scale):
    values = np.asarray(values, dtype=float)
    peak = float(np.max(np.abs(values))) if values.size else 0.0
    return max(peak, scale or 0.0) or 1.0


def check_monotone(values, direction: str = "nonincreasing", tol: float = TOL_SIGN, scale: float | None = None) -> CheckResult:
    """First-difference sign test; ``direction`` is ``nonincreasing``,
    ``nondecreasing`` or ``increasing`` (strict, margin ``1e-12 * scale``)."""
    v = np.asarray(values, dtype=float)
    if v.size < 3:
        raise DomainError("a monotonicity check needs at least 3 points")
    sc = _scale(v, scale)
    diffs = np.diff(v)
    if direction == "nonincreasing":
        margin = float(np.min(-diffs)) / sc
    elif direction == "nondecreasing":
        margin = float(np.min(diffs)) / sc
    elif direction == "increasing":
        margin = float(np.min(diffs)) / sc - STRICT_MARGIN
        return CheckResult("pass" if margin >= 0 else "fail", margin)
    else:
        raise DomainError(f"unknown direction {direction!r}")
    return CheckResult("pass" if margin >= -tol else "fail", margin)


def check_convex(values, tol: float = TOL_SIGN, concave: bool = False, scale: float | None = None) -> CheckResult:
    """Second-difference sign test on a uniform grid (negated for concavity)."""
    v = np.asarray(values, dtype=float)
    if v.size < 5:
        raise DomainError("a convexity check needs at least 5 points")
    if concave:
        v = -v
    sc = _scale(v, scale)
    margin = float(np.min(v[:-2] - 2.0 * v[1:-1] + v[2:])) / sc
    return CheckResult("pass" if margin >= -tol else "fail", margin)


def check_log_convex(values, tol: float = TOL_SIGN) -> CheckResult:
    v = np.asarray(values, dtype=float)
    if np.any(~(v > 0)):
        raise DomainError("log-convexity needs strictly positive values")
    return check_convex(np.log(v), tol)


# --------------------------------------------------------------------------
# reports


@dataclass
class PropertyReport:
    claim_id: str
    statement: str
    status: str
    worst_margin: float
    tolerance: float
    wave_fingerprint: str
    note: str = ""

    def row(self):
        return [
            self.claim_id,
            self.status,
            repr(float(self.worst_margin)),
            repr(float(self.tolerance)),
            self.wave_fingerprint,
            self.statement,
            self.note,
        ]


REPORT_HEADER = ["claim_id", "status", "worst_margin", "tolerance", "wave_fingerprint", "statement", "note"]


@dataclass(frozen=True)
class VerifyConfig:
    n_points: int = 65
    n_q: int = dg.DEFAULT_NQ
    n_p: int = dg.DEFAULT_NP
    ode_tol: float = 1e-11
    seed: int = 0
    spot_checks: int = 16
    workers: int | None = None
    include_lagrangian: bool = True


class _Outcome(Exception):
    """Raised inside a claim to short-circuit with a fixed status."""

    def __init__(self, status, note=""):
        super().__init__(note)
        self.status = status
        self.note = note


class Context:
    """Per-run cache of curves and scalars shared by concurrently running claims."""

    def __init__(self, wave: ConformalWave, config: VerifyConfig):
        self.wave = wave
        self.config = config
        self.grid = dg.uniform_p_grid(wave, config.n_points)
        self._cache: dict = {}
        self._locks: dict = {}
        self._guard = threading.Lock()

    def memo(self, key, build):
        with self._guard:
            lock = self._locks.setdefault(key, threading.Lock())
        with lock:
            if key not in self._cache:
                self._cache[key] = build()
            return self._cache[key]

    def curve(self, functional, s=None):
        cfg = self.config
        return self.memo(
            ("curve", functional, s),
            lambda: dg.diagnostic_curve(
                self.wave, functional, s=s, p_grid=self.grid, n_q=cfg.n_q, n_p=cfg.n_p
            ).values,
        )

    def constants(self) -> FlowConstants:
        return self.memo("constants", lambda: flow_constants(self.wave))

    def extrema(self):
        return self.memo("extrema", lambda: dg.surface_energy_extrema(self.wave))

    def particle_periods(self):
        w = self.wave

        def build():
            levels = [0.0, 0.25 * w.m_abs, 0.5 * w.m_abs, 0.75 * w.m_abs, w.m_abs]
            starts = [k * w.phi_max / 4 for k in range(4)]
            return {
                p: [integrate_particle(w, q0, p, self.config.ode_tol, n_out=2) for q0 in starts]
                for p in levels
            }

        return self.memo("particles", build)


@dataclass(frozen=True)
class Claim:
    claim_id: str
    statement: str
    evaluate: object  # Context -> (margin, tolerance[, note])
    suspect: bool = False


def _fixed_frame_vanishes(ctx: Context):
    if ctx.wave.is_flat:
        raise _Outcome("skipped", "fixed-frame energy vanishes identically for a flat wave")


def _rel(a, b, floor=0.0):
    return abs(a - b) / max(abs(b), floor) if max(abs(b), floor) > 0 else abs(a - b)


def _identity_margin(errors):
    return -float(np.max(errors))


def _curve_claim(functional, kind, s=None, floor=None, fixed_frame=False):
    def evaluate(ctx: Context):
        if fixed_frame:
            _fixed_frame_vanishes(ctx)
        v = ctx.curve(functional, s)
        if not np.all(np.isfinite(v)):
            raise _Outcome("finding", "curve is not finite (integrand singular on the p-range)")
        scale = floor(ctx.wave) if floor else None
        if kind == "monotone":
            r = check_monotone(v, "nonincreasing", scale=scale)
        elif kind == "increasing":
            r = check_monotone(v, "increasing", scale=scale)
            return r.worst_margin, 0.0
        elif kind == "convex":
            r = check_convex(v, scale=scale)
        elif kind == "concave":
            r = check_convex(v, concave=True, scale=scale)
        elif kind == "logconvex":
            if np.any(v <= 0):
                raise _Outcome("skipped", "curve not strictly positive")
            r = check_log_convex(v)
        else:
            raise ValueError(kind)
        return r.worst_margin, TOL_SIGN

    return evaluate


def _half_phi(w):
    return 0.5 * w.phi_max


def _region_floor(w):
    return 0.5 * w.phi_max * w.m_abs


# -------------------------------------------------------------- identities


def _cell_energy_moving(ctx):
    w = ctx.wave
    mv, _, det = dg.total_cell_energy(w, ctx.config.n_q, ctx.config.n_p)
    target = 0.5 * w.phi_max * w.m_abs
    err = max(_rel(mv, target), _rel(det["moving_physical"], target))
    return -err, TOL_QUADRATURE


def _cell_energy_fixed(ctx):
    w = ctx.wave
    _, fx, det = dg.total_cell_energy(w, ctx.config.n_q, ctx.config.n_p)
    err = _rel(det["fixed_physical"], fx, floor=1e-6 * 0.5 * w.phi_max * w.m_abs)
    return -err, TOL_QUADRATURE


def _period_formula(ctx):
    w = ctx.wave
    errs = []
    for p in ctx.grid[::8]:
        T = dg.period_T(w, p, ctx.config.n_q)
        M = dg.integral_mean_Ms(w, -1.0, p, ctx.config.n_q)
        errs.append(_rel(T, 0.5 * w.phi_max * M))
    return _identity_margin(errs), TOL_IDENTITY


def _period_ode(ctx):
    w = ctx.wave
    errs = []
    for p, trajs in ctx.particle_periods().items():
        T = dg.period_T(w, p, ctx.config.n_q)
        errs += [_rel(t.measured_period, T) for t in trajs]
    return _identity_margin(errs), TOL_ORACLE


def _period_spread(ctx):
    spreads = []
    for trajs in ctx.particle_periods().values():
        Ts = np.array([t.measured_period for t in trajs])
        spreads.append(float(np.std(Ts) / np.mean(Ts)))
    return _identity_margin(spreads), TOL_QUADRATURE


def _pattern_shift(ctx):
    w = ctx.wave
    gaps = [
        pattern_shift_gap(w, p, ctx.config.ode_tol) / w.wavelength
        for p in (0.0, 0.5 * w.m_abs, w.m_abs)
    ]
    return _identity_margin(gaps), 1e-7


def _period_max_at_surface(ctx):
    T = ctx.curve(dg.Functional.T)
    return float(np.min(T[0] - T)) / T[0], TOL_SIGN


def _period_bound(ctx):
    w = ctx.wave
    T_bed = ctx.curve(dg.Functional.T)[-1]
    bound = w.wavelength / ctx.constants().delta
    return (bound - T_bed) / bound, TOL_SIGN


def _moving_energy_constant(ctx):
    v = ctx.curve(dg.Functional.EnergyMoving)
    return _identity_margin(np.abs(v / _half_phi(ctx.wave) - 1.0)), TOL_IDENTITY


def _fixed_below_moving(ctx):
    fixed = ctx.curve(dg.Functional.EnergyFixed)
    moving = ctx.curve(dg.Functional.EnergyMoving)
    return float(np.min(moving - fixed)) / _half_phi(ctx.wave), TOL_SIGN


def _time_domain_energy(ctx):
    w = ctx.wave
    errs = []
    for p, trajs in ctx.particle_periods().items():
        for t in trajs:
            errs.append(_rel(t.energy_moving, _half_phi(w)))
            fixed = dg.energy_period_fixed(w, p, ctx.config.n_q)
            errs.append(_rel(t.energy_fixed, fixed, floor=1e-6 * _half_phi(w)))
    return _identity_margin(errs), TOL_ORACLE


def _cauchy_schwarz(ctx):
    w = ctx.wave
    n_q = ctx.config.n_q
    worst = np.inf
    for p in ctx.grid:
        lhs = dg.energy_period_fixed(w, p, n_q)
        m2 = dg.integral_mean_Ms(w, 2.0, p, n_q, of="E0")
        mm2 = dg.integral_mean_Ms(w, -2.0, p, n_q)
        rhs = 0.5 * w.phi_max * np.sqrt(m2 * mm2)
        worst = min(worst, (rhs - lhs) / _half_phi(w))
    return float(worst), TOL_SIGN


def _energy_s_identity(frame, s):
    def evaluate(ctx):
        w = ctx.wave
        errs = []
        for p in ctx.grid[::8]:
            val = dg.energy_period_s(w, s, p, ctx.config.n_q, frame)
            if s == 0.0:
                ref = 0.5 * dg.period_T(w, p, ctx.config.n_q)
            else:
                ref = dg.energy_period_moving(w, p, ctx.config.n_q)
            errs.append(_rel(val, ref))
        return _identity_margin(errs), TOL_IDENTITY

    return evaluate


def _centered(f, p, h):
    return (-f(p + 2 * h) + 8 * f(p + h) - 8 * f(p - h) + f(p - 2 * h)) / (12 * h)


def _derivative_claim(region, line):
    def evaluate(ctx):
        w = ctx.wave
        cfg = ctx.config
        h = 1e-3 * w.m_abs
        errs = []
        for frac in (0.25, 0.5, 0.75):
            p = frac * w.m_abs
            slope = _centered(lambda x: region(w, x, cfg.n_q, cfg.n_p), p, h)
            errs.append(_rel(slope, line(w, p, cfg.n_q), floor=1e-6 * _half_phi(w)))
        return _identity_margin(errs), TOL_DERIVATIVE

    return evaluate


def _moving_region_identity(ctx):
    w = ctx.wave
    v = ctx.curve(dg.Functional.RegionEnergyMoving)
    target = 0.5 * w.phi_max * ctx.grid
    return _identity_margin(np.abs(v - target) / (0.5 * w.phi_max * w.m_abs)), TOL_IDENTITY


def _area_bound(corrected):
    def evaluate(ctx):
        w = ctx.wave
        d0 = ctx.constants().delta0
        bound = w.m_abs * w.phi_max / (d0**2 if corrected else 2.0 * d0**2)
        return (bound - ctx.curve(dg.Functional.Area)[-1]) / bound, TOL_SIGN

    return evaluate


def _area_max_at_bed(ctx):
    S = ctx.curve(dg.Functional.Area)
    return float(np.min(S[-1] - S)) / S[-1], TOL_SIGN


def _area_cell(ctx):
    w = ctx.wave
    return -_rel(ctx.curve(dg.Functional.Area)[-1], dg.cell_area(w, ctx.config.n_q)), TOL_ORACLE


def _length_bed(ctx):
    w = ctx.wave
    return -_rel(ctx.curve(dg.Functional.Length)[-1], w.wavelength), TOL_QUADRATURE


def _length_trace(ctx):
    w = ctx.wave
    errs = []
    for p in (0.0, 0.5 * w.m_abs, w.m_abs):
        arc = trace_streamline(w, p, 1024).arclength()
        errs.append(_rel(arc, dg.streamline_length(w, p, ctx.config.n_q)))
    return _identity_margin(errs), TOL_ORACLE


def _length_bound(corrected):
    def evaluate(ctx):
        w = ctx.wave
        d0 = ctx.constants().delta0
        bound = w.phi_max / d0 if corrected else np.sqrt(2.0) * w.phi_max / (2.0 * d0)
        return (bound - ctx.curve(dg.Functional.Length)[-1]) / bound, TOL_SIGN

    return evaluate


def _surface_bernoulli(ctx):
    w = ctx.wave
    tol = 10.0 * w.params.newton_tol
    return -residual(w) / tol, 1.0, f"absolute tolerance {tol:.1e} m^2/s^2"


def _extrema(attr):
    def evaluate(ctx):
        ex = ctx.extrema()
        if ex.status == "skipped":
            raise _Outcome("skipped", ex.note)
        ok = getattr(ex, attr)
        return (0.0 if ok else -1.0), 0.0

    return evaluate


def _bernoulli_gap(ctx):
    ex = ctx.extrema()
    if ex.status == "skipped":
        raise _Outcome("skipped", ex.note)
    tol = 10.0 * max(ctx.wave.residual_norm, ctx.wave.params.newton_tol)
    return -abs(ex.bernoulli_gap) / tol, 1.0, f"absolute tolerance {tol:.1e} m^2/s^2"


def _inversion_spot_check(ctx):
    w = ctx.wave
    rng = np.random.default_rng(ctx.config.seed)
    errs = []
    for _ in range(ctx.config.spot_checks):
        q = rng.uniform(0.0, w.phi_max)
        p = rng.uniform(0.0, w.m_abs)
        s = sample_at_qp(w, q, p)
        q2, p2 = invert_map(w, s.x, s.z)
        errs.append(max(abs(q2 - q) / w.phi_max, abs(p2 - p) / w.m_abs))
    return _identity_margin(errs), TOL_IDENTITY


def _build_registry():
    F = dg.Functional
    claims = []
    add = claims.append
    for s in MEAN_EXPONENTS:
        for kind, text in (
            ("monotone", "non-increasing"),
            ("convex", "convex"),
            ("logconvex", "log-convex"),
        ):
            add(Claim(f"means.{kind}.s={s:g}", f"integral mean of E^s is {text} in p", _curve_claim(F.Ms, kind, s)))
    add(Claim("cell_energy.moving", "moving-frame cell energy is half the strip area", _cell_energy_moving))
    add(Claim("cell_energy.fixed", "fixed-frame cell energy equals the strip integral of E0/(2E)", _cell_energy_fixed))
    add(Claim("period.formula", "streamline period equals phi_max/2 times the mean of 1/E", _period_formula))
    add(Claim("period.ode_match", "integrated particle period equals the quadrature period", _period_ode))
    add(Claim("period.start_independence", "particle period does not depend on the start point", _period_spread))
    add(Claim("period.pattern_shift", "after one period a particle has advanced one wavelength", _pattern_shift))
    for kind, text in (("monotone", "non-increasing"), ("convex", "convex"), ("logconvex", "log-convex")):
        add(Claim(f"period.{kind}", f"streamline period is {text} in p", _curve_claim(F.T, kind)))
    add(Claim("period.max_at_surface", "streamline period is largest at the surface", _period_max_at_surface))
    add(Claim("period.bound", "bed period is at most L/delta", _period_bound))
    for kind, text in (("monotone", "non-increasing"), ("convex", "convex"), ("logconvex", "log-convex")):
        add(
            Claim(
                f"energy.fixed.{kind}",
                f"fixed-frame per-period energy is {text} in p",
                _curve_claim(F.EnergyFixed, kind, floor=_half_phi, fixed_frame=kind == "logconvex"),
            )
        )
    add(Claim("energy.moving.constant", "moving-frame per-period energy equals phi_max/2", _moving_energy_constant))
    add(Claim("energy.fixed_below_moving", "fixed-frame per-period energy is below the moving-frame one", _fixed_below_moving))
    add(Claim("energy.time_domain", "time-integrated particle energies match the quadrature", _time_domain_energy))
    add(Claim("energy.cauchy_schwarz", "fixed-frame energy obeys the Cauchy-Schwarz bound", _cauchy_schwarz))
    for s in MOVING_EXPONENTS:
        for kind in ("monotone", "convex"):
            add(
                Claim(
                    f"energy_s.moving.{kind}.s={s:g}",
                    f"moving-frame exponent-s energy is {'non-increasing' if kind == 'monotone' else 'convex'}",
                    _curve_claim(F.EnergyMovingS, kind, s),
                )
            )
    for s in FIXED_EXPONENTS:
        for kind in ("monotone", "convex"):
            add(
                Claim(
                    f"energy_s.fixed.{kind}.s={s:g}",
                    f"fixed-frame exponent-s energy is {'non-increasing' if kind == 'monotone' else 'convex'}",
                    _curve_claim(F.EnergyFixedS, kind, s, fixed_frame=True),
                    suspect=True,
                )
            )
    add(Claim("energy_s.identity.s=0", "fixed-frame exponent-0 energy equals half the period", _energy_s_identity("fixed", 0.0)))
    add(Claim("energy_s.identity.s=1", "moving-frame exponent-1 energy equals phi_max/2", _energy_s_identity("moving", 1.0)))
    for kind, text in (("concave", "concave"), ("increasing", "strictly increasing")):
        add(
            Claim(
                f"region_energy.fixed.{kind}",
                f"fixed-frame region energy is {text} in p",
                _curve_claim(F.RegionEnergyFixed, kind, floor=_region_floor, fixed_frame=True),
            )
        )
    add(
        Claim(
            "region_energy.fixed.derivative",
            "p-derivative of the fixed-frame region energy is the per-period energy",
            _derivative_claim(
                lambda w, p, nq, npl: dg.region_energy(w, p, nq, npl, "fixed"), dg.energy_period_fixed
            ),
        )
    )
    add(Claim("region_energy.moving.identity", "moving-frame region energy equals phi_max p / 2", _moving_region_identity))
    for s in REGION_FIXED_EXPONENTS:
        add(
            Claim(
                f"region_energy_s.fixed.concave.s={s:g}",
                "fixed-frame exponent-s region energy is concave",
                _curve_claim(F.RegionEnergyFixedS, "concave", s, fixed_frame=True),
            )
        )
    for s in REGION_MOVING_EXPONENTS:
        add(
            Claim(
                f"region_energy_s.moving.concave.s={s:g}",
                "moving-frame exponent-s region energy is concave",
                _curve_claim(F.RegionEnergyMovingS, "concave", s),
                suspect=True,
            )
        )
    for kind, text in (("concave", "concave"), ("increasing", "strictly increasing")):
        add(Claim(f"area.{kind}", f"area above streamline p is {text}", _curve_claim(F.Area, kind)))
    add(Claim("area.derivative", "p-derivative of the area is the streamline period", _derivative_claim(dg.region_area, dg.period_T)))
    add(Claim("area.bound", "cell area is at most |m| phi_max / (2 delta0^2)", _area_bound(False), suspect=True))
    add(Claim("area.bound_corrected", "cell area is at most |m| phi_max / delta0^2", _area_bound(True)))
    add(Claim("area.max_at_bed", "area is largest at the bed", _area_max_at_bed))
    add(Claim("area.cell_area", "area at the bed equals the physical cell area", _area_cell))
    for kind, text in (("monotone", "non-increasing"), ("convex", "convex"), ("logconvex", "log-convex")):
        add(Claim(f"length.{kind}", f"streamline length is {text} in p", _curve_claim(F.Length, kind)))
    add(Claim("length.bed", "bed streamline length equals L", _length_bed))
    add(Claim("length.arclength", "length equals the traced streamline arclength", _length_trace))
    add(Claim("length.bound", "bed length is at most sqrt(2) phi_max / (2 delta0)", _length_bound(False), suspect=True))
    add(Claim("length.bound_corrected", "bed length is at most phi_max / delta0", _length_bound(True)))
    add(Claim("surface.bernoulli", "E + g_eff eta is constant along the surface", _surface_bernoulli))
    add(Claim("surface.crest_min", "surface minimum of E sits at the crest", _extrema("crest_ok")))
    add(Claim("surface.trough_max", "surface maximum of E sits at the trough", _extrema("trough_ok")))
    add(Claim("surface.interior_max", "maximum of E over the cell is on the surface", _extrema("interior_max_on_surface")))
    add(Claim("surface.bernoulli_gap", "E(trough) - E(crest) equals g_eff H", _bernoulli_gap))
    add(Claim("map.inversion_roundtrip", "map inversion recovers random strip points", _inversion_spot_check))
    return tuple(claims)


REGISTRY = _build_registry()
CLAIM_IDS = tuple(sorted(c.claim_id for c in REGISTRY))
LAGRANGIAN_CLAIMS = frozenset(
    {"period.ode_match", "period.start_independence", "period.pattern_shift", "energy.time_domain"}
)


def _run_claim(claim: Claim, ctx: Context, fingerprint: str) -> PropertyReport:
    note = ""
    try:
        if not ctx.config.include_lagrangian and claim.claim_id in LAGRANGIAN_CLAIMS:
            raise _Outcome("skipped", "trajectory claims disabled")
        out = claim.evaluate(ctx)
        margin, tol = float(out[0]), float(out[1])
        if len(out) > 2:
            note = out[2]
        if not np.isfinite(margin):
            raise _Outcome("finding" if claim.suspect else "fail", "non-finite margin")
        status = "pass" if margin >= -tol else ("finding" if claim.suspect else "fail")
    except _Outcome as o:
        return PropertyReport(claim.claim_id, claim.statement, o.status, float("nan"), 0.0, fingerprint, o.note)
    except (HodowaveError, ValueError, FloatingPointError, AssertionError) as exc:
        status = "finding" if claim.suspect else "fail"
        return PropertyReport(
            claim.claim_id, claim.statement, status, float("nan"), 0.0, fingerprint, f"{type(exc).__name__}: {exc}"
        )
    return PropertyReport(claim.claim_id, claim.statement, status, margin, tol, fingerprint, note)


def worker_count(requested: int | None = None) -> int:
    if requested is not None:
        return max(1, int(requested))
    cap = os.environ.get(WORKERS_ENV)
    default = min(8, os.cpu_count() or 1)
    return max(1, min(default, int(cap))) if cap else default


def verify_all(wave: ConformalWave, config: VerifyConfig | None = None, claim_ids=None) -> list[PropertyReport]:
    """Evaluate the registered claims (or the subset ``claim_ids``) on ``wave``.

    Claims run concurrently; a failure in one never aborts the others.  The
    result is sorted by ``claim_id``.
    """
    config = config or VerifyConfig()
    ctx = Context(wave, config)
    fp = wave.fingerprint()
    chosen = [c for c in REGISTRY if claim_ids is None or c.claim_id in claim_ids]
    with ThreadPoolExecutor(max_workers=worker_count(config.workers)) as pool:
        reports = list(pool.map(lambda c: _run_claim(c, ctx, fp), chosen))
    return sorted(reports, key=lambda r: r.claim_id)


def summarize(reports) -> dict:
    counts = {"pass": 0, "fail": 0, "skipped": 0, "finding": 0}
    for r in reports:
        counts[r.status] += 1
    return counts


# --------------------------------------------------------------------------
# persistence


def perturb_coefficient(wave: ConformalWave, index: int = 0, amount: float = 1e-3) -> ConformalWave:
    """Copy of ``wave`` with one map coefficient shifted by ``amount`` times the
    largest coefficient (or by ``amount * L`` for a flat wave)."""
    coeffs = np.array(wave.series.coeffs)
    ref = float(np.max(np.abs(coeffs))) or wave.wavelength
    coeffs[index] += amount * ref
    series = StripSeries(
        wave.series.linear_slope, wave.series.mean_level, coeffs, wave.series.period_q, wave.series.depth_p
    )
    return replace(wave, series=series)


def _hex(v: float) -> str:
    return float(v).hex()


def wave_to_dict(wave: ConformalWave, timings: dict | None = None) -> dict:
    s = wave.series
    return {
        "format": "hodowave.wave/1",
        "tool_version": __version__,
        "params": wave.params.to_dict(),
        "scalars": {
            "c": _hex(wave.c),
            "phi_max": _hex(wave.phi_max),
            "m_abs": _hex(wave.m_abs),
            "bernoulli_B": _hex(wave.bernoulli_B),
            "g_eff": _hex(wave.g_eff),
            "residual_norm": _hex(wave.residual_norm),
            "linear_slope": _hex(s.linear_slope),
            "mean_level": _hex(s.mean_level),
            "period_q": _hex(s.period_q),
            "depth_p": _hex(s.depth_p),
        },
        "coeffs_re": [_hex(v) for v in s.coeffs.real],
        "coeffs_im": [_hex(v) for v in s.coeffs.imag],
        "summary": {
            "c": repr(wave.c),
            "phi_max": repr(wave.phi_max),
            "m_abs": repr(wave.m_abs),
            "bernoulli_B": repr(wave.bernoulli_B),
            "g_eff": repr(wave.g_eff),
            "residual": repr(wave.residual_norm),
            "newton_iters": wave.newton_iters,
            "fingerprint": wave.fingerprint(),
        },
        "timings": timings or {},
    }


def wave_from_dict(doc: dict) -> ConformalWave:
    if doc.get("format") != "hodowave.wave/1":
        raise DomainError("not a hodowave solution document")
    sc = {k: float.fromhex(v) for k, v in doc["scalars"].items()}
    coeffs = np.array([float.fromhex(v) for v in doc["coeffs_re"]]) + 1j * np.array(
        [float.fromhex(v) for v in doc["coeffs_im"]]
    )
    series = StripSeries(sc["linear_slope"], sc["mean_level"], coeffs, sc["period_q"], sc["depth_p"])
    return ConformalWave(
        series=series,
        c=sc["c"],
        phi_max=sc["phi_max"],
        m_abs=sc["m_abs"],
        bernoulli_B=sc["bernoulli_B"],
        g_eff=sc["g_eff"],
        residual_norm=sc["residual_norm"],
        params=PhysicalParams(**doc["params"]),
        newton_iters=int(doc["summary"].get("newton_iters", 0)),
    )


def save_wave(wave: ConformalWave, path, timings: dict | None = None) -> None:
    with open(path, "w") as fh:
        json.dump(wave_to_dict(wave, timings), fh, indent=1, sort_keys=True)
        fh.write("\n")


def load_wave(path) -> ConformalWave:
    with open(path) as fh:
        return wave_from_dict(json.load(fh))


def write_curve_csv(curve: dg.DiagnosticCurve, path) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(f"# functional={curve.functional.value} s={'' if curve.s is None else repr(curve.s)} units={curve.units}"
                 f" quadrature_n={curve.quadrature_n}\n")
        out = csv.writer(fh)
        out.writerow(["p", curve.functional.value])
        for p, v in zip(curve.p_grid, curve.values):
            out.writerow([repr(float(p)), repr(float(v))])


def write_report_csv(reports, path) -> None:
    with open(path, "w", newline="") as fh:
        out = csv.writer(fh)
        out.writerow(REPORT_HEADER)
        for r in reports:
            out.writerow(r.row())


@dataclass
class RunManifest:
    params: dict
    wave: dict
    grids: dict
    tolerances: dict
    tool_version: str = __version__
    wall_clock: dict = field(default_factory=dict)

    @classmethod
    def build(cls, wave: ConformalWave, config: VerifyConfig, wall_clock: dict | None = None):
        return cls(
            params=wave.params.to_dict(),
            wave=wave_to_dict(wave)["summary"],
            grids={"n_points": config.n_points, "n_q": config.n_q, "n_p": config.n_p},
            tolerances={
                "identity": TOL_IDENTITY,
                "quadrature": TOL_QUADRATURE,
                "oracle": TOL_ORACLE,
                "derivative": TOL_DERIVATIVE,
                "sign": TOL_SIGN,
                "ode": config.ode_tol,
            },
            wall_clock=wall_clock or {},
        )

    def to_dict(self):
        return asdict(self)


def timed(fn, *args, **kwargs):
    t0 = time.perf_counter()
    out = fn(*args, **kwargs)
    return out, time.perf_counter() - t0
