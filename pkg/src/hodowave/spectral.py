"""Fourier machinery for the inverse hodograph map on the periodic strip.

The strip coordinate is ``zeta = q - i p`` with ``0 <= p <= depth_p``; ``p = 0``
is the free surface and ``p = depth_p`` the flat bed.  The inverse map is

    Z(zeta) = slope * zeta + i * mean_level
              + sum_n A_n exp(-i n k zeta) + B_n exp(+i n k zeta)

with ``k = 2 pi / period_q``.  ``A_n = i c_n`` are the surface-dominant
amplitudes (decaying towards the bed); ``B_n`` are their bed reflections, so the
bed is exactly flat and ``Z(zeta + period_q) = Z(zeta) + L``.  Real ``c_n``
give a wave symmetric about the crest at ``q = 0``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, NearStagnationError

# Relative slack on the p-range check, so that boundary evaluations survive
# round-off in p itself.
_P_SLACK = 1e-12


def apply_bed_reflection(surface_coeffs, depth_p, k_q):
    """Pair each surface amplitude with its bed-reflected partner.

    ``surface_coeffs[n-1]`` multiplies ``exp(-i n k zeta)``.  The partner of mode
    ``n`` multiplies ``exp(+i n k zeta)`` and equals
    ``conj(A_n) * exp(-2 n k depth_p)``, which makes the oscillatory part of the
    map real on ``p = depth_p`` for every mode separately.

    Returns ``(decaying, growing)`` as two complex arrays of equal length.
    """
    a = np.asarray(surface_coeffs, dtype=complex)
    n = np.arange(1, a.size + 1)
    return a.copy(), np.conj(a) * np.exp(-2.0 * n * k_q * depth_p)


@dataclass(frozen=True)
class StripSeries:
    """Inverse hodograph map ``x + i z`` as a Fourier series on the strip."""

    linear_slope: float
    mean_level: float
    coeffs: np.ndarray
    period_q: float
    depth_p: float
    _decaying: np.ndarray = field(init=False, repr=False, compare=False)
    _reflected: np.ndarray = field(init=False, repr=False, compare=False)
    _active: int = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        coeffs = np.array(self.coeffs, dtype=complex).ravel()
        if coeffs.size < 1:
            raise DomainError("a strip series needs at least one mode")
        if not (self.period_q > 0 and self.depth_p > 0):
            raise DomainError("period_q and depth_p must be positive")
        coeffs.setflags(write=False)
        object.__setattr__(self, "coeffs", coeffs)
        dec = 1j * coeffs
        ref = np.conj(dec)
        dec.setflags(write=False)
        ref.setflags(write=False)
        # Pointwise evaluation skips the tail whose derivative contribution is
        # below 1e-18 of the mean slope: invisible in double precision.
        n = np.arange(1, coeffs.size + 1)
        big = np.flatnonzero(n * (2.0 * np.pi / self.period_q) * np.abs(coeffs) > 1e-18 * abs(self.linear_slope))
        active = int(big[-1]) + 1 if big.size else 1
        object.__setattr__(self, "_decaying", dec[:active])
        object.__setattr__(self, "_reflected", ref[:active])
        object.__setattr__(self, "_active", active)

    @property
    def n_modes(self) -> int:
        return self.coeffs.size

    @property
    def k_q(self) -> float:
        return 2.0 * np.pi / self.period_q

    @property
    def wavelength(self) -> float:
        return self.linear_slope * self.period_q

    @property
    def depth(self) -> float:
        """Physical depth ``d`` implied by the bed image ``z = -d``."""
        return self.linear_slope * self.depth_p - self.mean_level

    def spectral_decay(self) -> float:
        """``|c_N| / max |c_n|`` (0 for the zero series)."""
        mags = np.abs(self.coeffs)
        peak = mags.max()
        return 0.0 if peak == 0 else float(mags[-1] / peak)

    def _check_p(self, p):
        p = np.asarray(p, dtype=float)
        slack = _P_SLACK * self.depth_p
        if np.any(p < -slack) or np.any(p > self.depth_p + slack):
            raise DomainError(f"p must lie in [0, {self.depth_p!r}]")
        return np.clip(p, 0.0, self.depth_p)

    def _mode_factors(self, q, p):
        # Bed partners enter as conj(A_n) exp(-n k (2h - p)), the same value as
        # B_n exp(n k p) from apply_bed_reflection but free of overflow.
        # Powers of one exponential per point; both bases have modulus <= 1
        # inside the strip, so the running product stays well conditioned.
        n = np.arange(1, self._active + 1)
        k = self.k_q
        q = np.asarray(q, dtype=float)[..., None]
        p = np.asarray(p, dtype=float)[..., None]
        shape = np.broadcast_shapes(q.shape[:-1], p.shape[:-1]) + (n.size,)
        dec = np.broadcast_to(np.exp(-1j * k * (q - 1j * p)), shape).cumprod(axis=-1)
        gro = np.broadcast_to(np.exp(1j * k * q - k * (2.0 * self.depth_p - p)), shape).cumprod(axis=-1)
        return n, dec, gro

    def line_coefficients(self, p: float, derivative: bool = False):
        """Two-sided Fourier coefficients in ``q`` of ``Z`` (or ``dZ/dzeta``) on a p-level.

        Returns ``(freqs, values)`` where ``values[j]`` multiplies
        ``exp(i freqs[j] k q)``; the linear term is excluded for ``Z`` itself.
        """
        p = float(self._check_p(p))
        n = np.arange(1, self._active + 1)
        k = self.k_q
        neg = self._decaying * np.exp(-n * k * p)
        pos = self._reflected * np.exp(-n * k * (2.0 * self.depth_p - p))
        if derivative:
            neg = -1j * n * k * neg
            pos = 1j * n * k * pos
            zero = self.linear_slope + 0j
        else:
            zero = 1j * (self.mean_level - self.linear_slope * p)
        freqs = np.concatenate([-n[::-1], [0], n])
        values = np.concatenate([neg[::-1], [zero], pos])
        return freqs, values


def eval_map(series: StripSeries, q, p, extend: bool = False):
    """``Z = x + i z`` at strip points ``(q, p)``; arrays broadcast.

    ``extend=True`` skips the range check and evaluates the analytic
    continuation of the series just outside the strip (used by integrator
    trial stages that overshoot the surface or the bed).
    """
    q = np.asarray(q, dtype=float)
    p = np.asarray(p, dtype=float) if extend else series._check_p(p)
    q, p = np.broadcast_arrays(q, p)
    _, dec, gro = series._mode_factors(q, p)
    osc = dec @ series._decaying + gro @ series._reflected
    return series.linear_slope * (q - 1j * p) + 1j * series.mean_level + osc


def eval_map_derivative(series: StripSeries, q, p, stagnation_speed: float | None = None, extend: bool = False):
    """``dZ/dzeta`` at strip points; its reciprocal is ``u - c - i w``.

    Raises :class:`NearStagnationError` when the implied speed ``1/|dZ/dzeta|``
    drops below ``stagnation_speed`` (default ``1e-6`` of the mean speed
    ``1/linear_slope``), or when the derivative vanishes.
    """
    q = np.asarray(q, dtype=float)
    p = np.asarray(p, dtype=float) if extend else series._check_p(p)
    q, p = np.broadcast_arrays(q, p)
    n, dec, gro = series._mode_factors(q, p)
    k = series.k_q
    dz = (
        series.linear_slope
        + dec @ (-1j * n * k * series._decaying)
        + gro @ (1j * n * k * series._reflected)
    )
    _guard_stagnation(series, dz, stagnation_speed)
    return dz


def eval_map_and_derivative(series: StripSeries, q, p, extend: bool = False):
    """``(Z, dZ/dzeta)`` sharing one table of mode factors; no stagnation guard."""
    q = np.asarray(q, dtype=float)
    p = np.asarray(p, dtype=float) if extend else series._check_p(p)
    q, p = np.broadcast_arrays(q, p)
    n, dec, gro = series._mode_factors(q, p)
    k = series.k_q
    Z = series.linear_slope * (q - 1j * p) + 1j * series.mean_level + dec @ series._decaying + gro @ series._reflected
    dz = series.linear_slope + dec @ (-1j * n * k * series._decaying) + gro @ (1j * n * k * series._reflected)
    return Z, dz


def _guard_stagnation(series, dz, stagnation_speed):
    if stagnation_speed is None:
        stagnation_speed = 1e-6 / series.linear_slope
    mag = np.abs(dz)
    if np.any(mag == 0) or np.any(~np.isfinite(mag)):
        raise NearStagnationError("degenerate map derivative")
    if np.any(1.0 / mag < stagnation_speed):
        raise NearStagnationError(
            f"local speed {1.0 / mag.max():.3e} below guard {stagnation_speed:.3e}"
        )


def grid_transform(values, n: int | None = None):
    """Forward transform on a uniform periodic grid, normalised so that
    ``values[l] = sum_j coeffs[j] exp(2 pi i j l / n)``."""
    v = np.asarray(values)
    if v.ndim != 1 or v.size == 0:
        raise ValueError("grid_transform expects a non-empty 1-D array")
    if n is not None and n != v.size:
        raise ValueError(f"expected {n} samples, got {v.size}")
    return np.fft.fft(v) / v.size


def inverse_grid_transform(coeffs, n: int | None = None):
    """Inverse of :func:`grid_transform`."""
    c = np.asarray(coeffs)
    if c.ndim != 1 or c.size == 0:
        raise ValueError("inverse_grid_transform expects a non-empty 1-D array")
    if n is not None and n != c.size:
        raise ValueError(f"expected {n} coefficients, got {c.size}")
    return np.fft.ifft(c) * c.size


def eval_on_line(series: StripSeries, p: float, n_q: int, derivative: bool = False):
    """Evaluate ``Z`` or ``dZ/dzeta`` at ``q_l = l * period_q / n_q`` on one p-level.

    Uses the inverse grid transform; frequencies beyond the grid are folded
    back, which is exact at the grid nodes.
    """
    freqs, values = series.line_coefficients(p, derivative=derivative)
    idx = np.mod(freqs, n_q)
    folded = np.bincount(idx, weights=values.real, minlength=n_q) + 1j * np.bincount(
        idx, weights=values.imag, minlength=n_q
    )
    out = inverse_grid_transform(folded)
    if not derivative:
        q = series.period_q * np.arange(n_q) / n_q
        out = out + series.linear_slope * q
    else:
        _guard_stagnation(series, out, None)
    return out
