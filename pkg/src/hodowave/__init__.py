"""Steady periodic equatorial water waves in hodograph variables, with
streamline and kinetic-energy diagnostics."""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    DomainError,
    HodowaveError,
    IntegratorError,
    InversionError,
    NearStagnationError,
    SolverError,
    UnsupportedExponentError,
)
from .solver import ConformalWave, PhysicalParams, solve_wave  # noqa: E402

__all__ = [
    "ConformalWave",
    "DomainError",
    "HodowaveError",
    "IntegratorError",
    "InversionError",
    "NearStagnationError",
    "PhysicalParams",
    "SolverError",
    "UnsupportedExponentError",
    "solve_wave",
]
