"""Exception hierarchy shared by the solver, diagnostics and harness."""


class HodowaveError(Exception):
    """Base class for all package errors."""


class DomainError(HodowaveError, ValueError):
    """Input outside the region where an operation is defined."""


class NearStagnationError(HodowaveError):
    """Local fluid speed in the moving frame fell below the stagnation guard."""


class SolverError(HodowaveError):
    """Newton iteration or continuation failed to converge."""

    def __init__(self, message, residual=float("nan"), height=None):
        super().__init__(message)
        self.residual = residual
        self.height = height


class UnsupportedExponentError(HodowaveError, ValueError):
    """Exponent lies outside the range an integral functional accepts."""


class InversionError(HodowaveError):
    """Newton inversion of the conformal map did not converge."""


class IntegratorError(HodowaveError):
    """Time integration of a particle trajectory failed."""
