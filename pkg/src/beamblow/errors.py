"""Exception types shared across the package."""

from __future__ import annotations


class BeamblowError(Exception):
    """Base class for all package-specific failures."""


class ConfigError(BeamblowError):
    """A run configuration file could not be parsed or validated."""


class SolverFailure(BeamblowError):
    """Time integration could not continue (step size exhausted, linear
    solve diverged, or state became non-finite)."""


class ConvergenceFailure(BeamblowError):
    """An iterative computation (eigenvalue, embedding constant, linear
    solve) failed to reach its tolerance within the iteration budget."""

    def __init__(self, message: str, residual: float | None = None):
        super().__init__(message)
        self.residual = residual


class ConstructionFailure(BeamblowError):
    """Initial data construction could not satisfy its target conditions."""
