"""Simulation error hierarchy.

Every failure raised by the numerical core derives from ``SimulationError`` so
the CLI and the HTTP layer can map it to an exit code or status without
catching bare ``Exception``.
"""

from typing import Optional


class SimulationError(Exception):
    """Base class for all errors raised by the simulator."""


class NotPositiveDefiniteError(SimulationError):
    """Cholesky factorization failed even after the jitter schedule."""

    def __init__(self, message: str = "not positive definite", retries: int = 0):
        super().__init__(message)
        self.retries = retries


class DomainError(SimulationError):
    """An argument lies outside the domain of a mathematical function."""


class RootIsolationError(SimulationError):
    """Fewer sign changes than polynomial degree were found on the bracket."""

    def __init__(self, found: int, expected: int):
        super().__init__(f"root isolation failure: found {found} of {expected} roots")
        self.found = found
        self.expected = expected


class InnovationSingularError(SimulationError):
    """The innovation covariance cannot be inverted."""

    def __init__(self, message: str = "innovation covariance singular"):
        super().__init__(message)


class DimensionMismatchError(SimulationError):
    """Array shapes do not agree with a network or matrix layout."""


class ConfigError(SimulationError):
    """Experiment configuration could not be parsed or validated."""

    def __init__(self, message: str, field: Optional[str] = None, line: Optional[int] = None):
        location = []
        if line is not None:
            location.append(f"line {line}")
        if field:
            location.append(f"field '{field}'")
        prefix = f"{', '.join(location)}: " if location else ""
        super().__init__(f"{prefix}{message}")
        self.field = field
        self.line = line


class StepError(SimulationError):
    """Failure inside the simulation loop, tagged with the step it happened at."""

    def __init__(self, t: int, cause: BaseException):
        super().__init__(f"step {t}: {type(cause).__name__}: {cause}")
        self.t = t


__all__ = [
    "SimulationError",
    "NotPositiveDefiniteError",
    "DomainError",
    "RootIsolationError",
    "InnovationSingularError",
    "DimensionMismatchError",
    "ConfigError",
    "StepError",
]
