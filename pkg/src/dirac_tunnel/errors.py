"""Exception types shared across the library."""

from __future__ import annotations

__all__ = [
    "DiracTunnelError",
    "UnsupportedRegimeError",
    "EnergyZoneError",
    "NumericalDegeneracyError",
    "ConvergenceError",
    "DegenerateWeightError",
    "ConfigError",
]


class DiracTunnelError(Exception):
    """Base class for every error raised by this library."""


class UnsupportedRegimeError(DiracTunnelError):
    """The barrier is not taller than the rest energy, so no evanescent
    transmission window exists and none of the library's formulas apply."""


class EnergyZoneError(DiracTunnelError):
    """A momentum or energy falls outside the zone an operation covers.

    The offending zone classification is attached as ``zone`` when known.
    """

    def __init__(self, message: str, zone=None):
        super().__init__(message)
        self.zone = zone


class NumericalDegeneracyError(DiracTunnelError):
    """A matching system became singular, e.g. the interior decay rate
    vanishes exactly at a window edge and the two interior modes coincide."""


class ConvergenceError(DiracTunnelError):
    """Quadrature refinement was exhausted before the requested tolerance.

    ``estimate`` carries the best value obtained so callers can decide
    whether to proceed with it anyway.
    """

    def __init__(self, message: str, estimate=None):
        super().__init__(message)
        self.estimate = estimate


class DegenerateWeightError(DiracTunnelError):
    """Filter statistics were requested for a packet whose transmitted
    weight underflows to zero; means and velocities are undefined there."""


class ConfigError(DiracTunnelError):
    """Invalid or malformed run configuration.

    ``line`` is the 1-based line number in the config file when the error
    came from parsing a file, else ``None``.
    """

    def __init__(self, message: str, line: int | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line
