"""Exception types raised across the package."""

from __future__ import annotations


class WalkError(Exception):
    """Base class for all package errors."""


class DomainError(WalkError, ValueError):
    """A parameter lies outside its valid range."""


class CapacityError(WalkError):
    """The walker would leave the preallocated lattice."""


class DegenerateStateError(WalkError, ArithmeticError):
    """The state carries (numerically) zero probability."""


class NumericalConsistencyError(WalkError, ArithmeticError):
    """A quantity that must be physical came out unphysical beyond rounding."""


class StatisticsError(WalkError):
    """Too few counts to form an estimate."""


class ConfigError(WalkError, ValueError):
    """Malformed configuration document or input file."""


class SweepError(WalkError):
    """A sweep cell failed; carries the offending coordinates."""

    def __init__(self, message: str, theta: float, second_axis_kind: str, second_value: float):
        super().__init__(message)
        self.theta = theta
        self.second_axis_kind = second_axis_kind
        self.second_value = second_value
