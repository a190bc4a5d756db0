"""Exception hierarchy shared by every module of the package."""

from __future__ import annotations


class CondGradError(Exception):
    """Base class for all errors raised by ``condgrad``."""


class DimensionMismatch(CondGradError, ValueError):
    pass


class NonFiniteValue(CondGradError, ArithmeticError):
    """An oracle produced NaN or Inf where a finite value is required."""


class NonFiniteInput(CondGradError, ValueError):
    pass


class NotSupercoercive(CondGradError, ValueError):
    pass


class InfeasibleQueryPoint(CondGradError, ValueError):
    """Gap requested at a point outside ``dom g``."""


class NegativeGap(CondGradError):
    """Computed gap is below ``-1e-12``, which points at an LMO defect."""


class StartPointInfeasible(CondGradError, ValueError):
    pass


class LinesearchStalled(CondGradError):
    """Backtracking exceeded ``max_backtracks``.

    ``trace`` holds the records produced before the stall when the error
    escapes a ``*_run`` driver.
    """

    def __init__(self, message: str, trace=None):
        super().__init__(message)
        self.trace = trace


class DegenerateDirection(CondGradError):
    pass


class InvariantViolation(CondGradError):
    """A per-step descent guarantee failed beyond rounding slack."""


class DimensionTooLarge(CondGradError, ValueError):
    pass


class NonConvexFixture(CondGradError, ValueError):
    pass


class InsufficientTrace(CondGradError, ValueError):
    pass


class ConfigError(CondGradError, ValueError):
    pass
