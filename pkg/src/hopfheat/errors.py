"""Exception types raised by hopfheat."""


class HopfHeatError(Exception):
    """Base class for all library errors."""


class NonConvergence(HopfHeatError):
    """Adaptive quadrature hit its depth or evaluation budget above tolerance."""

    def __init__(self, msg, value=None, error_estimate=None):
        super().__init__(msg)
        self.value = value
        self.error_estimate = error_estimate


class SeriesDivergenceGuard(HopfHeatError):
    """A truncated series could not meet its tail bound within the index budget."""


class DomainError(HopfHeatError, ValueError):
    """Argument outside the domain where a formula is defined."""


class PoleSingularity(HopfHeatError, ValueError):
    """Evaluation at the pole of the Green function."""


class NoBracket(HopfHeatError):
    """Root finder found no sign change on its search interval."""


class GridTooCoarse(HopfHeatError, ValueError):
    """Finite-difference grid spacing exceeds the allowed maximum."""


class LinearSolveFailure(HopfHeatError):
    """Sparse implicit solve failed or returned non-finite values."""
