"""Exception hierarchy shared by all modules."""
from __future__ import annotations


class EllcovError(Exception):
    """Base class for every error raised by this package."""


class InvalidModulus(EllcovError, ValueError):
    """The period ratio does not lie in the upper half-plane."""


class NonConvergent(EllcovError, ArithmeticError):
    """A series did not reach its tolerance within the allowed number of terms."""


class NearSingularity(EllcovError, ArithmeticError):
    """An argument lies within the guard distance of a pole or zero."""


class InvalidIndex(EllcovError, ValueError):
    """A sigma index (A, B) reduced to (0, 0)."""


class NotTraceless(EllcovError, ValueError):
    pass


class DegenerateBranchPoints(EllcovError, ValueError):
    """Two branch points coincide (or nearly so); ``pair`` holds their 1-based indices."""

    def __init__(self, message: str, pair: tuple[int, int] | None = None):
        super().__init__(message)
        self.pair = pair


DegenerateInput = DegenerateBranchPoints


class QuadratureFailure(EllcovError, ArithmeticError):
    pass


class PathThroughBranchPoint(EllcovError, ValueError):
    pass


class StepSizeUnderflow(EllcovError, ArithmeticError):
    pass


class SingularityOnPath(EllcovError, ArithmeticError):
    pass


class ZeroResidue(EllcovError, ZeroDivisionError):
    pass


class ConfigError(EllcovError, ValueError):
    pass
