"""Exception hierarchy.

Two families matter to callers: ``ValidationError`` for bad inputs (caught by
the CLI and mapped to exit status 2) and ``SimulationError`` for failures that
indicate a numerical or logical fault at run time (exit status 3).
"""


class MultitraceError(Exception):
    """Base class for all library errors."""


class ValidationError(MultitraceError, ValueError):
    """An input violates a documented precondition."""


class SimulationError(MultitraceError, RuntimeError):
    """A run-time numerical or logical failure."""


# density matrices
class NotHermitian(ValidationError):
    pass


class NotUnitTrace(ValidationError):
    pass


class NotPositive(ValidationError):
    pass


class DimensionMismatch(ValidationError):
    pass


class TooLarge(ValidationError):
    pass


class SingularState(ValidationError):
    pass


class NotUnital(ValidationError):
    pass


# circuits and gates
class IndexOutOfRange(ValidationError):
    pass


class DuplicateTarget(ValidationError):
    pass


class QubitCollision(ValidationError):
    pass


class ArityMismatch(ValidationError):
    pass


class ForwardClassicalReference(ValidationError):
    pass


class UnknownLabel(ValidationError):
    pass


# builder parameters
class InvalidParams(ValidationError):
    pass


class InvalidM(InvalidParams):
    pass


class InvalidP(InvalidParams):
    pass


class InvalidR(InvalidParams):
    pass


class InvalidN(InvalidParams):
    pass


class InvalidAlpha(InvalidParams):
    pass


class InvalidDims(InvalidParams):
    pass


class AdjacencyViolation(ValidationError):
    pass


# run time
class NumericalFailure(SimulationError):
    pass


class ZeroNormBranch(SimulationError):
    pass


class NegativeBeyondTolerance(SimulationError):
    pass
