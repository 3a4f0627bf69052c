"""Exception hierarchy shared by every module of the package."""

from __future__ import annotations


class QubitPltError(Exception):
    """Base class for all errors raised by :mod:`qubitplt`."""


class ParamOutOfRange(QubitPltError, ValueError):
    """A family parameter lies outside its validity region."""


class InvalidState(QubitPltError, ValueError):
    """Input is not an acceptable density matrix.

    ``residual`` carries the offending measured quantity (asymmetry or
    most-negative eigenvalue) so callers can report it.
    """

    def __init__(self, message: str, residual: float = float("nan")):
        super().__init__(message)
        self.residual = residual


class NonHermitianInput(InvalidState):
    pass


class NotADensityMatrix(InvalidState):
    pass


class NonUnitaryInput(QubitPltError, ValueError):
    pass


class NonRealCoefficient(InvalidState):
    pass


class NumericalFailure(QubitPltError, ArithmeticError):
    """Base class for failures of the numerics rather than of the input."""


class ConvergenceFailure(NumericalFailure):
    pass


class EigenvaluePositivityViolation(NumericalFailure):
    """B has an eigenvalue outside the declared noise window.

    For physical states this cannot happen, so it points to either a bad
    input or a solver failure.
    """


class NoSignChange(QubitPltError, ValueError):
    pass
