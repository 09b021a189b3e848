"""Exception hierarchy shared by all modules.

Errors that signal a violated precondition (bad input, unusable operator,
grid too coarse) derive from PreconditionError; the CLI maps those to exit
code 2.  Errors that signal a numerical failure inside an algorithm that
should have succeeded derive from NumericalError and map to exit code 1.
"""


class DichotomyError(Exception):
    """Base class for all library errors."""


class PreconditionError(DichotomyError):
    """A documented precondition of an operation was violated."""


class NumericalError(DichotomyError):
    """An internal numerical procedure failed to converge or certify."""


class LatticeError(PreconditionError):
    """Frequency or shift does not lie on the grid lattice."""


class NyquistError(PreconditionError):
    """Requested frequency at or beyond the grid Nyquist limit."""


class ParameterError(PreconditionError):
    """Scalar argument outside its admissible range."""


class SingularResolventError(PreconditionError):
    """Resolvent requested too close to an eigenvalue."""


class SpectrumOnAxisError(PreconditionError):
    """The generator has spectrum on (or too close to) the imaginary axis."""


class NotHyperbolicError(PreconditionError):
    """The time-one operator has spectrum on (or too close to) the unit circle."""


class PeriodTooShortError(PreconditionError):
    """Grid period cannot hold the truncated kernel; message carries the minimum."""


class ResolutionError(PreconditionError):
    """Grid resolution insufficient for the requested computation."""


class SpectrumMismatchError(PreconditionError):
    """Input spectrum not contained in the requested frequency band."""


class SpectrumOnContourError(PreconditionError):
    """An eigenvalue sits on (or too close to) the requested frequency band."""


class ScenarioError(PreconditionError):
    """Scenario document failed validation; message carries the field path."""


class QuadratureError(NumericalError):
    """Adaptive quadrature failed to converge."""


class ContractionViolationError(NumericalError):
    """Fixed-point iteration failed although the contraction certificate held."""
