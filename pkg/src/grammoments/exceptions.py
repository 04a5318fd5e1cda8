"""Exception and warning types shared across the package."""


class GramMomentsError(Exception):
    """Base class for errors raised by this package."""


class SpectrumError(GramMomentsError, ValueError):
    """Invalid eigenvalue spectrum or ensemble dimensions."""


class SingularMatrixError(GramMomentsError, ArithmeticError):
    """A dense factorization hit an exactly zero pivot."""


class MomentOverflowError(GramMomentsError, OverflowError):
    """An intermediate quantity left the double precision range."""

    def __init__(self, message, p=None):
        super().__init__(message)
        self.p = p


class DegenerateMomentsError(GramMomentsError, ValueError):
    """Moments do not describe a nondegenerate positive distribution."""


class MissingMomentError(GramMomentsError, KeyError):
    """A moment order required by a fit is absent from the table."""


class QuadratureError(GramMomentsError, RuntimeError):
    """Adaptive quadrature failed to reach the requested tolerance."""

    def __init__(self, message, achieved=None):
        super().__init__(message)
        self.achieved = achieved


class SampleFormatError(GramMomentsError, ValueError):
    """A sample file could not be decoded."""


class InstabilityWarning(RuntimeWarning):
    """Emitted when a Vandermonde solve is too ill-conditioned to trust."""
