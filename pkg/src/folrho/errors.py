class FolrhoError(Exception):
    """Base class for all errors raised by the package."""


class DimensionError(FolrhoError, ValueError):
    """Operands live on different tori, have different ranks or degrees."""


class NonvanishingError(FolrhoError):
    """A denominator could not be certified to stay away from zero."""


class QuadratureError(FolrhoError):
    """Periodic trapezoid refinement did not converge within the point cap."""

    def __init__(self, message, value=None, error=None):
        super().__init__(message)
        self.value = value
        self.error = error


class ValidationError(FolrhoError, ValueError):
    """Input data violates a structural precondition (malformed or inconsistent)."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class VerificationError(FolrhoError):
    """A numerical invariant check exceeded its tolerance.

    ``residual`` carries the offending value so callers can report it.
    """

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class ConvergenceError(FolrhoError):
    """A series evaluation failed to reach its requested accuracy."""
