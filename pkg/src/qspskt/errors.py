"""Exception hierarchy shared by all modules."""


class QSPError(Exception):
    """Base class for all package errors."""


class DomainError(QSPError, ValueError):
    """Argument outside the mathematical domain (e.g. |x| > 1)."""


class NormalizationError(QSPError, ValueError):
    """A rotation axis that is not a unit vector."""


class UnitarityError(QSPError, ValueError):
    """A matrix that should be special-unitary is not."""


class PreconditionError(QSPError, ValueError):
    """Inputs violate a documented precondition (parity, norms, ...)."""


class StructureError(QSPError, ValueError):
    """A protocol lacks the required symmetric/planar structure.

    ``deviation`` carries the measured violation.
    """

    def __init__(self, message, deviation=None):
        super().__init__(message)
        self.deviation = deviation


class InconsistencyError(QSPError):
    """Sampled data is not consistent with the assumed polynomial model."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class CoverageError(QSPError):
    """A net fails to cover its sample set at the requested radius."""

    def __init__(self, message, worst_sample=None, worst_distance=None):
        super().__init__(message)
        self.worst_sample = worst_sample
        self.worst_distance = worst_distance


class ConvergenceError(QSPError):
    """An iterative method missed its tolerance. ``best`` holds the best result."""

    def __init__(self, message, best=None, residual=None):
        super().__init__(message)
        self.best = best
        self.residual = residual


class RefinementError(QSPError):
    """Pre-image search failed for a sampled target."""

    def __init__(self, message, target=None, residual=None):
        super().__init__(message)
        self.target = target
        self.residual = residual


class ParseError(QSPError, ValueError):
    """Malformed serialized input."""
