"""Exception hierarchy.

Everything raised deliberately by this package derives from
:class:`EpClusterError`; the value-like errors also derive from
:class:`ValueError` so callers that only know the builtin still catch them.
"""


class EpClusterError(Exception):
    """Base class for package errors."""


class ShapeError(EpClusterError, ValueError):
    """Input array has the wrong shape."""


class DomainError(EpClusterError, ValueError):
    """A value lies outside its allowed domain (negative distance, bad index)."""


class EmptyInputError(EpClusterError, ValueError):
    """Nothing to work with: empty list, empty vocabulary, empty file."""


class AxiomViolation(EpClusterError, ValueError):
    """A matrix fails one of the ep-metric axioms.

    The offending :class:`~epcluster.epspace.Violation` is kept on
    ``self.violation``.
    """

    def __init__(self, violation):
        super().__init__(str(violation))
        self.violation = violation


class InsufficientPointsError(EpClusterError, ValueError):
    """Fewer points at finite distance than a k-count requires."""


class EnumerationLimitError(EpClusterError, RuntimeError):
    """A combinatorial enumeration exceeded its cap.

    ``partial`` holds whatever was produced before the cap was hit.
    """

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial


class ConfigError(EpClusterError, ValueError):
    """Incompatible or out-of-range run configuration."""


class NotSubcomplexError(EpClusterError, ValueError):
    """compare_pi0 was given a pair where the first is not contained in the second."""
