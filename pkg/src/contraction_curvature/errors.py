"""Exception and warning types."""


class DomainError(ValueError):
    """An argument lies outside the domain an operation is defined on."""


class ContractionError(DomainError):
    """The operator is not a contraction (norm exceeds 1 + tolerance)."""


class PreconditionError(DomainError):
    """A structural precondition (e.g. partial isometry) does not hold."""


class TruncationWarning(UserWarning):
    """An infinite-dimensional operator was compressed to a finite window."""


class ConvergenceWarning(UserWarning):
    """An iterative estimate stopped at its cap without meeting the stop rule."""
