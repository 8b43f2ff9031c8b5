"""Exception hierarchy.

Domain errors (bad input, failed regularity, violated hypotheses) and
numerical errors (a computation that could not be resolved to the required
precision) are kept apart so callers, and the CLI, can tell them apart.
"""


class FloerkitError(Exception):
    """Base class for every error raised by this package."""


class DomainError(FloerkitError, ValueError):
    """Input violates a precondition of the operation."""


class ValidationError(DomainError):
    pass


class DimensionError(ValidationError):
    pass


class DegenerateEndpointError(DomainError):
    """An asymptote is not invertible; regularize with ``delta_regularize``."""


class RegularityError(DomainError):
    """A matrix pair is not regular.

    ``clause`` names the failed condition: ``"injective"``, ``"invariant"``
    or ``"invertible"``.
    """

    def __init__(self, message, clause):
        super().__init__(message)
        self.clause = clause


class PreconditionError(DomainError):
    pass


class HypothesisError(DomainError):
    """A smallness hypothesis of an a-priori bound is violated."""


class DataError(DomainError):
    """Index data needed by the requested formula is missing."""


class UndeterminedError(DomainError):
    """The action/degree argument does not determine the homology.

    ``candidates`` carries the offending index pairs.
    """

    def __init__(self, message, candidates):
        super().__init__(message)
        self.candidates = candidates


class NumericalError(FloerkitError, RuntimeError):
    """A numerical procedure failed to reach the required resolution."""


class IntegrationError(NumericalError):
    pass


class ResolutionError(NumericalError):
    pass


class SweepError(NumericalError):
    pass


class CountUnreliableError(NumericalError):
    pass


class SearchError(NumericalError):
    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class ConsistencyError(DomainError):
    """A boundary operator does not square to zero; ``witness`` names a generator."""

    def __init__(self, message, witness):
        super().__init__(message)
        self.witness = witness
