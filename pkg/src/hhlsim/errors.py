"""Exception hierarchy shared across the package."""


class HhlError(Exception):
    """Base class for all package errors."""


class DomainError(HhlError, ValueError):
    """An argument is outside the domain of the operation (bad index, range, ...)."""


class ValidationError(HhlError, ValueError):
    """An input object violates a structural requirement (non-unitary, non-Hermitian, ...)."""


class ImpossibleOutcomeError(HhlError, RuntimeError):
    """Post-selection on a zero-probability branch."""


class CompileError(HhlError, ValueError):
    """A circuit contains a gate the compiler cannot lower to the CNOT + 1-qubit basis."""


class ConstraintError(HhlError, ValueError):
    """A random-problem builder cannot satisfy the requested constraints."""


class NotReducibleError(HhlError, RuntimeError):
    """The hybrid solver could not certify a reduced encoding within the restart policy.

    Carries the last eigenvalue estimate so callers can inspect what was seen.
    """

    def __init__(self, message, estimate=None):
        super().__init__(message)
        self.estimate = estimate
