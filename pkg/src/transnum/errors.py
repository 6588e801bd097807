"""Exception hierarchy shared across the package.

Split by how the CLI should exit: bad user input (ValidationError),
mathematically ill-posed requests (PreconditionError), and resource caps
(SearchBudgetExceeded, a PreconditionError subclass so callers can treat it
as "the question was too big" rather than "the code broke").
"""

from __future__ import annotations


class TransnumError(Exception):
    """Base class for all package-specific errors."""


class ValidationError(TransnumError):
    """Malformed configuration, bad argument types, inconsistent shapes."""


class PreconditionError(TransnumError):
    """Input is well-formed but violates a mathematical precondition."""


class ClassNotPreserved(PreconditionError):
    """The map's matrix part does not fix the requested cohomology class."""


class DimensionMismatch(ValidationError):
    """Operands live on tori of different dimensions."""


class NotPeriodicError(PreconditionError):
    """A point declared periodic does not return within tolerance."""


class NonIntegerFiberError(PreconditionError):
    """Periodic-orbit fiber displacement is not an integer for an integer fiber."""


class NonzeroEulerNumber(PreconditionError):
    """Fiber-class construction requires Euler number zero; carries the sum."""

    def __init__(self, euler_number):
        self.euler_number = euler_number
        super().__init__(
            f"fiber class requires Euler number 0, got {euler_number} "
            f"(sum of beta_j/alpha_j must vanish)"
        )


class SearchBudgetExceeded(PreconditionError):
    """A bounded search (BFS ball, sweep grid) exceeded its configured cap."""


class CertificateUnavailable(PreconditionError):
    """Certified seminorm mode requested without Lipschitz data."""
