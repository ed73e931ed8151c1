"""Exception hierarchy shared across the toolkit.

Every error raised on purpose derives from RipkitError so callers (and the
CLI) can distinguish toolkit failures from programming mistakes.
"""


class RipkitError(Exception):
    """Base class for all toolkit errors."""


class NonSymmetricError(RipkitError):
    """A matrix that must be symmetric is not, beyond tolerance."""


class NoConvergenceError(RipkitError):
    """An iterative eigensolver hit its sweep cap before converging."""


class PreconditionError(RipkitError, ValueError):
    """An operation's documented precondition is violated."""


class InvalidArityError(PreconditionError):
    """Requested support sizes do not fit the matrix dimensions."""


class OverlappingSupportsError(PreconditionError):
    """Two supports required to be disjoint share an index."""


class BudgetExceededError(RipkitError):
    """An exhaustive enumeration would exceed the evaluation budget.

    Raised before any work is done; `required` reports how many
    evaluations the enumeration would need.
    """

    def __init__(self, required: int, budget: int, what: str = "enumeration"):
        super().__init__(
            f"{what} needs {required} evaluations but the budget is {budget}"
        )
        self.required = required
        self.budget = budget


class InfeasibleError(RipkitError):
    """A recovery problem has no feasible point within tolerance."""


class MissingProfileEntryError(RipkitError, KeyError):
    """A profile lacks a requested constant and has no matrix to compute it."""


class VerificationError(RipkitError):
    """A construction failed one of its verification claims."""


class SoundnessError(RipkitError):
    """A proved error bound was violated by an actual solver run.

    This signals an implementation bug somewhere (constants, solver, or
    harness), never tolerable noise, so experiment runs fail loudly.
    """
