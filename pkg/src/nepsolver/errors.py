"""Exception hierarchy shared by all nepsolver modules."""


class NepSolverError(Exception):
    """Base class for all errors raised by this package."""


class DimensionMismatch(NepSolverError):
    pass


class SingularMatrix(NepSolverError):
    pass


class NoConvergence(NepSolverError):
    pass


class OutsideRadius(NepSolverError):
    """Evaluation point lies outside the convergence radius of a scalar family."""


class BranchCut(NepSolverError):
    """Shift places a square-root branch point at or around the expansion point."""


class ParseError(NepSolverError):
    pass


class Breakdown(NepSolverError):
    """Serious breakdown of the two-sided recurrence (omega ~ 0 with r, s != 0).

    Carries whatever partial results were available at the time.
    """

    def __init__(self, message, state=None, triplets=None, history=None):
        super().__init__(message)
        self.state = state
        self.triplets = triplets
        self.history = history


class LuckyBreakdown(NepSolverError):
    """Arnoldi found an invariant subspace (new basis vector vanished)."""


class InvariantViolation(NepSolverError):
    """A non-finite entry appeared where the algorithm guarantees finiteness."""


class DegenerateDerivative(NepSolverError):
    """y* M'(lambda) x vanished; condition number is undefined."""
