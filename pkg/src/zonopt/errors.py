"""Exception types shared across the package."""


class ZonoptError(Exception):
    """Base class for package-specific errors."""


class ParseError(ZonoptError, ValueError):
    """Malformed network or query file.

    Carries the 1-based line number of the offending line when known.
    """

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class DegenerateSplitError(ZonoptError, RuntimeError):
    """A set with zero extent in every splittable direction cannot be split."""


class SolverFailureError(ZonoptError, RuntimeError):
    """Numerical breakdown inside a subsolver.

    Distinct from an infeasible or unbounded outcome, which are ordinary
    results reported through the solution status.
    """


class InternalSolverError(ZonoptError, RuntimeError):
    """Invariant violation inside the branch-and-bound engine.

    Raised when the queue empties while the optimality gap is still open,
    which can only happen if some bound was unsound.
    """
