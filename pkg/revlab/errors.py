"""
Exception hierarchy for the revenue lab.

Library code raises these; only the CLI turns them into exit codes
(2 for bad input, 3 for solver failures).
"""


class RevLabError(Exception):
    """Base class for every error raised by the package."""

    exit_code = 2


# =============================================================================
# Input errors (exit 2)
# =============================================================================

class InputError(RevLabError):
    exit_code = 2


class BadParamsError(InputError, ValueError):
    """Constructor or operation parameters out of their domain."""


class NoDensityError(InputError):
    """Operation needs a density but the distribution is purely atomic."""


class ZeroDensityError(InputError):
    """Virtual value requested where the density vanishes."""


class UnreachableError(InputError):
    """No t with H(t) = r exists because E[X] < r."""


class UnsupportedRepresentationError(InputError):
    pass


class QOutOfRangeError(InputError):
    """A menu entry allocates more than the cap lambda allows."""


class BadOrderingError(InputError):
    """Violated a <= b <= c or lambda1 <= lambda2."""


class DimMismatchError(InputError):
    pass


class SpecParseError(InputError):
    """Input file could not be parsed into a valid object."""


# =============================================================================
# Solver errors (exit 3)
# =============================================================================

class SolverError(RevLabError):
    exit_code = 3


class IterationLimitError(SolverError):
    pass


class DegenerateError(SolverError):
    """Numerical breakdown: tiny pivots or a solution failing verification."""


class InfeasibleError(SolverError):
    pass


class NumericalError(SolverError, ArithmeticError):
    """A numerical routine returned a non-finite or unusable result."""
