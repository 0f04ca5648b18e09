"""Exception hierarchy shared by all modules.

Each class corresponds to one of the failure categories the command line
interface maps to a distinct exit code.  Library code raises these instead
of bare builtins so callers can tell a bad argument from a numerical
breakdown without parsing messages.
"""


class CopulaProcessError(Exception):
    """Base class for all errors raised by this package."""


class InvalidArgumentError(CopulaProcessError, ValueError):
    """An argument is out of range, malformed, or inconsistent."""


class UnsupportedOperationError(CopulaProcessError, TypeError):
    """The operation is not defined for the given object (e.g. a density
    query on a purely empirical family)."""


class NumericFailureError(CopulaProcessError, RuntimeError):
    """A numerical routine failed to produce a trustworthy result
    (factorization breakdown, non-finite intermediate, failed check)."""


class AssumptionViolatedError(CopulaProcessError, RuntimeError):
    """A mathematical hypothesis required by a bound does not hold for the
    supplied inputs (divergent integral, missing moment)."""
