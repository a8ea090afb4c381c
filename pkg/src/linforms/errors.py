"""Exception hierarchy shared by all modules.

The CLI maps these onto its exit-code contract: validation errors exit 2,
budget errors exit 3, numeric failures exit 4.
"""


class LinformsError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(LinformsError, ValueError):
    """Bad parameters, malformed input files, or violated preconditions."""


class DimensionError(ValidationError):
    """Mismatched vector/matrix dimensions."""


class BudgetError(LinformsError, RuntimeError):
    """A computation would exceed its configured work budget."""


class NumericError(LinformsError, ArithmeticError):
    """A numeric sanity check failed (result out of tolerance)."""
