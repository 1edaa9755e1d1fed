"""Exception hierarchy shared across the package.

The CLI maps these onto exit codes: usage errors are handled by argparse
(exit 1), ValidationError and subclasses exit 2, OSError exits 3.
"""


class CostlensError(Exception):
    """Base class for all errors raised by costlens."""


class ValidationError(CostlensError, ValueError):
    """Invalid values, shapes or parameters supplied by the caller."""


class DataFormatError(ValidationError):
    """A file exists and is readable but its content violates a format contract."""
