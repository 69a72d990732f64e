"""Exception types mapped to command-line exit codes.

UsageError -> exit 1, DataError -> exit 2, NumericalError -> exit 3.
"""


class UsageError(Exception):
    """Bad flags, malformed config, or an unusable argument combination."""


class DataError(Exception):
    """Input data violates a precondition (missing values, degenerate columns,
    extrapolation requests, unparseable cells)."""


class NumericalError(Exception):
    """A computation failed: singular design, degenerate residual scale,
    singular information matrix."""
