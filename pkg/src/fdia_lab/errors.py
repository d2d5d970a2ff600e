"""Exception types shared across the package.

The CLI maps these onto process exit codes: config 2, data 3, numerical 4.
"""


class FdiaLabError(Exception):
    """Base class for all package errors."""


class ConfigError(FdiaLabError):
    """Invalid configuration or parameter values."""


class DataError(FdiaLabError):
    """Malformed, missing, or insufficient input data."""


class DimensionError(DataError):
    """Operands with incompatible shapes."""


class NumericalError(FdiaLabError):
    """A numerical operation could not be completed reliably."""


class SingularMatrixError(NumericalError):
    """Linear solve aborted on a pivot below tolerance."""

    def __init__(self, column: int, pivot: float):
        self.column = column
        self.pivot = pivot
        super().__init__(
            f"matrix is singular to working tolerance: pivot in column {column} "
            f"has magnitude {abs(pivot):.3e}"
        )
