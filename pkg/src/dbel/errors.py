"""Exception hierarchy shared by every module."""

from __future__ import annotations


class DbelError(Exception):
    """Base class for all errors raised by this package."""


class SampleError(DbelError, ValueError):
    """Invalid sample contents or shape."""


class CsvFormatError(SampleError):
    """Malformed CSV input.

    Parameters
    ----------
    message : str
        Human readable diagnostic.
    row, column : int, optional
        One-based location of the offending cell, when known.
    """

    def __init__(self, message: str, row: int | None = None, column: int | None = None):
        where = []
        if row is not None:
            where.append(f"row {row}")
        if column is not None:
            where.append(f"column {column}")
        text = f"{message} ({', '.join(where)})" if where else message
        super().__init__(text)
        self.row = row
        self.column = column


class EmptyFileError(CsvFormatError):
    pass


class RaggedRowError(CsvFormatError):
    pass


class NonNumericCellError(CsvFormatError):
    pass


class DimensionMismatchError(SampleError):
    pass


class ParameterError(DbelError, ValueError):
    """Invalid tuning parameter (delta, alpha, reps, ...)."""


class SampleTooSmallError(DbelError, ValueError):
    """The arm is too small for any DBEL window."""


class BudgetExceededError(DbelError):
    """Exact candidate enumeration would exceed the evaluation budget."""

    def __init__(self, required: float, allowed: int):
        super().__init__(
            f"exact enumeration needs about {required:.4g} statistic evaluations, "
            f"budget allows {allowed}; use approximate (multistart) mode"
        )
        self.required = required
        self.allowed = allowed


class CalibrationMismatchError(DbelError, ValueError):
    """A calibration table does not match the requested test configuration."""


class CorruptTableError(DbelError, ValueError):
    """Calibration file is unreadable, truncated or fails its checksum."""


class SchemaVersionError(CorruptTableError):
    pass


class SequentialError(DbelError, ValueError):
    """Misuse of the group-sequential state machine."""
