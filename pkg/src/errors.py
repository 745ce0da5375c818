"""
Exception hierarchy for band selection
"""
from typing import Optional


class BandSelectionError(Exception):
    """Base class for all errors raised by the band selection package"""


class InputValidationError(BandSelectionError, ValueError):
    """Input file, argument or configuration value is invalid"""

    def __init__(
        self,
        message: str,
        field: Optional[str] = None,
        row: Optional[int] = None
    ):
        super().__init__(message)
        self.field = field
        self.row = row


class CorruptInputError(InputValidationError):
    """A raw data file does not have the size its header declares"""

    def __init__(self, path: str, expected_bytes: int, actual_bytes: int):
        super().__init__(
            f"Raw file {path} is corrupt: expected {expected_bytes} bytes, "
            f"found {actual_bytes}",
            field="raw"
        )
        self.expected_bytes = expected_bytes
        self.actual_bytes = actual_bytes


class DegenerateDataError(BandSelectionError, ValueError):
    """Data is well-formed but carries no usable class signal"""
