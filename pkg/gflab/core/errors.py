# core/errors.py
from typing import Optional


class LabError(Exception):
    """Base class for every error raised by gflab."""


class InvalidProjectionError(LabError, ValueError):
    """Matrix is not Hermitian, idempotent or finite within tolerance."""


class EmptySpanError(LabError, ValueError):
    pass


class DimensionMismatchError(LabError, ValueError):
    pass


class GridMismatchError(LabError, ValueError):
    pass


class NegativeTimeError(LabError, ValueError):
    pass


class AnnihilatedStateError(LabError, ValueError):
    pass


class TrajectoryError(LabError, ValueError):
    pass


class NotAProjectionError(LabError, ValueError):
    pass


class NotStrictlyLocalError(LabError):
    pass


class LocalityLimitError(LabError):
    """Brute-force locality analysis requested on too large a matrix."""


class ConfigError(LabError):
    """Malformed scenario configuration; carries the offending field and line."""

    def __init__(self, message: str, field: Optional[str] = None, line: Optional[int] = None):
        self.message = message
        self.field = field
        self.line = line
        location = []
        if field:
            location.append(f"field '{field}'")
        if line is not None:
            location.append(f"line {line}")
        prefix = f"{', '.join(location)}: " if location else ""
        super().__init__(f"{prefix}{message}")
