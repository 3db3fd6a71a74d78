"""Error types shared by every service.

Each error carries the process exit code the CLI reports for it:
0 success, 2 input/validation, 3 computation, 4 I/O.
"""

from typing import Optional


class CapgateError(Exception):
    exit_code = 1

    def __init__(self, detail: str, exit_code: Optional[int] = None):
        super().__init__(detail)
        self.detail = detail
        if exit_code is not None:
            self.exit_code = exit_code

    def __str__(self) -> str:
        return self.detail


class InvalidInputError(CapgateError, ValueError):
    exit_code = 2


class ZeroVarianceError(InvalidInputError):
    pass


class TiedSidesError(InvalidInputError):
    """Both specification sides attain the minimum; delta-method results do not apply."""


class SchemaError(InvalidInputError):
    def __init__(self, detail: str, line: Optional[int] = None, dimension_id: Optional[str] = None):
        location = []
        if dimension_id is not None:
            location.append(f"dimension {dimension_id!r}")
        if line is not None:
            location.append(f"line {line}")
        if location:
            detail = f"{detail} ({', '.join(location)})"
        super().__init__(detail)
        self.line = line
        self.dimension_id = dimension_id


class ComputationError(CapgateError):
    exit_code = 3


class CalibrationError(ComputationError):
    pass


class OutputError(CapgateError):
    exit_code = 4
