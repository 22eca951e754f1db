from __future__ import annotations


class ErgoscanError(Exception):
    """Base class for every error raised by ergoscan."""

    exit_code = 4


class ValidationFailed(ErgoscanError):
    exit_code = 3

    def __init__(self, message: str, field_path: str | None = None) -> None:
        self.field_path = field_path
        self.message = message
        super().__init__(f"{field_path}: {message}" if field_path else message)


class ParseFailed(ValidationFailed):
    def __init__(self, message: str, line: int, column: int) -> None:
        self.line = line
        self.column = column
        super().__init__(f"line {line}, column {column}: {message}")


class HorizonExceeded(ErgoscanError):
    def __init__(self, index: int, horizon: int) -> None:
        self.index = index
        self.horizon = horizon
        super().__init__(f"index {index} is beyond the declared horizon {horizon}")
