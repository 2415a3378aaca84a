class ClonerError(Exception):
    """Base class for everything this project raises on purpose."""


class StateError(ClonerError, ValueError):
    """A state or density matrix failed validation."""


class ParameterError(ClonerError, ValueError):
    """A model parameter (t, efficiencies, machine triple) is out of range."""


class NoDataError(ClonerError, ValueError):
    """A coincidence record has zero total counts."""


class DataError(ClonerError):
    """A record set or record file is incomplete or malformed."""


class ConfigError(ClonerError):
    """The run configuration could not be parsed or validated."""

    def __init__(self, message: str, field: str | None = None, line: int | None = None):
        self.field = field
        self.line = line
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field is not None:
            where.append(f"field '{field}'")
        if where:
            message = f"{', '.join(where)}: {message}"
        super().__init__(message)


class CalibrationBoundaryError(ClonerError):
    """The efficiency search ended on the edge of its domain (strict mode only)."""
