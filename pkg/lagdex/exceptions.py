"""Errors raised by lagdex.

Every error derives from `LagdexError`.  The three families below carry the
exit code used by the command line interface.
"""

from __future__ import annotations

from collections.abc import Iterable


class LagdexError(Exception):
    exit_code: int = 1


class ConfigError(LagdexError, ValueError):
    """Bad configuration or command line arguments."""

    exit_code = 2


class DataError(LagdexError, ValueError):
    """Input data cannot support the requested operation."""

    exit_code = 3


class NumericalError(LagdexError, ArithmeticError):
    """A fit could not be computed reliably."""

    exit_code = 4


# configuration


class UnknownSeries(ConfigError, KeyError):
    def __init__(self, name: str, known: Iterable[str] = ()):
        self.name = name
        self.known = sorted(known)
        msg = f"unknown series {name!r}"
        if self.known:
            msg += f" (known: {', '.join(self.known)})"
        super().__init__(msg)

    def __str__(self):
        # KeyError would otherwise repr() the message
        return self.args[0]


class DuplicateName(ConfigError):
    pass


class InvalidInterval(ConfigError):
    pass


# data


class ParseError(DataError):
    def __init__(self, message: str, line: int | None = None, path=None):
        self.line = line
        self.path = path
        where = ""
        if path is not None:
            where = f"{path}"
        if line is not None:
            where = f"{where}:{line}" if where else f"line {line}"
        super().__init__(f"{where}: {message}" if where else message)


class DuplicateMonth(DataError):
    def __init__(self, month, values: tuple[float, float], line: int | None = None):
        self.month = month
        self.values = values
        self.line = line
        msg = f"conflicting values {values[0]!r} and {values[1]!r} for {month}"
        if line is not None:
            msg = f"line {line}: {msg}"
        super().__init__(msg)


class EmptySeries(DataError):
    pass


class EmptyIntersection(DataError):
    pass


class InsufficientData(DataError):
    def __init__(self, message: str, available: int | None = None, required=None):
        self.available = available
        self.required = required
        super().__init__(message)


class InsufficientOverlap(DataError):
    def __init__(self, shortfalls: dict[str, int], required: int):
        self.shortfalls = dict(shortfalls)
        self.required = required
        detail = ", ".join(f"{k} ({v} months)" for k, v in self.shortfalls.items())
        super().__init__(
            f"overlap with the target shorter than {required} months: {detail}"
        )


class SourceLoadError(DataError):
    """One or more configured sources failed to load."""

    def __init__(self, errors: dict[str, Exception]):
        self.errors = dict(errors)
        lines = [f"  {name}: {err}" for name, err in self.errors.items()]
        super().__init__("failed to load sources:\n" + "\n".join(lines))


class NetworkError(DataError, ConnectionError):
    pass


class HttpStatusError(DataError):
    def __init__(self, status: int, message: str = ""):
        self.status = status
        super().__init__(f"HTTP {status} {message}".strip())


class SchemaError(DataError):
    pass


class RateLimited(DataError):
    def __init__(self, retry_after: float | None = None):
        self.retry_after = retry_after
        msg = "rate limited by remote endpoint"
        if retry_after is not None:
            msg += f", retry after {retry_after:g} s"
        super().__init__(msg)


# numerical


class RankDeficient(NumericalError):
    def __init__(self, columns: Iterable[str], condition: float):
        self.columns = list(columns)
        self.condition = condition
        super().__init__(
            f"design matrix is rank deficient (condition {condition:.3g}); "
            f"collinear columns: {', '.join(self.columns)}"
        )


class NoFeasibleModel(NumericalError):
    pass
