"""Exception hierarchy.

CLI exit codes are attached to the three top-level families:
``ConfigError`` -> 1, ``DataError`` -> 2, ``NumericalError`` -> 3.
"""

from __future__ import annotations


class BinnetError(Exception):
    exit_code = 1


class ConfigError(BinnetError, ValueError):
    exit_code = 1


class DataError(BinnetError, ValueError):
    exit_code = 2


class NumericalError(BinnetError, ArithmeticError):
    exit_code = 3


# -- data errors ------------------------------------------------------------

class InvalidProportions(DataError):
    pass


class InvalidCounts(DataError):
    pass


class ZeroSample(DataError):
    pass


class InvalidProbability(ConfigError):
    pass


class IndexOutOfRange(DataError, IndexError):
    pass


class SamePair(DataError):
    pass


class UnsupportedKind(ConfigError):
    pass


class EmptyInput(DataError):
    pass


class AllColumnsDropped(DataError):
    pass


class IoFailure(DataError, OSError):
    def __init__(self, path, reason: str):
        self.path = str(path)
        super().__init__(f"{self.path}: {reason}")


class ParseError(DataError):
    """Malformed input; ``line`` is 1-based, ``column`` is 1-based or None."""

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        self.line = line
        self.column = column
        where = ""
        if line is not None:
            where = f"line {line}"
            if column is not None:
                where += f", column {column}"
            where += ": "
        super().__init__(where + message)


class ConstantResponse(DataError):
    pass


# -- numerical errors -------------------------------------------------------

class RankDeficient(NumericalError):
    def __init__(self, columns, message: str | None = None):
        self.columns = tuple(sorted(columns))
        super().__init__(message or f"collinear predictor columns {list(self.columns)}")


class NoConvergence(NumericalError):
    def __init__(self, iterations: int):
        self.iterations = iterations
        super().__init__(f"IRLS did not converge in {iterations} iterations")


class NonFinite(NumericalError):
    pass
