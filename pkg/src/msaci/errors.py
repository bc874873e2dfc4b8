"""Exception hierarchy. Each family maps to one CLI exit code."""


class MsaciError(Exception):
    exit_code = 1


class ConfigError(MsaciError, ValueError):
    exit_code = 2


class DataError(MsaciError, ValueError):
    exit_code = 3


class SchemaError(DataError):
    pass


class ContinuityError(DataError):
    pass


class ParseError(DataError):
    def __init__(self, message: str, row: int | None = None):
        super().__init__(message)
        self.row = row


class InsufficientDataError(DataError):
    pass


class NumericalError(MsaciError, ArithmeticError):
    exit_code = 4


class RankDeficientError(NumericalError):
    pass


class DefinednessError(NumericalError, ValueError):
    """Significance level too small for the order statistics to exist."""

    def __init__(self, message: str, step: int | None = None):
        super().__init__(message)
        self.step = step
