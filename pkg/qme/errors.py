#
# For licensing see accompanying LICENSE file.
#

class QMEError(Exception):
    """Base class of every error raised by the engine simulator."""


class SizeLimit(QMEError, ValueError):
    pass


class BadSite(QMEError, ValueError):
    pass


class NotHermitian(QMEError, ValueError):
    pass


class DomainError(QMEError, ValueError):
    pass


class BadStrength(QMEError, ValueError):
    pass


class UnsupportedSize(QMEError, ValueError):
    pass


class ShapeMismatch(QMEError, ValueError):
    pass


class NullBranch(QMEError, ValueError):
    pass


class SupportViolation(QMEError, ValueError):
    pass


class NumericalDrift(QMEError, ArithmeticError):
    pass


class SearchFailed(QMEError, RuntimeError):
    pass


class CrossCheckFailed(QMEError, RuntimeError):
    pass


class ParseError(QMEError, ValueError):
    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        if line is not None:
            message = f'{message} (line {line}, column {column})'
        super().__init__(message)


class ValidationError(QMEError, ValueError):
    def __init__(self, field, message):
        self.field = field
        super().__init__(f'{field}: {message}')
