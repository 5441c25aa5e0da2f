"""Exception hierarchy.

Everything a caller can fix by changing its inputs derives from
``ValidationError`` (and ``ValueError``); the CLI maps those to exit code 2.
"""


class QuranQAError(Exception):
    pass


class ValidationError(QuranQAError, ValueError):
    pass


class EmptyField(ValidationError):
    pass


class BadFraction(ValidationError):
    pass


class ParseError(ValidationError):
    def __init__(self, message, lineno=None):
        if lineno is not None:
            message = f"line {lineno}: {message}"
        super().__init__(message)
        self.lineno = lineno


class SchemaError(ValidationError):
    pass


class OffsetMismatch(ValidationError):
    def __init__(self, pq_id, message):
        super().__init__(f"{pq_id}: {message}")
        self.pq_id = pq_id


class DuplicateId(ValidationError):
    pass


class RunValidationError(ValidationError):
    pass


class UnknownId(ValidationError):
    pass


class EmptyDataset(ValidationError):
    pass


class MissingStats(ValidationError):
    pass


class LengthMismatch(ValidationError):
    pass


class AllMasked(ValidationError):
    pass


class NoValidSpan(ValidationError):
    pass


class OutOfRange(ValidationError, IndexError):
    pass


class ZeroVector(ValidationError):
    pass


class DimensionMismatch(ValidationError):
    pass
