"""Exception types shared across the toolkit."""

from __future__ import annotations


class TransauditError(Exception):
    """Base class for all toolkit errors."""


# --- corpus ingestion ---------------------------------------------------


class MalformedLineError(TransauditError):
    def __init__(self, line_no: int, message: str = "unparseable JSON"):
        self.line_no = line_no
        super().__init__(f"line {line_no}: {message}")


class DuplicateKeyError(TransauditError):
    def __init__(self, key):
        self.key = key
        super().__init__(f"duplicate item key: {key}")


class MissingKeyFieldError(TransauditError):
    def __init__(self, line_no: int, field: str):
        self.line_no = line_no
        self.field = field
        super().__init__(f"line {line_no}: missing key field {field!r}")


class UnknownDatasetError(TransauditError):
    pass


class SchemaViolationError(TransauditError):
    pass


class IoFailureError(TransauditError):
    pass


# --- audit ---------------------------------------------------------------


class SchemaMismatchError(TransauditError):
    pass


class DomainError(TransauditError):
    pass


# --- repair --------------------------------------------------------------


class UnknownFieldError(TransauditError):
    pass


class FragmentCountMismatchError(TransauditError):
    def __init__(self, expected: int, got: int):
        self.expected = expected
        self.got = got
        super().__init__(f"expected {expected} fragments, got {got}")


class UnescapeError(TransauditError):
    pass


class EngineError(TransauditError):
    pass


class EngineUnavailableError(EngineError):
    pass


class AuthFailureError(EngineError):
    pass


class LineageError(TransauditError):
    pass


class WriteConflictError(TransauditError):
    pass


class PrefixStripFailureError(TransauditError):
    pass


# --- score analysis ------------------------------------------------------


class ScoreOutOfRangeError(TransauditError):
    pass


class DuplicateScoreError(TransauditError):
    pass


class LengthMismatchError(TransauditError):
    pass


class DegenerateInputError(TransauditError):
    pass


class InsufficientDataError(TransauditError):
    pass


class DimensionMismatchError(TransauditError):
    pass


class UnsupportedKError(TransauditError):
    pass


class ModeMismatchError(TransauditError):
    pass


# --- judge pipeline ------------------------------------------------------


class KeyMismatchError(TransauditError):
    pass


class MissingSourceError(TransauditError):
    pass


class JudgeRunError(TransauditError):
    """Raised when more than the tolerated fraction of annotator calls fail."""


# --- rendering / cli -----------------------------------------------------


class EmptyInputError(TransauditError):
    pass


class ConfigError(TransauditError):
    pass
