"""Exception hierarchy shared across the package."""

from __future__ import annotations


class NullveilError(Exception):
    """Base class for all errors raised by this package."""


class ParseError(NullveilError):
    """Malformed input text; carries a 1-based line/column position."""

    def __init__(self, message: str, line: int = 0, col: int = 0):
        self.line = line
        self.col = col
        if line:
            message = f"{line}:{col}: {message}"
        super().__init__(message)


class SemanticError(NullveilError):
    """Well-formed input that violates schema or typing rules."""


class AddressError(SemanticError):
    """A cell coordinate does not exist in the addressed instance."""


class InvalidChangeError(SemanticError):
    """A change set tries to null a cell that is already null."""


class CorrelationError(SemanticError):
    """Two instances are not tuple-id correlated null degradations."""


class UnsupportedRuleError(SemanticError):
    """A view or program shape the logic-program compiler cannot handle."""


class DialectError(SemanticError):
    """Unknown solver dialect requested for program export."""


class BoundExceededError(NullveilError):
    """A configurable enumeration/search bound was exceeded."""


class CrossCheckError(NullveilError):
    """Two independent computations of the same result disagree."""
