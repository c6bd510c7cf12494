"""Exception hierarchy shared across the toolkit.

ConfigError maps to CLI exit code 2 (bad flags / bad config), everything
else derived from TcrError maps to exit code 1 (runtime failure).
"""


class TcrError(Exception):
    """Base class for all toolkit errors."""


class ConfigError(TcrError):
    """Invalid configuration, hyperparameter or flag value."""


class InvalidInputError(TcrError):
    """Numerically invalid input (non-finite values, off-simplex vectors)."""


class ShapeError(TcrError):
    """Dimension mismatch between arrays that must agree."""


class DataError(TcrError):
    """Bad dataset content (labels out of range, empty dataset, bad ids)."""


class ParseError(DataError):
    """Malformed file; carries the offending line number when known."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class ContractError(TcrError):
    """Caller violated an internal API contract (e.g. stale backward cache)."""
