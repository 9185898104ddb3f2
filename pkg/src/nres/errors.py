"""Exception hierarchy for nres."""


class NresError(Exception):
    """Base exception for nres errors."""

    pass


class ConfigurationError(NresError, ValueError):
    """Raised when a configuration or call precondition is invalid."""

    pass


class DimensionError(NresError, ValueError):
    """Raised when tensor shapes do not fit an operation."""

    pass


class ContractError(NresError, ValueError):
    """Raised when an API contract is violated by the caller."""

    pass


class TokenRangeError(NresError, IndexError):
    """Raised when a token id or target falls outside the vocabulary."""

    pass


class FormatError(NresError):
    """Raised when a checkpoint file cannot be decoded."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (at byte offset {offset})")
        self.offset = offset


class NumericError(NresError, ArithmeticError):
    """Raised when training produces a non-finite value."""

    pass


class MetricsParseError(NresError):
    """Raised when a metrics or run file is malformed."""

    def __init__(self, path: str, line: int, reason: str):
        super().__init__(f"{path}:{line}: {reason}")
        self.path = path
        self.line = line


class CorpusFetchError(NresError):
    """Raised when a remote corpus cannot be downloaded."""

    pass
