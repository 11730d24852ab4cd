"""Exception hierarchy shared by the library and the command line."""


class SpikeCountError(Exception):
    """Base class for every error raised by spikecount."""


class DomainError(SpikeCountError, ValueError):
    """An argument lies outside the mathematical domain of a function."""


class InputError(SpikeCountError, ValueError):
    """User supplied data could not be parsed or is not finite."""

    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        if line is not None:
            where = f"line {line}" + (f", column {column}" if column is not None else "")
            message = f"{where}: {message}"
        super().__init__(message)


class ConfigurationError(SpikeCountError, ValueError):
    """Settings are inconsistent with the problem size or each other."""


class AggregationError(SpikeCountError, ValueError):
    """Summary statistics were requested over an empty or mismatched sample."""


class NumericalError(SpikeCountError, ArithmeticError):
    """An internal numerical routine failed to produce a usable result."""
