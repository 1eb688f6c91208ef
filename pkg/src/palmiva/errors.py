"""Exception hierarchy."""


class PalmIvaError(Exception):
    """Base class for all errors raised by the package."""


class DimensionError(PalmIvaError, ValueError):
    pass


class RankDeficiencyError(PalmIvaError, ValueError):
    pass


class DegenerateInputError(PalmIvaError, ValueError):
    pass


class ConfigError(PalmIvaError, ValueError):
    pass


class NumericalFailure(PalmIvaError, ArithmeticError):
    """Raised when an iterative solver hits a non-finite value or a failed
    linesearch. The partial trace is attached as ``trace``."""

    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = trace
