"""Exception hierarchy shared by every module of the package."""


class StreamPCAError(Exception):
    """Base class for all library errors."""


class InvalidMatrix(StreamPCAError, ValueError):
    pass


class NoConvergence(StreamPCAError, RuntimeError):
    pass


class ZeroVector(StreamPCAError, ValueError):
    pass


class InvalidSpectrum(StreamPCAError, ValueError):
    pass


class InsufficientSamples(StreamPCAError, ValueError):
    pass


class StreamIOError(StreamPCAError, OSError):
    pass


class ParseError(StreamPCAError, ValueError):
    def __init__(self, message, row=None):
        super().__init__(message)
        self.row = row


class EmptyStream(StreamPCAError, ValueError):
    pass


class InvalidSample(StreamPCAError, ValueError):
    pass


class DegenerateUpdate(StreamPCAError, ArithmeticError):
    pass


class InadmissibleSchedule(StreamPCAError, ValueError):
    pass


class DegenerateGap(StreamPCAError, ValueError):
    pass


class InsufficientData(StreamPCAError, ValueError):
    pass


class GridMismatch(StreamPCAError, ValueError):
    pass


class ConfigError(StreamPCAError, ValueError):
    """Invalid experiment configuration (maps to CLI exit code 2)."""
