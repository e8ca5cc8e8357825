"""Exception types shared across the package."""


class SmoothTrackError(Exception):
    """Base class for all library errors."""


class DimensionError(SmoothTrackError, ValueError):
    """A vector or sequence has the wrong shape for the problem dimension."""


class ProtocolError(SmoothTrackError, RuntimeError):
    """A policy violated the information-revelation contract, or emitted an
    action outside the allowed domain."""


class SolverError(SmoothTrackError, RuntimeError):
    """An iterative solve did not converge within its iteration budget."""

    def __init__(self, message: str, gradient_norm: float | None = None,
                 iterations: int | None = None):
        super().__init__(message)
        self.gradient_norm = gradient_norm
        self.iterations = iterations


class OracleError(SmoothTrackError, ValueError):
    """A brute-force oracle was asked for a problem outside its scope."""


class TraceFormatError(SmoothTrackError, ValueError):
    """A trace or predictions file does not match the documented schema."""

    def __init__(self, message: str, line: int | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class ConfigError(SmoothTrackError, ValueError):
    """An experiment configuration failed validation; the message carries the
    offending field path."""
