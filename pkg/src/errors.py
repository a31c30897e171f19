"""
Exception hierarchy shared by the library and the CLI.
"""

from typing import Optional


class FracRBError(Exception):
    """Base class for every error raised by this package."""


class DomainError(FracRBError, ValueError):
    """A parameter lies outside the domain of an operation."""

    def __init__(self, parameter: str, value: object, expected: str) -> None:
        self.parameter = parameter
        self.value = value
        self.expected = expected
        super().__init__(f"{parameter}={value!r} is invalid: expected {expected}")


class DimensionError(FracRBError, ValueError):
    pass


class FormatError(FracRBError, ValueError):
    """Malformed input file (Matrix Market or run config)."""

    def __init__(self, source: str, message: str, line: Optional[int] = None) -> None:
        self.source = source
        self.line = line
        where = f"{source}:{line}" if line is not None else source
        super().__init__(f"{where}: {message}")


class ConvergenceError(FracRBError, RuntimeError):
    """An iterative method stopped without meeting its tolerance."""

    def __init__(
        self,
        method: str,
        iterations: int,
        residual: float,
        shift: Optional[float] = None,
    ) -> None:
        self.method = method
        self.iterations = iterations
        self.residual = residual
        self.shift = shift
        message = f"{method} did not converge after {iterations} iterations (residual {residual:.3e})"
        if shift is not None:
            message += f" for t={shift!r}"
        super().__init__(message)

    def with_shift(self, shift: float) -> "ConvergenceError":
        return ConvergenceError(self.method, self.iterations, self.residual, shift)


class FactorizationError(FracRBError, RuntimeError):
    pass


class BasisMismatchError(FracRBError, ValueError):
    """A reduced basis was applied to a vector it was not built from."""


class InsufficientDataError(FracRBError, ValueError):
    pass


EXIT_OK = 0
EXIT_VERIFY_FAILED = 1
EXIT_USAGE = 2
EXIT_NUMERICAL = 3


def exit_code_for(exc: BaseException) -> int:
    """Input errors raised by this package and unreadable files map to EXIT_USAGE."""
    if isinstance(exc, (ConvergenceError, FactorizationError)):
        return EXIT_NUMERICAL
    if isinstance(exc, (FracRBError, OSError)):
        return EXIT_USAGE
    return EXIT_NUMERICAL
