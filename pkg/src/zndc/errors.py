"""Exception hierarchy shared by all zndc modules."""


class ZndcError(Exception):
    """Base class for errors raised by this package."""


class DimensionError(ZndcError, ValueError):
    """Inconsistent matrix or pattern dimensions."""


class NumericalError(ZndcError, ArithmeticError):
    """A numerical routine failed to converge."""


class EnumerationLimitError(ZndcError):
    """An exhaustive search would exceed its configured budget."""


class ParseError(ZndcError, ValueError):
    """Malformed system file."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class SdpFailure(ZndcError):
    """An SDP subproblem did not reach an optimal solution."""

    def __init__(self, message, status=None, trace=None):
        super().__init__(message)
        self.status = status
        self.trace = trace if trace is not None else []
