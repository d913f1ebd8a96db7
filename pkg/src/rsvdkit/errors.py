"""Exception types shared across the package."""


class ParseError(ValueError):
    """Malformed input file. Carries the 1-based line number when known."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class ConvergenceError(RuntimeError):
    """An iterative routine failed to reach its tolerance.

    ``residual`` holds the best value achieved (e.g. remaining off-diagonal
    mass for the eigensolver).
    """

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual
