"""Exception types shared across the package."""


class ValidationError(ValueError):
    """Input violates a documented precondition or invariant."""


class SizeLimitError(ValidationError):
    """Problem too large for an exhaustive routine."""


class NoSignalError(ValidationError):
    """A transcript contains no lexicon hits and smoothing is disabled."""


class ParseError(ValidationError):
    """Malformed input file. ``row`` is the 1-based line number when known."""

    def __init__(self, message, row=None, path=None):
        self.row = row
        self.path = path
        where = ""
        if path is not None:
            where += f"{path}: "
        if row is not None:
            where += f"row {row}: "
        super().__init__(where + message)


class SolverError(RuntimeError):
    """Iterative solver did not converge; carries its last diagnostics."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics
