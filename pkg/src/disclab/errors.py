"""Exception types shared across the package.

The CLI maps these to exit codes: usage errors exit 2, resource-budget
errors exit 3, failed assertions exit 1.
"""


class DomainError(ValueError):
    """An argument violates a documented precondition or invariant."""


class ResourceLimitError(RuntimeError):
    """An exhaustive computation would exceed its configured work budget."""


class ParseError(ValueError):
    """A matrix or point-set file is malformed.

    Carries the 1-based line number when known.
    """

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line
