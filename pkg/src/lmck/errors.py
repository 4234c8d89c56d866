"""Exception hierarchy shared by the library and the CLI.

Each class carries the process exit code the CLI maps it to.
"""


class LmckError(Exception):
    exit_code = 1


class ValidationError(LmckError, ValueError):
    """Bad input: out-of-range ids, malformed parameters, unsorted tuples."""

    exit_code = 2


class ParseError(ValidationError):
    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class ResourceBudgetError(LmckError):
    """A dense computation would exceed its configured budget."""

    exit_code = 3


class InvariantError(LmckError, AssertionError):
    """An internal consistency check failed."""

    exit_code = 4
