"""Error taxonomy shared across the package.

Each class maps to a CLI exit code: validation problems exit 1,
computational precondition failures exit 2, window-limited verdicts exit 3.
"""


class ValidationError(ValueError):
    """Malformed input: bad degrees, non-square data, failed structure checks."""

    exit_code = 1


class DegreeWindowError(ValidationError):
    """A request would read or write outside the certified degree window."""


class PreconditionError(RuntimeError):
    """Input is well formed but a mathematical hypothesis fails."""

    exit_code = 2


class InconclusiveWindowError(RuntimeError):
    """The window is too small to certify the requested verdict."""

    exit_code = 3
