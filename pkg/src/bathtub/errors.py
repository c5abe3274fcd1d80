"""Exception hierarchy.

Every error carries a ``category`` string that the command line front end
maps to a stable exit code.
"""

from __future__ import annotations


class BathtubError(Exception):
    category = "error"
    exit_code = 1


class ConfigurationError(BathtubError):
    """Bad input: malformed config, inconsistent meshes, CFL violation."""

    category = "configuration"
    exit_code = 2

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        self.line = line
        self.column = column
        if line is not None:
            message = f"{message} (line {line}, column {column})"
        super().__init__(message)


class MeshMismatchError(ConfigurationError):
    pass


class AssumptionViolation(BathtubError):
    category = "assumption-violation"
    exit_code = 3

    def __init__(self, message: str, assumption: str | None = None):
        self.assumption = assumption
        super().__init__(message if assumption is None else f"{assumption}: {message}")


class NonConvergenceError(BathtubError):
    category = "non-convergence"
    exit_code = 4

    def __init__(self, message: str, history: list[float]):
        self.history = list(history)
        super().__init__(message)


class InstabilityError(BathtubError):
    category = "instability"
    exit_code = 5


class DomainError(BathtubError, ValueError):
    category = "domain"
    exit_code = 6


EXIT_CODES = {
    cls.category: cls.exit_code
    for cls in (
        BathtubError,
        ConfigurationError,
        AssumptionViolation,
        NonConvergenceError,
        InstabilityError,
        DomainError,
    )
}
