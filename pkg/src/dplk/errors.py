"""Exception types shared across the package."""


class DplkError(Exception):
    """Base class for all errors raised by this package."""


class StructureSyntaxError(DplkError):
    """Malformed structure file.  Carries the 1-based line and column."""

    def __init__(self, message, line, column=1):
        super().__init__(f"line {line}, col {column}: {message}")
        self.line = line
        self.column = column


class FormulaSyntaxError(DplkError):
    """Malformed formula text.  Carries the 0-based character offset."""

    def __init__(self, message, position):
        super().__init__(f"at position {position}: {message}")
        self.position = position


class InvariantViolation(DplkError):
    """A structure or derived object violates one of its invariants."""


class VocabularyMismatch(DplkError):
    """Two objects were combined whose vocabulary shapes disagree."""


class BudgetExceeded(DplkError):
    """A blow-up guard refused to expand a formula or enumeration.

    ``guard`` names the exceeded guard and ``details`` holds the offending
    parameters, so callers (notably the CLI) can report exactly what refused.
    """

    def __init__(self, guard, details):
        self.guard = guard
        self.details = dict(details)
        pretty = ", ".join(f"{k}={v}" for k, v in sorted(self.details.items()))
        super().__init__(f"{guard} guard exceeded ({pretty})")
