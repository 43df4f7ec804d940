"""Failure modes that map onto process exit codes in the harness."""


class InvariantViolation(AssertionError):
    """An exact identity or zero-tolerance check failed."""


class BudgetExceeded(RuntimeError):
    """A work estimate passed its configured ceiling before starting."""
