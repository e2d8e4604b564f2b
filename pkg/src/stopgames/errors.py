"""Exception types shared across the package."""

from __future__ import annotations


class GameSpecError(ValueError):
    """Invalid input: malformed tree, payoff field, strategy, or game file."""


class SolverDefectError(RuntimeError):
    """An internal consistency certificate failed; solver output is not trustworthy."""


class EnumerationCapError(RuntimeError):
    """The requested exhaustive enumeration exceeds the configured profile cap."""

    def __init__(self, count: int, cap: int):
        self.count = count
        self.cap = cap
        super().__init__(f"enumeration needs {count} profiles, cap is {cap}")
