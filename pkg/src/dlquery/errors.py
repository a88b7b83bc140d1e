"""Exception hierarchy shared by all modules.

The CLI maps each family onto a distinct exit status, so callers can tell a
malformed document from an unsupported construct or an exhausted budget.
"""

from __future__ import annotations


class DLQueryError(Exception):
    """Base class for all errors raised by the package."""


class ParseError(DLQueryError):
    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        self.line = line
        self.column = column
        where = f"line {line}, column {column}: " if line is not None else ""
        super().__init__(where + message)


class SignatureError(ParseError):
    """A name or variable is used in two different sorts."""


class UnsupportedConstruct(DLQueryError):
    def __init__(self, construct: str, detail: str = ""):
        self.construct = construct
        msg = f"unsupported construct: {construct}"
        super().__init__(msg + (f" ({detail})" if detail else ""))


class SimplicityError(DLQueryError):
    """A number restriction uses a non-simple role."""

    def __init__(self, violations: list):
        self.violations = violations
        super().__init__("; ".join(str(v) for v in violations))


class InconsistentOntology(DLQueryError):
    pass


class ResourceLimit(DLQueryError):
    """A configured budget (tableau nodes, mappings) was exceeded."""
