"""Exception hierarchy shared by the analysis services and the CLI."""
from typing import Optional


class LCAError(Exception):
    """Base class for all errors raised by this package."""


class AnalysisError(LCAError):
    """A hard analysis failure (CLI exit code 1)."""


class NotConfinedError(AnalysisError):
    """Counting was requested for a rule whose fixed-point sets are infinite."""


class ConsistencyError(AnalysisError):
    """Two independent computations disagreed; indicates an implementation bug."""


class SearchExhaustedError(AnalysisError):
    """A bounded randomized search ran out of attempts."""


class RuleSpecError(LCAError, ValueError):
    """Invalid rule file or CLI input (CLI exit code 2)."""


class RuleParseError(RuleSpecError):
    """Syntax error in a rule entry, with the position of the offending token."""

    def __init__(
        self,
        message: str,
        line: int,
        column: int,
        token: str,
        where: Optional[str] = None,
    ):
        self.message = message
        self.line = line
        self.column = column
        self.token = token
        self.where = where
        prefix = f"{where}: " if where else ""
        super().__init__(
            f"{prefix}line {line}, column {column}: {message} near '{token}'"
        )
