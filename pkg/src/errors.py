"""
Error types shared across the credal minimax toolkit.

Every error is a ``ValueError`` so callers that only care about bad input
can keep catching that.
"""

from typing import List, Optional


class CredalError(ValueError):
    """Base class for all toolkit errors."""


class InvalidDistributionError(CredalError):
    """A probability table is negative somewhere or does not sum to 1."""


class DimensionMismatchError(CredalError):
    """Two objects live on different spaces (or differently shaped ones)."""


class ShapeMismatchError(CredalError):
    """Loss table, decision rule and distribution shapes disagree."""


class EmptyConditionedSetError(CredalError):
    """Every vertex gives the conditioning event probability zero."""


class UnreachableObservationError(CredalError):
    """An observation has probability zero under every vertex."""


class MalformedLinearProgramError(CredalError):
    """Row lengths, relations or variable indices are inconsistent."""


class CertificateError(CredalError):
    """An exact certificate recheck failed."""

    def __init__(self, issues: List[str]):
        self.issues = issues
        super().__init__("certificate check failed: " + "; ".join(issues))


class SizeBoundExceededError(CredalError):
    """An enumeration would exceed its configured bound."""


class DomainMismatchError(CredalError):
    """Two update rules are not defined for the same set and observations."""


class UnknownScenarioError(CredalError):
    """No builtin scenario with the requested name."""


class ScenarioParseError(CredalError):
    """The scenario document could not be parsed."""

    def __init__(self, message: str, line: Optional[int] = None,
                 column: Optional[int] = None, field: Optional[str] = None):
        self.line = line
        self.column = column
        self.field = field
        where = []
        if line is not None:
            where.append(f"line {line}, column {column}")
        if field:
            where.append(f"field '{field}'")
        prefix = f"{', '.join(where)}: " if where else ""
        super().__init__(f"{prefix}{message}")


class ScenarioValidationError(CredalError):
    """The scenario parsed but violates one or more invariants."""

    def __init__(self, errors: List[str]):
        self.errors = errors
        super().__init__(f"Scenario validation failed: {'; '.join(errors)}")


class ConfigurationError(CredalError):
    """An environment setting has an unusable value."""


class InvalidCredalSetError(CredalError):
    """A credal set has no vertices or vertices of the wrong shape."""


class UnknownLabelError(CredalError):
    """A label is not declared on the space it is looked up in."""


class InvalidPartitionError(CredalError):
    """Cells overlap, are empty, or do not cover the observations."""
