"""Semantic exception hierarchy for the package.

Every error raised by library code derives from :class:`MarglueError` so that
callers (in particular the CLI) can map failures to the right channel: bad
input data, violated call preconditions, or internal invariant breakage.
"""

from __future__ import annotations


class MarglueError(Exception):
    """Base class for all errors raised by this package."""


class CoordinateMismatchError(MarglueError):
    """A coordinate set, atom, or space does not match the expected one."""


class DimensionMismatchError(MarglueError):
    """Vector or matrix shapes do not line up."""


class DomainError(MarglueError):
    """A value violates a documented domain restriction (sign, mass, bound order)."""


class PreconditionError(MarglueError):
    """A checked call precondition failed; carries a witness when available."""

    def __init__(self, message: str, witness=None):
        super().__init__(message)
        self.witness = witness


class ConsistencyError(MarglueError):
    """A marginal family failed pairwise consistency; carries the violations."""

    def __init__(self, violations):
        self.violations = tuple(violations)
        first = self.violations[0] if self.violations else None
        super().__init__(f"family is not pairwise consistent (first violation: {first})")


class FamilyTooLargeError(MarglueError):
    """The family exceeds the configured member cap for an exponential algorithm."""


class EliminationOrderError(MarglueError):
    """An elimination order does not satisfy the running-intersection property."""


class NotCompositionOperatorError(MarglueError):
    """A lattice map is not of the form h -> h o f (some row is not a unit row)."""


class InvariantViolationError(MarglueError):
    """An internal invariant failed; indicates a bug, never expected on legal input."""


class InstanceFormatError(MarglueError):
    """A JSON instance file violates the schema; carries the offending path."""

    def __init__(self, path: str, message: str):
        self.path = path
        super().__init__(f"{path}: {message}")
