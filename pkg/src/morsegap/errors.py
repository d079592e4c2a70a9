"""Exception hierarchy shared across the package.

The CLI maps these onto exit codes: ValidationError -> 2,
CapacityError -> 3, InvariantViolationError -> 4.
"""


class MorsegapError(Exception):
    """Base class for all package errors."""


class ValidationError(MorsegapError):
    """Bad input: domain violations, malformed model files, wrong kinds."""


class SignPatternError(ValidationError):
    """A critical point violates the saddle/extremum sign table."""


class CapacityError(MorsegapError):
    """Request exceeds a configured size cap or overflows float range."""


class InvariantViolationError(MorsegapError):
    """A topological invariant failed (e.g. the Euler characteristic jumped)."""
