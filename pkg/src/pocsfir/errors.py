"""Exception types raised by the design engine."""


class PocsError(Exception):
    """Base class for all errors raised by :mod:`pocsfir`."""


class InvalidArgumentError(PocsError, ValueError):
    """An argument has the wrong shape, length or range."""


class InvalidSpecError(PocsError, ValueError):
    """A filter or design specification violates one of its invariants.

    ``field`` names the offending field when known.
    """

    def __init__(self, message, field=None, line=None):
        super().__init__(message)
        self.field = field
        self.line = line


class InfeasibleConstraintError(PocsError):
    """A constraint set is empty, so no projection exists."""


class NumericalError(PocsError, RuntimeError):
    """An inner numerical solve failed to converge."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class ConsistencyError(PocsError, RuntimeError):
    """An internal invariant was broken (e.g. lost conjugate symmetry)."""


class DegenerateFrequencyError(PocsError, ValueError):
    """Every free basis function vanishes at the requested frequency."""
