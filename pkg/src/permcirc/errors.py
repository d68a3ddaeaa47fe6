"""Exception types shared across the package."""

from __future__ import annotations


class PermcircError(Exception):
    """Base class for all errors raised by permcirc."""


class CircuitParseError(PermcircError):
    """Circuit file could not be parsed; carries the 1-based line number."""

    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


class MissingHeaderError(CircuitParseError):
    pass


class MalformedLineError(CircuitParseError):
    pass


class UnknownGateNameError(CircuitParseError):
    pass


class IndexOutOfRangeError(CircuitParseError):
    pass


class DuplicateToffoliIndexError(CircuitParseError):
    pass


class BasisStateError(PermcircError):
    """Basis-state bit string has the wrong length or bad characters."""


class NotNormalizedError(PermcircError):
    """Circuit violates the normal form required by the variable labeling."""


class UnboundVariableError(PermcircError):
    """Polynomial evaluation or counting referenced an unassigned variable."""


class TooManyVariablesError(PermcircError):
    """Free-variable count exceeds the enumeration limit."""


class BadBetaProductError(PermcircError):
    """Cubic gadget weights do not multiply to -2."""


class ConflictingBoundaryError(PermcircError):
    """Boundary bits contradict a constant line; the amplitude is exactly 0."""


class TooLargeError(PermcircError):
    """Matrix dimension exceeds the configured size cap."""


class NonIntegerResultError(PermcircError):
    """Internal consistency failure: an exact average did not divide evenly."""


class TooManyQubitsError(PermcircError):
    """State-vector simulation would exceed the qubit cap."""


class NoConvergenceError(PermcircError):
    """Power iteration failed to converge within the iteration budget."""


class CrossCheckError(PermcircError):
    """Debug cross-check against the state-vector oracle disagreed."""
