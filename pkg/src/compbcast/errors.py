"""Exception types shared across the toolkit."""


class CompBcastError(Exception):
    """Base class for all toolkit errors."""


class DemandParseError(CompBcastError):
    """Raised when a demand expression cannot be parsed or is invalid
    for the given field order / dataset count.

    ``position`` is the 0-based character offset of the offending token.
    """

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at position {position})")
        self.position = position


class InstanceFormatError(CompBcastError):
    """Raised when an instance file is structurally malformed."""


class InvalidInstanceError(CompBcastError):
    """Raised when an operation requires a valid instance but validation
    found violations. Carries the violation list."""

    def __init__(self, violations):
        self.violations = tuple(violations)
        lines = "; ".join(f"{v.code}: {v.message}" for v in self.violations)
        super().__init__(f"invalid instance: {lines}")


class GuardExceeded(CompBcastError):
    """Raised when an operation would exceed its documented size guard."""


class EnumerationTimeout(CompBcastError):
    """Raised when an enumeration exceeds its time budget."""
