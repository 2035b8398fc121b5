"""Exception types shared across the toolkit."""


class BornoError(Exception):
    """Base class for all toolkit errors."""


class DescriptorMismatch(BornoError):
    """Two operands live in different algebras."""

    def __init__(self, left, right, context=""):
        self.left = left
        self.right = right
        msg = f"descriptor mismatch: {left} vs {right}"
        if context:
            msg = f"{context}: {msg}"
        super().__init__(msg)


class NumericalFailure(BornoError):
    """An iterative kernel failed to meet its tolerance.

    Carries the best bracket known at the time of failure, so callers can
    decide whether the partial answer is usable.
    """

    def __init__(self, message, bracket=None):
        self.bracket = bracket
        if bracket is not None:
            message = f"{message} (best bracket: [{bracket[0]!r}, {bracket[1]!r}])"
        super().__init__(message)


class InvariantViolation(BornoError):
    """A mathematically guaranteed identity failed; indicates a kernel bug."""


class CapExceeded(BornoError):
    """A product cap was reached before norms decayed.

    ``decay_profile`` maps product length to the largest norm seen at that
    length, so the caller can judge how much larger ``r`` must be.
    """

    def __init__(self, message, decay_profile):
        self.decay_profile = dict(decay_profile)
        super().__init__(f"{message}; decay profile {self.decay_profile}")


class UnsupportedDisk(BornoError):
    """Gauge evaluation has no exact formula for this disk combination."""


class UnboundedMap(BornoError):
    """A map failed its declared gauge-to-gauge bound."""


class EquiboundednessError(BornoError):
    """An operator family violates the declared common bound."""


class NotDecided(BornoError):
    """An exact decision procedure hit a boundary case outside its fragment.

    Raised instead of silently sampling; the caller sees precisely which
    comparison could not be closed.
    """


class SchemaError(BornoError):
    """An instance file failed schema validation."""
