"""Named failure modes.

Every error subclasses a builtin (ValueError or RuntimeError) so callers that only know
about the builtins keep working.

"""

from typing import Any, Optional


class NotPositiveDefinite(ValueError):
    """A Cholesky pivot fell below tolerance."""


class EmptyInterval(ValueError):
    """Truncation interval with lo >= hi."""


class DimensionMismatch(ValueError):
    """Point and body (or two bodies) live in different dimensions."""


class TooFewSamples(ValueError):
    """Not enough rows for the requested estimator."""


class SpecParse(ValueError):
    """A body / truncation spec description could not be parsed."""


class ConfigParse(ValueError):
    """An experiment config is missing fields or has invalid values."""


class RootNotBracketed(RuntimeError):
    """A bisection interval does not contain a sign change."""


class RejectionExhausted(RuntimeError):
    """Rejection sampling hit its attempt cap before collecting enough samples."""

    def __init__(self, body: Optional[Any] = None, attempts: int = 0) -> None:
        self.body = body
        self.attempts = attempts
        super().__init__(
            "rejection sampler gave up after %i attempts on %s; the body volume is too "
            "small for rejection, use an exact strategy" % (attempts, body)
        )
