"""Exception hierarchy.

Every error carries the CLI exit code it maps to, so the command layer can
translate failures without inspecting messages.
"""

from __future__ import annotations


class PricingError(Exception):
    """Base class for all library errors."""

    exit_code = 4


class InvalidReferenceError(PricingError, KeyError):
    """Unknown player or item identifier."""

    exit_code = 2

    def __str__(self) -> str:
        return str(self.args[0]) if self.args else ""


class InvalidMarketError(PricingError, ValueError):
    """Structurally invalid market, allocation or price vector."""

    exit_code = 2


class AssumptionViolationError(InvalidMarketError):
    """Some item is left unassigned by an optimal allocation."""


class PreconditionError(PricingError, ValueError):
    """An operation was called outside its documented domain."""

    exit_code = 2


class UnsupportedRegimeError(PricingError):
    """No implemented pricing algorithm covers the market."""

    exit_code = 3


class InternalInvariantError(PricingError, AssertionError):
    """A property guaranteed by construction failed to hold."""

    exit_code = 4


class AllocationOverflow(PricingError):
    """More optimal allocations exist than the caller's limit.

    ``partial`` holds the allocations found before the limit was hit.
    """

    exit_code = 4

    def __init__(self, limit: int, partial: list) -> None:
        super().__init__(f"more than {limit} optimal allocations")
        self.limit = limit
        self.partial = partial


class GenerationError(PricingError):
    """Rejection sampling ran out of attempts."""

    exit_code = 3

    def __init__(self, attempts: int, reason: str = "") -> None:
        msg = f"no admissible market after {attempts} attempts"
        if reason:
            msg += f" ({reason})"
        super().__init__(msg)
        self.attempts = attempts
