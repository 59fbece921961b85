"""Dynamic pricing for multi-demand markets.

Prices are posted, a buyer takes a bundle in demand and leaves, and prices
are recomputed for the rest.  The pricings computed here guarantee that the
final allocation maximizes social welfare whatever the arrival order and
tie-breaking.
"""

from .dispatch import PricingResult, eligibility, price_market
from .errors import (
    AssumptionViolationError,
    GenerationError,
    InternalInvariantError,
    InvalidMarketError,
    PreconditionError,
    PricingError,
    UnsupportedRegimeError,
)
from .four import price_four_players
from .gen import GenProfile, fixture, generate
from .market import Allocation, Market, SimplifiedMarket
from .matching import legality, max_welfare
from .rough import rough_prices
from .tridemand import price_fixed_at, price_tridemand
from .two_allocs import price_two_allocations
from .verify import adversarial_sweep, brute_force_pricing, is_dynamic_pricing, simulate

__all__ = [
    "Allocation",
    "AssumptionViolationError",
    "GenProfile",
    "GenerationError",
    "InternalInvariantError",
    "InvalidMarketError",
    "Market",
    "PreconditionError",
    "PricingError",
    "PricingResult",
    "SimplifiedMarket",
    "UnsupportedRegimeError",
    "adversarial_sweep",
    "brute_force_pricing",
    "eligibility",
    "fixture",
    "generate",
    "is_dynamic_pricing",
    "legality",
    "max_welfare",
    "price_fixed_at",
    "price_four_players",
    "price_market",
    "price_tridemand",
    "price_two_allocations",
    "rough_prices",
    "simulate",
]
