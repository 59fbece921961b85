"""Choosing a pricing algorithm for a valued market.

Routing looks at the residual market left after rough pricing, since that
is what the fine pricers see.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping

from .errors import PreconditionError, UnsupportedRegimeError
from .four import fine_four
from .market import Market, SimplifiedMarket
from .matching import count_optimal_allocations, legality
from .pipeline import price_with
from .rough import ResidualMarket, residual_market, rough_prices
from .tridemand import MAX_DEMAND, fine_tridemand
from .two_allocs import fine_two
from .verify import brute_force_pricing

AUTO = "auto"
FOUR = "four"
TWO_ALLOC = "two-alloc"
TRI = "tri"
BRUTE = "brute"
ROUGH = "rough"
ALGORITHMS = (AUTO, FOUR, TWO_ALLOC, TRI, BRUTE)
BRUTE_BOUND = 6


@dataclass(frozen=True)
class PricingResult:
    prices: Mapping[str, Fraction]
    algorithm: str
    residual: ResidualMarket


@dataclass(frozen=True)
class Eligibility:
    """Which regimes accept the residual market, with the facts behind them."""

    tri: bool
    four: bool
    two_alloc: bool
    brute: bool
    residual_players: int
    residual_items: int
    max_residual_demand: int
    optimal_allocations: int

    def as_dict(self) -> dict:
        return {
            TRI: self.tri,
            FOUR: self.four,
            TWO_ALLOC: self.two_alloc,
            BRUTE: self.brute,
            "residual_players": self.residual_players,
            "residual_items": self.residual_items,
            "max_residual_demand": self.max_residual_demand,
            "optimal_allocations": self.optimal_allocations,
        }


def _residual(market: Market) -> ResidualMarket:
    info = legality(market)
    return residual_market(market, rough_prices(market, info), info)


def _at_most_two(sm: SimplifiedMarket) -> bool:
    return count_optimal_allocations(sm, limit=2) <= 2


def eligibility(market: Market) -> Eligibility:
    res = _residual(market)
    sm = res.simplified
    if sm is None:
        return Eligibility(True, True, True, True, 0, 0, 0, 1)
    count = count_optimal_allocations(sm, limit=2)
    top = max(sm.demand)
    return Eligibility(
        top <= MAX_DEMAND, sm.n <= 4, count <= 2, sm.m <= BRUTE_BOUND, sm.n, sm.m, top, count
    )


def route(sm: SimplifiedMarket) -> str:
    """Regime for a residual market: tri-demand, then four players, then two allocations."""
    if max(sm.demand) <= MAX_DEMAND:
        return TRI
    if sm.n <= 4:
        return FOUR
    if _at_most_two(sm):
        return TWO_ALLOC
    raise UnsupportedRegimeError(
        f"residual market has {sm.n} players, demand up to {max(sm.demand)} "
        "and more than two optimal allocations"
    )


def _brute(sm: SimplifiedMarket) -> dict[str, Fraction]:
    if sm.m > BRUTE_BOUND:
        raise UnsupportedRegimeError(f"{sm.m} residual items exceed the brute-force bound {BRUTE_BOUND}")
    prices = brute_force_pricing(sm, BRUTE_BOUND)
    if prices is None:
        raise UnsupportedRegimeError("no ordering of the residual market verifies")
    return prices


def _fine(algo: str, fixed_at: str | None):
    if algo == TRI:
        def fine(sm: SimplifiedMarket) -> dict[str, Fraction]:
            if fixed_at is not None and fixed_at not in sm.items:
                raise PreconditionError(f"{fixed_at!r} is not an item of the residual market")
            return fine_tridemand(sm, fixed_at)

        return fine
    if algo == FOUR:
        return fine_four
    if algo == TWO_ALLOC:
        def fine(sm: SimplifiedMarket) -> dict[str, Fraction]:
            if not _at_most_two(sm):
                raise UnsupportedRegimeError("more than two optimal allocations")
            return fine_two(sm)

        return fine
    if algo == BRUTE:
        return _brute
    raise PreconditionError(f"unknown algorithm {algo!r}")


def price_market(market: Market, algo: str = AUTO, fixed_at: str | None = None) -> PricingResult:
    """Dynamic pricing of ``market`` with the chosen (or routed) algorithm.

    ``fixed_at`` makes the fine part cheapest at that residual item and is
    only accepted by the tri-demand regime.
    """
    if algo not in ALGORITHMS:
        raise PreconditionError(f"unknown algorithm {algo!r}; choose from {', '.join(ALGORITHMS)}")
    if fixed_at is not None:
        market.item_index(fixed_at)
    res = _residual(market)
    if res.trivial:
        if fixed_at is not None:
            raise PreconditionError("market has no residual items to fix a price at")
        return PricingResult(price_with(market, fine_tridemand), ROUGH, res)
    chosen = route(res.simplified) if algo == AUTO else algo
    if fixed_at is not None and chosen != TRI:
        raise PreconditionError(f"--fixed-at needs the {TRI} regime, not {chosen}")
    return PricingResult(price_with(market, _fine(chosen, fixed_at)), chosen, res)


def simulation_pricer(market: Market) -> dict[str, Fraction]:
    """Routed pricing that falls back to brute force on small residual markets."""
    try:
        return dict(price_market(market).prices)
    except UnsupportedRegimeError:
        return dict(price_market(market, BRUTE).prices)
