"""From a fine-pricing routine for simplified markets to prices for a valued market."""

from __future__ import annotations

from contextlib import contextmanager
from contextvars import ContextVar
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Callable, Iterator

from .errors import InternalInvariantError
from .market import Market, SimplifiedMarket
from .matching import legality
from .ordering import break_ties_valued
from .rough import combine_prices, residual_market, rough_prices

FinePricer = Callable[[SimplifiedMarket], dict]


def price_with(market: Market, fine: FinePricer) -> dict[str, Fraction]:
    """Rough prices plus ``delta`` times a fine pricing of the residual market."""
    info = legality(market)
    rough = rough_prices(market, info)
    residual = residual_market(market, rough, info)
    if residual.trivial:
        prices = rough
    else:
        unit = fine(residual.simplified)
        check_unit_prices(residual.simplified, unit)
        scaled = {x: residual.headroom * p for x, p in unit.items()}
        prices = combine_prices(rough, scaled, residual)
    return break_ties_valued(market, prices)


def price_submarket(sm: SimplifiedMarket, fine: FinePricer) -> dict[str, Fraction]:
    """Dynamic pricing of a submarket whose legality table may overstate its true legality.

    The submarket is treated as a 0/1 valued market and run through the full
    pipeline, which recomputes legality.  The result lies in (0, 1): rough
    prices stay below the unit values of legal items and the fine part stays
    below the remaining headroom.
    """
    if not sm.items:
        return {}
    prices = price_with(sm.market, fine)
    check_unit_prices(sm, prices)
    return prices


def check_unit_prices(sm: SimplifiedMarket, prices: dict[str, Fraction]) -> None:
    if set(prices) != set(sm.items):
        raise InternalInvariantError("fine prices do not cover the residual items")
    for x, p in prices.items():
        if not 0 < p < 1:
            raise InternalInvariantError(f"price {p} of {x!r} outside (0, 1)")


@dataclass(frozen=True)
class Emitted:
    """A structure produced during pricing, with the market it refers to."""

    kind: str
    market: SimplifiedMarket
    structure: Any


_sink: ContextVar[list | None] = ContextVar("dynpricing_sink", default=None)


@contextmanager
def recording() -> Iterator[list[Emitted]]:
    """Collect every removable set, cycle structure and submarket pair emitted inside."""
    token = _sink.set([])
    try:
        yield _sink.get()
    finally:
        _sink.reset(token)


def emit(kind: str, market: SimplifiedMarket, structure: Any) -> None:
    sink = _sink.get()
    if sink is not None:
        sink.append(Emitted(kind, market, structure))
