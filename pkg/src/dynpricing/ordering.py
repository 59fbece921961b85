"""Helpers for price vectors whose meaning lies in their ordering.

In a simplified market with prices in (0, 1) every player buys its ``k_i``
cheapest legal items, so only the order of prices matters.  These helpers
place items into bands and break ties without disturbing any strict
comparison.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from .market import Market


def spread(items: Sequence[str], lo: Fraction, hi: Fraction) -> dict[str, Fraction]:
    """Distinct prices strictly inside ``(lo, hi)``, increasing along ``items``."""
    step = (hi - lo) / (len(items) + 1)
    return {x: lo + step * (j + 1) for j, x in enumerate(items)}


def into_band(prices: Mapping[str, Fraction], lo: Fraction, hi: Fraction) -> dict[str, Fraction]:
    """Order-preserving affine map of prices in ``(0, 1)`` into ``(lo, hi)``."""
    return {x: lo + (hi - lo) * p for x, p in prices.items()}


def _min_gap(values: Iterable[Fraction]) -> Fraction | None:
    vals = sorted(set(values))
    gaps = [b - a for a, b in zip(vals, vals[1:])]
    return min(gaps) if gaps else None


def break_ties_unit(prices: Mapping[str, Fraction], order: Sequence[str]) -> dict[str, Fraction]:
    """Make prices in ``(0, 1)`` distinct by refining their order.

    Equal prices are separated by small increments following ``order``;
    every strict inequality, and the bound 1, survives.
    """
    if len(set(prices.values())) == len(prices):
        return dict(prices)
    gap = _min_gap(list(prices.values()) + [Fraction(1)])
    eta = gap / (len(prices) + 1)
    rank = {x: j for j, x in enumerate(order)}
    out: dict[str, Fraction] = {}
    seen: dict[Fraction, int] = {}
    for x in sorted(prices, key=lambda y: (prices[y], rank[y])):
        j = seen.get(prices[x], 0)
        seen[prices[x]] = j + 1
        out[x] = prices[x] + j * eta
    return out


def break_ties_valued(market: Market, prices: Mapping[str, Fraction]) -> dict[str, Fraction]:
    """Distinct prices for a valued market without reversing any strict comparison.

    The increment stays below the smallest nonzero gap between prices, and
    between any two utilities (or a utility and zero) of one player, so demand
    sets can only shrink.
    """
    if len(set(prices.values())) == len(prices):
        return dict(prices)
    quantities: list[Fraction] = [Fraction(0)]
    gaps: list[Fraction] = []
    g = _min_gap(prices.values())
    if g is not None:
        gaps.append(g)
    for row in market.values:
        utils = [v - prices[x] for x, v in zip(market.items, row)]
        g = _min_gap(utils + quantities)
        if g is not None:
            gaps.append(g)
    eta = min(gaps) / (2 * market.m + 2)
    out: dict[str, Fraction] = {}
    seen: dict[Fraction, int] = {}
    for x in sorted(market.items, key=lambda y: (prices[y], market.item_index(y))):
        j = seen.get(prices[x], 0)
        seen[prices[x]] = j + 1
        out[x] = prices[x] + j * eta
    return out
