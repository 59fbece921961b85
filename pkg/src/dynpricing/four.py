"""Dynamic pricing for simplified markets with at most four players.

Each step removes either an item legal to every player or a removable set
(type I or II) relative to some legal allocation, prices the remaining
submarket recursively and places the removed items below or above it.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations

from .errors import InternalInvariantError, PreconditionError, UnsupportedRegimeError
from .legality_graph import (
    LegalityGraph,
    build_legality_graph,
    find_uniquely_assigned_cycle,
    induced_submarket,
    reallocate,
)
from .market import Allocation, SimplifiedMarket
from .matching import legal_allocation
from .ordering import into_band, spread
from .pipeline import emit, price_submarket
from .verify import brute_force_pricing

BASE_ITEMS = 3
TYPE_I = "I"
TYPE_II = "II"


@dataclass(frozen=True)
class RemovableSet:
    kind: str
    items: frozenset
    central_item: str | None
    allocation: Allocation


def _strongly_connected(graph: LegalityGraph, items: frozenset) -> bool:
    def reach(start: str, forward: bool) -> set[str]:
        seen = {start}
        stack = [start]
        while stack:
            x = stack.pop()
            nbrs = (
                [y for y in graph.succ[x] if y in items]
                if forward
                else [y for y in items if graph.has_edge(y, x)]
            )
            for y in nbrs:
                if y not in seen:
                    seen.add(y)
                    stack.append(y)
        return seen

    start = next(iter(items))
    return reach(start, True) == items and reach(start, False) == items


def is_removable_set(sm: SimplifiedMarket, rs: RemovableSet) -> bool:
    """Check ``rs`` against the defining conditions of its kind."""
    alloc = rs.allocation
    if not alloc.is_full(sm) or any(not alloc.bundle(p) <= sm.L(p) for p in sm.players):
        return False
    items = frozenset(rs.items)
    if not items or not items <= set(sm.items):
        return False
    if rs.kind == TYPE_I:
        xc = rs.central_item
        if xc not in items:
            return False
        ic = alloc.owner(xc)
        others = [p for p in sm.legal_players(xc) if p != ic]
        rest = items - {xc}
        if len(rest) != len(others):
            return False
        for p in others:
            mine = alloc.bundle(p) & rest
            if len(mine) != 1 or not mine <= sm.L(ic):
                return False
        return True
    if rs.kind == TYPE_II:
        if rs.central_item is not None:
            return False
        if any(len(alloc.bundle(p) & items) != 1 for p in sm.players):
            return False
        return _strongly_connected(build_legality_graph(sm, alloc), items)
    return False


def exhaustive_removable_sets(sm: SimplifiedMarket, allocation: Allocation) -> list[RemovableSet]:
    """Every removable set relative to ``allocation``, by subset search.

    Exponential; meant as a cross-check on small markets.
    """
    found = []
    for size in range(1, sm.m + 1):
        for subset in combinations(sm.items, size):
            items = frozenset(subset)
            cands = [RemovableSet(TYPE_II, items, None, allocation)]
            cands += [RemovableSet(TYPE_I, items, x, allocation) for x in subset]
            found += [rs for rs in cands if is_removable_set(sm, rs)]
    return found


def _first(sm: SimplifiedMarket, items) -> str:
    return sm.sort_items(items)[0]


def _type_ii(graph: LegalityGraph, items) -> RemovableSet:
    return RemovableSet(TYPE_II, frozenset(items), None, graph.allocation)


def _type_i(graph: LegalityGraph, items, central: str) -> RemovableSet:
    return RemovableSet(TYPE_I, frozenset(items), central, graph.allocation)


def _from_triangle(graph: LegalityGraph, items: tuple[str, str, str]) -> RemovableSet:
    """Removable set near the 3-cycle ``x3 -> x2 -> x1 -> x3`` in a 4-player market."""
    sm = graph.market
    on_cycle = {graph.owner(x) for x in items}
    (p4,) = [p for p in sm.players if p not in on_cycle]
    x4 = _first(sm, graph.allocation.bundle(p4))
    for s in range(3):
        x3, x2, x1 = items[s:] + items[:s]
        if x4 in sm.L(graph.owner(x3)):
            break
    else:
        raise InternalInvariantError(f"{x4!r} is legal only to its owner")
    p1, p2, p3 = (graph.owner(x) for x in (x1, x2, x3))
    if any(x in sm.L(p4) for x in (x1, x2, x3)):
        return _type_ii(graph, (x1, x2, x3, x4))
    x5 = graph.succ[x4][0]
    owner5 = graph.owner(x5)
    if owner5 == p1:
        g2 = build_legality_graph(sm, reallocate(graph, (x3, x4, x5)))
        return _type_ii(g2, (x1, x2, x4, x5))
    if owner5 == p2:
        return _type_ii(graph, (x1, x3, x4, x5))
    if owner5 != p3:
        raise InternalInvariantError("unexpected owner in the 3-cycle case")
    pair_players = set(sm.legal_players(x4)) | set(sm.legal_players(x5))
    if pair_players <= {p3, p4}:
        return _type_i(graph, (x4, x5), x5)
    if not ({p1, p2} & set(sm.legal_players(x5))):
        # swap x4 and x5 between players 3 and 4
        graph = build_legality_graph(sm, reallocate(graph, (x4, x5)))
        x4, x5 = x5, x4
    if x5 in sm.L(p1):
        g2 = build_legality_graph(sm, reallocate(graph, (x1, x5, x2)))
        return _type_ii(g2, (x1, x2, x4, x5))
    return _type_i(graph, (x2, x4, x5), x5)


def _from_two_cycle(graph: LegalityGraph, items: tuple[str, str]) -> RemovableSet:
    """Removable set near the 2-cycle ``x1 <-> x2``."""
    sm = graph.market
    x1, x2 = items
    p1, p2 = graph.owner(x1), graph.owner(x2)
    others = [p for p in sm.players if p not in (p1, p2)]
    if not any(x1 in sm.L(p) or x2 in sm.L(p) for p in others):
        return _type_i(graph, (x1, x2), x2)
    if not any(x2 in sm.L(p) for p in others):
        x1, x2, p1, p2 = x2, x1, p2, p1
    p3 = next(p for p in others if x2 in sm.L(p))
    x3 = _first(sm, graph.allocation.bundle(p3))
    if x3 in sm.L(p1):
        tri = graph.cycle((x1, x3, x2))
        if sm.n == 3:
            return _type_ii(graph, tri.items)
        return _from_triangle(graph, tri.items)
    if x3 in sm.L(p2):
        return _type_i(graph, (x1, x2, x3), x2)
    rest = [p for p in others if p != p3]
    if len(rest) != 1:
        raise InternalInvariantError("2-cycle case needs a fourth player")
    p4 = rest[0]
    x4 = _first(sm, graph.allocation.bundle(p4))
    if x4 in sm.L(p1) or x4 in sm.L(p2):
        return _type_ii(graph, (x1, x2, x3, x4))
    return _type_i(graph, (x3, x4), x4)


def _check_domain(sm: SimplifiedMarket) -> None:
    if sm.n > 4:
        raise UnsupportedRegimeError(f"{sm.n} players; at most 4 supported")
    for x in sm.items:
        owners = sm.legal_players(x)
        if len(owners) == sm.n:
            raise PreconditionError(f"item {x!r} is legal to every player")
        if len(owners) < 2:
            raise PreconditionError(f"item {x!r} is legal to a single player")


def find_removable_set(sm: SimplifiedMarket, allocation: Allocation | None = None) -> RemovableSet:
    """A removable set of type I or II, possibly relative to a reallocation of ``allocation``.

    Starts from a uniquely assigned cycle through the first item and
    branches on its length.  The result is checked before it is returned.
    """
    _check_domain(sm)
    if allocation is None:
        allocation = legal_allocation(sm)
        if allocation is None:
            raise PreconditionError("market has no legal allocation")
    graph = build_legality_graph(sm, allocation)
    cycle = find_uniquely_assigned_cycle(graph, sm.items[0])
    if len(cycle) == sm.n:
        rs = _type_ii(graph, cycle.items)
    elif len(cycle) == 3:
        rs = _from_triangle(graph, cycle.items)
    elif len(cycle) == 2:
        rs = _from_two_cycle(graph, cycle.items)
    else:
        raise InternalInvariantError(f"uniquely assigned cycle of length {len(cycle)}")
    if not is_removable_set(sm, rs):
        raise InternalInvariantError(f"constructed set {sorted(rs.items)} is not removable")
    return rs


def fine_four(sm: SimplifiedMarket) -> dict[str, Fraction]:
    """Ordering-only pricing of a residual market (every item legal to 2+ players)."""
    if sm.n > 4:
        raise UnsupportedRegimeError(f"{sm.n} players; at most 4 supported")
    if sm.m <= BASE_ITEMS:
        prices = brute_force_pricing(sm)
        if prices is None:
            raise InternalInvariantError("no ordering of a small market verifies")
        return prices
    for x in sm.items:
        if len(sm.legal_players(x)) == sm.n:
            alloc = legal_allocation(sm)
            sub = induced_submarket(sm, alloc, set(sm.items) - {x})
            prices = into_band(price_submarket(sub, fine_four), Fraction(0), Fraction(1, 2))
            prices[x] = Fraction(3, 4)
            return prices
    rs = find_removable_set(sm)
    emit("removable_set", sm, rs)
    sub = induced_submarket(sm, rs.allocation, set(sm.items) - rs.items)
    inner = price_submarket(sub, fine_four)
    if rs.kind == TYPE_I:
        prices = into_band(inner, Fraction(1, 4), Fraction(3, 4))
        prices[rs.central_item] = Fraction(1, 8)
        prices.update(spread(sm.sort_items(rs.items - {rs.central_item}), Fraction(3, 4), Fraction(1)))
    else:
        prices = into_band(inner, Fraction(0), Fraction(1, 2))
        prices.update(spread(sm.sort_items(rs.items), Fraction(1, 2), Fraction(1)))
    return prices


def price_four_players(sm: SimplifiedMarket) -> dict[str, Fraction]:
    """Distinct prices in (0, 1) forming a dynamic pricing of ``sm``."""
    if sm.n > 4:
        raise UnsupportedRegimeError(f"{sm.n} players; at most 4 supported")
    return price_submarket(sm, fine_four)
