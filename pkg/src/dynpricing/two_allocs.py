"""Dynamic pricing for simplified markets with at most two optimal allocations.

The construction only needs every item to be legal to at most two players.
Each step removes the items of an even uniquely assigned cycle (type III),
or all but one item of an odd one (type IV), and alternates their prices
above and below a recursive pricing of the rest.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator

from .errors import InternalInvariantError, PreconditionError, UnsupportedRegimeError
from .legality_graph import Cycle, LegalityGraph, build_legality_graph, induced_submarket, reallocate
from .market import Allocation, SimplifiedMarket
from .matching import count_optimal_allocations, legal_allocation
from .ordering import into_band, spread
from .pipeline import emit, price_submarket

REMOVABLE_CYCLE = "removable_cycle"
ODD_CYCLE_PAIR = "odd_cycle_pair"
TYPE_IV = "type_iv"


def simple_cycles(graph: LegalityGraph, unique_owners: bool = False) -> Iterator[Cycle]:
    """Every simple cycle once, starting at its lowest-index item.

    With ``unique_owners`` only uniquely assigned cycles are produced; the
    search prunes any path that revisits a player.
    """
    sm = graph.market
    idx = sm.item_index
    for start in sm.items:
        s = idx(start)
        path = [start]
        owners = {graph.owner(start)}

        def extend(x: str) -> Iterator[Cycle]:
            for y in graph.succ[x]:
                if y == start:
                    yield graph.cycle(path)
                elif idx(y) > s and y not in path:
                    o = graph.owner(y)
                    if unique_owners and o in owners:
                        continue
                    path.append(y)
                    owners.add(o)
                    yield from extend(y)
                    path.pop()
                    if unique_owners:
                        owners.discard(o)

        yield from extend(start)


def uniquely_assigned_cycles(graph: LegalityGraph) -> list[Cycle]:
    sm = graph.market
    return sorted(
        simple_cycles(graph, unique_owners=True),
        key=lambda c: (len(c), [sm.item_index(x) for x in c.items]),
    )


@dataclass(frozen=True)
class CycleStructure:
    """A removable cycle, an odd cycle pair or a type IV set.

    Cycle items are listed as ``x_1, ..., x_l`` with ``x_l = x_0``.  For a
    pair both cycles end at a shared item and agree on their last ``r + 1``
    items.
    """

    kind: str
    cycles: tuple[Cycle, ...]
    allocation: Allocation
    r: int | None = None

    @property
    def items(self) -> tuple[str, ...]:
        """Removed items in cycle order (empty for a pair)."""
        if self.kind == REMOVABLE_CYCLE:
            return self.cycles[0].items
        if self.kind == TYPE_IV:
            return self.cycles[0].items[:-1]
        return ()


def _shared_suffix(c1: Cycle, c2: Cycle) -> int:
    """Largest ``r`` such that the last ``r + 1`` items of both cycles agree."""
    r = -1
    while r + 1 < min(len(c1), len(c2)) and c1.items[-2 - r] == c2.items[-2 - r]:
        r += 1
    return r


def _pair_ok(c1: Cycle, c2: Cycle, r: int) -> bool:
    l1, l2 = len(c1), len(c2)
    if l1 % 2 == 0 or l2 % 2 == 0 or c1.items == c2.items:
        return False
    if r < 0 or r > min(l1, l2) - 2:
        return False
    if any(c1.items[-1 - j] != c2.items[-1 - j] for j in range(r + 1)):
        return False
    return len(set(c1.players) | set(c2.players)) == l1 + l2 - (r + 2)


def find_odd_cycle_pair(graph: LegalityGraph, cycles: list[Cycle] | None = None) -> CycleStructure | None:
    """First odd cycle pair among the uniquely assigned cycles, or None."""
    if cycles is None:
        cycles = uniquely_assigned_cycles(graph)
    odd = [c for c in cycles if len(c) % 2]
    for a, c1 in enumerate(odd):
        for c2 in odd[a + 1:]:
            for pair in ((c1, c2), (c2, c1)):
                for z in graph.market.sort_items(set(c1.items) & set(c2.items)):
                    u = pair[0].rotate(pair[0].items.index(z) + 1)
                    v = pair[1].rotate(pair[1].items.index(z) + 1)
                    r = _shared_suffix(u, v)
                    if _pair_ok(u, v, r):
                        return CycleStructure(ODD_CYCLE_PAIR, (u, v), graph.allocation, r)
    return None


def find_cycle_structure(graph: LegalityGraph) -> CycleStructure:
    """A removable cycle if one exists, else an odd cycle pair, else a type IV set."""
    cycles = uniquely_assigned_cycles(graph)
    if not cycles:
        raise PreconditionError("legality graph has no cycle")
    for c in cycles:
        if len(c) % 2 == 0:
            return CycleStructure(REMOVABLE_CYCLE, (c,), graph.allocation)
    pair = find_odd_cycle_pair(graph, cycles)
    if pair is not None:
        return pair
    return CycleStructure(TYPE_IV, (cycles[0],), graph.allocation)


def is_cycle_structure(sm: SimplifiedMarket, cs: CycleStructure) -> bool:
    """Check ``cs`` against the defining conditions of its kind."""
    try:
        graph = build_legality_graph(sm, cs.allocation)
        for c in cs.cycles:
            if graph.cycle(c.items) != c:
                return False
    except PreconditionError:
        return False
    if cs.kind == REMOVABLE_CYCLE:
        (c,) = cs.cycles
        return c.uniquely_assigned and len(c) % 2 == 0
    if cs.kind == ODD_CYCLE_PAIR:
        c1, c2 = cs.cycles
        return cs.r is not None and _pair_ok(c1, c2, cs.r)
    if cs.kind == TYPE_IV:
        (c,) = cs.cycles
        if not c.uniquely_assigned or len(c) % 2 == 0:
            return False
        cycles = uniquely_assigned_cycles(graph)
        if any(len(d) % 2 == 0 for d in cycles):
            return False
        return find_odd_cycle_pair(graph, cycles) is None
    return False


def _check_two_legal(sm: SimplifiedMarket) -> None:
    for x in sm.items:
        if len(sm.legal_players(x)) > 2:
            raise UnsupportedRegimeError(f"item {x!r} is legal to more than two players")


def fine_two(sm: SimplifiedMarket) -> dict[str, Fraction]:
    """Ordering-only pricing of a residual market whose items are legal to two players each."""
    _check_two_legal(sm)
    alloc = legal_allocation(sm)
    if alloc is None:
        raise PreconditionError("market has no legal allocation")
    graph = build_legality_graph(sm, alloc)
    cs = find_cycle_structure(graph)
    emit("cycle_structure", sm, cs)
    if cs.kind == ODD_CYCLE_PAIR:
        graph = build_legality_graph(sm, reallocate(graph, cs.cycles[1]))
        cs = find_cycle_structure(graph)
        if cs.kind != REMOVABLE_CYCLE:
            raise InternalInvariantError("reallocating along an odd cycle pair left no removable cycle")
        emit("cycle_structure", sm, cs)
    removed = cs.items
    sub = induced_submarket(sm, cs.allocation, set(sm.items) - set(removed))
    prices = into_band(price_submarket(sub, fine_two), Fraction(1, 4), Fraction(3, 4))
    # removed[j] is x_{j+1}: odd-indexed items go high, even-indexed low
    prices.update(spread(removed[1::2], Fraction(0), Fraction(1, 4)))
    prices.update(spread(removed[0::2], Fraction(3, 4), Fraction(1)))
    return prices


def price_two_allocations(sm: SimplifiedMarket, strict: bool = True) -> dict[str, Fraction]:
    """Distinct prices in (0, 1) forming a dynamic pricing of ``sm``.

    ``strict`` requires at most two optimal allocations; otherwise it is
    enough that every item is legal to at most two players.
    """
    if strict:
        if count_optimal_allocations(sm, limit=2) > 2:
            raise UnsupportedRegimeError("more than two optimal allocations")
    else:
        _check_two_legal(sm)
    return price_submarket(sm, fine_two)
