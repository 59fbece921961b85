"""Dynamic pricing fixed at a chosen item for markets with demands at most three.

Every market handled here has exact legality: a declared legal pair lies in
some legal allocation.  Recursive calls split the market into smaller ones
with the same property, price each one fixed at a suitable item and
interleave the results in bands of (0, 1).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations, product
from typing import Iterator, Mapping

from .errors import InternalInvariantError, PreconditionError, UnsupportedRegimeError
from .market import SimplifiedMarket
from .matching import can_allocate, extends, hall_violator, has_exact_legality, legal_allocation
from .ordering import break_ties_unit
from .pipeline import emit, price_submarket

MAX_DEMAND = 3
F = Fraction


@dataclass(frozen=True)
class SubmarketPair:
    """Partition of a market into ``B = (items_b, players_b)`` and ``C``.

    ``B`` holds one spare item beyond its players' demand, two when
    ``generalized``.
    """

    items_b: frozenset
    players_b: frozenset
    items_c: frozenset
    players_c: frozenset
    generalized: bool = False

    @property
    def spare(self) -> int:
        return 2 if self.generalized else 1


@dataclass(frozen=True)
class FixedPricing:
    prices: Mapping[str, Fraction]
    fixed_item: str

    def __post_init__(self) -> None:
        p = self.prices
        if len(set(p.values())) != len(p):
            raise InternalInvariantError("fixed pricing has equal prices")
        if any(not 0 < v < 1 for v in p.values()):
            raise InternalInvariantError("fixed pricing leaves (0, 1)")
        if any(v <= p[self.fixed_item] for x, v in p.items() if x != self.fixed_item):
            raise InternalInvariantError(f"{self.fixed_item!r} is not strictly cheapest")


# ---------------------------------------------------------------- submarket pairs


def crossover(sm: SimplifiedMarket, pair: SubmarketPair) -> list[str]:
    """Items of ``B`` legal to some player of ``C``, in canonical order."""
    return sm.sort_items(sm.L_of(pair.players_c, pair.items_b))


def is_submarket_pair(sm: SimplifiedMarket, pair: SubmarketPair) -> bool:
    """Check the defining conditions of a (generalized) submarket pair."""
    xb, xc, ib, ic = pair.items_b, pair.items_c, pair.players_b, pair.players_c
    if xb & xc or xb | xc != set(sm.items) or not xb or not xc:
        return False
    if ib & ic or ib | ic != set(sm.players) or not ib or not ic:
        return False
    if not sm.L_of(ib) <= xb:
        return False
    s = pair.spare
    if len(xb) - s != sum(sm.k(p) for p in ib) or len(xc) + s != sum(sm.k(p) for p in ic):
        return False
    cross = crossover(sm, pair)
    if len(cross) < s + 1:
        return False
    for moved in combinations(cross, s):
        if not can_allocate(sm, xb - set(moved), ib) or not can_allocate(sm, xc | set(moved), ic):
            return False
    return True


def _pair_for(sm: SimplifiedMarket, players_b: frozenset, generalized: bool) -> SubmarketPair:
    xb = sm.L_of(players_b)
    return SubmarketPair(
        xb, players_b, frozenset(sm.items) - xb, frozenset(sm.players) - players_b, generalized
    )


def maximal_pair(sm: SimplifiedMarket, pair: SubmarketPair) -> SubmarketPair:
    """The pair with the largest ``B`` whose items contain those of ``pair``.

    In a valid pair every item of ``B`` is legal to a player of ``B`` (each
    crossover item can be the one left out), so ``B`` is determined by its
    players and a search over player subsets covers every candidate.
    """
    best = pair
    players = sm.players
    for size in range(1, len(players)):
        for chosen in combinations(players, size):
            cand = _pair_for(sm, frozenset(chosen), pair.generalized)
            if len(cand.items_b) > len(best.items_b) and pair.items_b <= cand.items_b:
                if is_submarket_pair(sm, cand):
                    best = cand
    return best


def _respects_demand(sm: SimplifiedMarket, forced: Mapping[str, str]) -> bool:
    counts: dict[str, int] = {}
    for p in forced.values():
        counts[p] = counts.get(p, 0) + 1
    return all(c <= sm.k(p) for p, c in counts.items())


def find_submarket_pair(sm: SimplifiedMarket, witness: Mapping[str, str]) -> SubmarketPair:
    """Maximal (generalized) submarket pair grown from a non-extendable assignment.

    ``witness`` maps two items (plain pair) or three items (generalized
    pair) to players that may legally hold them.
    """
    if any(x not in sm.L(p) for x, p in witness.items()) or not _respects_demand(sm, witness):
        raise PreconditionError("witness is not a legal assignment respecting demand")
    cert = hall_violator(sm, witness)
    if cert is None:
        raise PreconditionError("witness extends to a legal allocation")
    if len(witness) not in (2, 3):
        raise PreconditionError("witness must assign two or three items")
    generalized = len(witness) == 3
    xb = frozenset(cert.reachable_items) | frozenset(witness)
    ib = frozenset(cert.deficient_players)
    pair = SubmarketPair(xb, ib, frozenset(sm.items) - xb, frozenset(sm.players) - ib, generalized)
    if not is_submarket_pair(sm, pair):
        raise InternalInvariantError("Hall certificate does not give a submarket pair")
    return maximal_pair(sm, pair)


def _assignments(sm: SimplifiedMarket, items: tuple[str, ...]) -> Iterator[dict[str, str]]:
    for owners in product(*(sm.legal_players(x) for x in items)):
        forced = dict(zip(items, owners))
        if _respects_demand(sm, forced):
            yield forced


def non_extendable_pair_witness(sm: SimplifiedMarket) -> dict[str, str] | None:
    """First legal, demand-respecting assignment of two items that does not extend."""
    for items in combinations(sm.items, 2):
        for forced in _assignments(sm, items):
            if not extends(sm, forced):
                return forced
    return None


def non_extendable_triple_witness(sm: SimplifiedMarket, item: str) -> dict[str, str] | None:
    """Same for three items, one of which is ``item``."""
    rest = [x for x in sm.items if x != item]
    for pair in combinations(rest, 2):
        for forced in _assignments(sm, (item,) + pair):
            if not extends(sm, forced):
                return forced
    return None


# ---------------------------------------------------------------- pricing


def _artificial_id(sm: SimplifiedMarket) -> str:
    j = len(sm.players)
    while f"~a{j}" in sm.players:
        j += 1
    return f"~a{j}"


def _demand(sm: SimplifiedMarket, players) -> dict[str, int]:
    return {p: sm.k(p) for p in sm.players if p in players}


def _b_prime(sm: SimplifiedMarket, pair: SubmarketPair) -> SimplifiedMarket:
    art = _artificial_id(sm)
    demand = _demand(sm, pair.players_b)
    demand[art] = pair.spare
    cross = sm.L_of(pair.players_c, pair.items_b)
    return sm.submarket(pair.items_b, demand, extra_legal={art: cross})


def _c_prime(sm: SimplifiedMarket, pair: SubmarketPair, added) -> SimplifiedMarket:
    return sm.submarket(pair.items_c | set(added), _demand(sm, pair.players_c))


def _sub(sm: SimplifiedMarket, items, demand: Mapping[str, int]) -> SimplifiedMarket:
    return sm.submarket(items, {p: k for p, k in demand.items() if k > 0})


def exact_legality(sm: SimplifiedMarket) -> SimplifiedMarket:
    """``sm`` with each legality set cut down to the pairs in some legal allocation."""
    if legal_allocation(sm) is None:
        raise InternalInvariantError("submarket has no legal allocation")
    legal = tuple(
        frozenset(x for x in row if extends(sm, {x: p})) for p, row in zip(sm.players, sm.legal)
    )
    return SimplifiedMarket(sm.items, sm.players, sm.demand, legal)


def _recurse(sub: SimplifiedMarket, item: str) -> dict[str, Fraction]:
    # A unit-demand player of C that alone holds the added crossover item
    # cannot take its other items; those pairs are dropped before recursing.
    if not has_exact_legality(sub):
        sub = exact_legality(sub)
    return _fixed(sub, item)


def _two_player(sm: SimplifiedMarket, xf: str) -> dict[str, Fraction]:
    l1, l2 = (sm.L(p) for p in sm.players)
    prices = {}
    for x in sm.items:
        if x == xf:
            prices[x] = F(1, 5)
        elif x in l1 and x in l2:
            prices[x] = F(4, 5)
        else:
            prices[x] = F(1, 2)
    return prices


def _unit_branch(sm: SimplifiedMarket, xf: str) -> dict[str, Fraction] | None:
    for hat_i in sm.players:
        if sm.k(hat_i) != 1:
            continue
        others = {p: sm.k(p) for p in sm.players if p != hat_i}
        if sm.L(hat_i) == {xf}:
            sub = _sub(sm, set(sm.items) - {xf}, others)
            inner = _recurse(sub, sub.items[0]) if sub.items else {}
            prices = {x: F(1, 5) + F(4, 5) * p for x, p in inner.items()}
            prices[xf] = F(1, 5)
            return prices
        for hat_x in sm.sort_items(sm.L(hat_i) - {xf}):
            sub = _sub(sm, set(sm.items) - {hat_x}, others)
            # only usable when removing hat_x keeps legality exact
            if not has_exact_legality(sub):
                continue
            prices = {x: F(4, 5) * p for x, p in _fixed(sub, xf).items()}
            prices[hat_x] = F(4, 5)
            return prices
    return None


def _pair_branch(sm: SimplifiedMarket, xf: str, witness: Mapping[str, str]) -> dict[str, Fraction]:
    pair = find_submarket_pair(sm, witness)
    emit("submarket_pair", sm, pair)
    cross = crossover(sm, pair)
    b_market = _b_prime(sm, pair)
    prices: dict[str, Fraction] = {}
    if xf in cross:
        pb = _recurse(b_market, xf)
        pc = _recurse(_c_prime(sm, pair, {xf}), xf)
        prices.update({x: F(1, 2) * p for x, p in pc.items()})
        prices.update({x: F(1, 2) + F(1, 2) * pb[x] for x in pair.items_b - {xf}})
    elif xf in pair.items_b:
        pb = _recurse(b_market, xf)
        y = min(cross, key=pb.__getitem__)
        pc = _recurse(_c_prime(sm, pair, {y}), y)
        for x in pair.items_b:
            prices[x] = F(2, 5) * pb[x] if pb[x] <= pb[y] else F(4, 5) + F(1, 5) * pb[x]
        prices.update({x: F(2, 5) + F(2, 5) * pc[x] for x in pair.items_c})
    else:
        y = cross[0]
        pb = _recurse(b_market, y)
        pc = _recurse(_c_prime(sm, pair, {y}), xf)
        prices.update({x: F(1, 2) * p for x, p in pc.items()})
        prices.update({x: F(1, 2) + F(1, 2) * pb[x] for x in pair.items_b - {y}})
    return prices


def _triple_branch(sm: SimplifiedMarket, xf: str, witness: Mapping[str, str]) -> dict[str, Fraction]:
    pair = find_submarket_pair(sm, witness)
    emit("submarket_pair", sm, pair)
    if xf not in pair.items_b:
        raise InternalInvariantError("fixed item fell outside the generalized pair")
    pb = _recurse(_b_prime(sm, pair), xf)
    y1, y2 = sorted(crossover(sm, pair), key=pb.__getitem__)[:2]
    pc = _recurse(_c_prime(sm, pair, {y1, y2}), y1)
    prices: dict[str, Fraction] = {}
    for x in pair.items_b:
        if pb[x] <= pb[y1]:
            prices[x] = F(1, 5) * pb[x]
        elif pb[x] <= pb[y2]:
            prices[x] = F(2, 5) + F(1, 5) * pb[x]
        else:
            prices[x] = F(4, 5) + F(1, 5) * pb[x]
    for x in pair.items_c:
        if pc[x] < pc[y2]:
            prices[x] = F(1, 5) + F(1, 5) * pc[x]
        else:
            prices[x] = F(3, 5) + F(1, 5) * pc[x]
    return prices


def _drop_branch(sm: SimplifiedMarket, xf: str) -> dict[str, Fraction]:
    i_x = sm.legal_players(xf)[0]
    if sm.k(i_x) == 1:
        raise InternalInvariantError("unit-demand player left for the final branch")
    demand = {p: sm.k(p) - (p == i_x) for p in sm.players}
    sub = _sub(sm, set(sm.items) - {xf}, demand)
    inner = _recurse(sub, sub.items[0])
    prices = {x: F(1, 5) + F(4, 5) * p for x, p in inner.items()}
    prices[xf] = F(1, 5)
    return prices


def _fixed(sm: SimplifiedMarket, xf: str) -> dict[str, Fraction]:
    """Distinct prices in (0, 1), cheapest at ``xf``, forming a dynamic pricing of ``sm``."""
    if sm.n == 2:
        prices = _two_player(sm, xf)
    elif sm.m <= 2:
        prices = {x: F(1, 5) if x == xf else F(4, 5) for x in sm.items}
    else:
        prices = _unit_branch(sm, xf)
        if prices is None:
            witness = non_extendable_pair_witness(sm)
            if witness is not None:
                prices = _pair_branch(sm, xf, witness)
            else:
                witness = non_extendable_triple_witness(sm, xf)
                if witness is not None:
                    prices = _triple_branch(sm, xf, witness)
                else:
                    prices = _drop_branch(sm, xf)
    order = [xf] + [x for x in sm.items if x != xf]
    return dict(FixedPricing(break_ties_unit(prices, order), xf).prices)


def _check_demands(sm: SimplifiedMarket) -> None:
    if any(k > MAX_DEMAND for k in sm.demand):
        raise UnsupportedRegimeError(f"demand above {MAX_DEMAND}")


def price_fixed_at(sm: SimplifiedMarket, item: str) -> FixedPricing:
    """Dynamic pricing of ``sm`` in which ``item`` is strictly cheapest."""
    _check_demands(sm)
    sm.item_index(item)
    if not has_exact_legality(sm):
        raise PreconditionError("declared legality differs from the legal allocations")
    return FixedPricing(_fixed(sm, item), item)


def fine_tridemand(sm: SimplifiedMarket, item: str | None = None) -> dict[str, Fraction]:
    """Fine pricing of a residual market, fixed at ``item`` or its first item."""
    _check_demands(sm)
    if not sm.items:
        return {}
    return _fixed(sm, sm.items[0] if item is None else item)


def price_tridemand(sm: SimplifiedMarket) -> dict[str, Fraction]:
    """Distinct prices in (0, 1) forming a dynamic pricing of ``sm``."""
    _check_demands(sm)
    if sm.items and has_exact_legality(sm):
        return price_fixed_at(sm, sm.items[0]).prices
    return price_submarket(sm, fine_tridemand)
