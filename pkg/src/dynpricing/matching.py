"""Matching oracles: maximum welfare, optimal allocations, legality, extendability.

Valued markets are handled by a maximum-weight assignment (Hungarian
method) between items and player clones.  Values are scaled by the least
common denominator so the assignment runs over Python integers; every
comparison stays exact.

Simplified markets are handled by cardinality matching on the legality
bipartite graph.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from math import lcm
from typing import Iterable, Mapping, Sequence

from .errors import (
    AllocationOverflow,
    AssumptionViolationError,
    InvalidMarketError,
    PreconditionError,
)
from .market import Allocation, Market, SimplifiedMarket


def _assignment(weights: Sequence[Sequence[int]], n_cols: int) -> int:
    """Maximum total weight when every row takes a distinct column.

    Shortest augmenting path form of the Hungarian method; requires
    ``len(weights) <= n_cols``.
    """
    n = len(weights)
    if n == 0:
        return 0
    if n > n_cols:
        raise InvalidMarketError("more items than demand slots")
    big = 1
    for row in weights:
        for w in row:
            big = max(big, abs(w))
    inf = big * 4 * (n + n_cols + 1) + 1
    u = [0] * (n + 1)
    v = [0] * (n_cols + 1)
    p = [0] * (n_cols + 1)
    way = [0] * (n_cols + 1)
    for i in range(1, n + 1):
        p[0] = i
        j0 = 0
        minv = [inf] * (n_cols + 1)
        used = [False] * (n_cols + 1)
        while True:
            used[j0] = True
            i0 = p[j0]
            row = weights[i0 - 1]
            delta = inf
            j1 = 0
            ui0 = u[i0]
            for j in range(1, n_cols + 1):
                if not used[j]:
                    cur = -row[j - 1] - ui0 - v[j]
                    if cur < minv[j]:
                        minv[j] = cur
                        way[j] = j0
                    if minv[j] < delta:
                        delta = minv[j]
                        j1 = j
            for j in range(n_cols + 1):
                if used[j]:
                    u[p[j]] += delta
                    v[j] -= delta
                else:
                    minv[j] -= delta
            j0 = j1
            if p[j0] == 0:
                break
        while j0:
            j1 = way[j0]
            p[j0] = p[j1]
            j0 = j1
    return sum(weights[p[j] - 1][j - 1] for j in range(1, n_cols + 1) if p[j])


class _Scaled:
    """Integer copy of a market's valuation matrix."""

    def __init__(self, market: Market) -> None:
        self.market = market
        self.scale = lcm(1, *(v.denominator for row in market.values for v in row))
        self.w = [[int(v * self.scale) for v in row] for row in market.values]

    def welfare(self, items: Iterable[int], caps: Sequence[int]) -> int:
        """Best scaled welfare assigning ``items`` to players with capacities ``caps``."""
        cols = [j for j, c in enumerate(caps) for _ in range(c)]
        rows = [[self.w[j][t] for j in cols] for t in items]
        return _assignment(rows, len(cols))


@lru_cache(maxsize=8192)
def _scaled(market: Market) -> _Scaled:
    return _Scaled(market)


@lru_cache(maxsize=8192)
def _scaled_optimum(market: Market) -> int:
    return _scaled(market).welfare(range(market.m), market.demand)


def max_welfare(market: Market) -> Fraction:
    """Maximum social welfare over all allocations."""
    if isinstance(market, SimplifiedMarket):
        market = market.market
    s = _scaled(market)
    return Fraction(_scaled_optimum(market), s.scale)


def _forced_split(market: Market | SimplifiedMarket, forced: Mapping[str, str]) -> tuple[list[int], list[int]]:
    """Indices of free items and residual capacities after ``forced``."""
    caps = list(market.demand)
    for x, p in forced.items():
        market.item_index(x)
        j = market.player_index(p)
        caps[j] -= 1
        if caps[j] < 0:
            raise PreconditionError(f"forced assignment exceeds the demand of {p!r}")
    free = [t for t, x in enumerate(market.items) if x not in forced]
    return free, caps


def _valued_extends(market: Market, forced: Mapping[str, str]) -> bool:
    s = _scaled(market)
    free, caps = _forced_split(market, forced)
    got = sum(s.w[market.player_index(p)][market.item_index(x)] for x, p in forced.items())
    return got + s.welfare(free, caps) == _scaled_optimum(market)


# ---------------------------------------------------------------- simplified


def _clone_matching(
    sm: SimplifiedMarket, free: Sequence[int], caps: Sequence[int]
) -> tuple[list[int], list[int | None], dict[int, int]]:
    """Maximum matching of player clones into free items (Kuhn's algorithm).

    Returns the clone owners, the item matched to each clone and the
    reverse map item -> clone.
    """
    clones = [j for j, c in enumerate(caps) for _ in range(c)]
    free_set = set(free)
    adj = [
        [t for t in free if sm.items[t] in sm.legal[j]]
        for j in range(sm.n)
    ]
    match_item: list[int | None] = [None] * len(clones)
    match_clone: dict[int, int] = {}

    def augment(c: int, seen: set[int]) -> bool:
        for t in adj[clones[c]]:
            if t in seen:
                continue
            seen.add(t)
            if t not in match_clone or augment(match_clone[t], seen):
                match_clone[t] = c
                match_item[c] = t
                return True
        return False

    for c in range(len(clones)):
        augment(c, set())
    assert set(match_clone) <= free_set
    return clones, match_item, match_clone


def _simplified_extends(sm: SimplifiedMarket, forced: Mapping[str, str]) -> bool:
    for x, p in forced.items():
        if x not in sm.L(p):
            return False
    free, caps = _forced_split(sm, forced)
    if len(free) != sum(caps):
        return False
    _, match_item, _ = _clone_matching(sm, free, caps)
    return all(t is not None for t in match_item)


def can_allocate(sm: SimplifiedMarket, items: Iterable[str], players: Iterable[str]) -> bool:
    """Whether ``players`` can take exactly their demands out of ``items``, legally."""
    chosen = set(players)
    caps = [k if p in chosen else 0 for p, k in zip(sm.players, sm.demand)]
    free = sorted(sm.item_index(x) for x in set(items))
    if len(free) != sum(caps):
        return False
    _, match_item, _ = _clone_matching(sm, free, caps)
    return all(t is not None for t in match_item)


def has_exact_legality(sm: SimplifiedMarket) -> bool:
    """Whether every declared legal pair lies in some legal allocation.

    Equivalently, the 0/1 market built from ``sm`` has exactly the declared
    legality sets.
    """
    if legal_allocation(sm) is None:
        return False
    return all(_simplified_extends(sm, {x: p}) for p in sm.players for x in sm.L(p))


def legal_allocation(sm: SimplifiedMarket, forced: Mapping[str, str] | None = None) -> Allocation | None:
    """Some allocation giving every player ``k_i`` legal items, or None."""
    forced = dict(forced or {})
    for x, p in forced.items():
        if x not in sm.L(p):
            return None
    free, caps = _forced_split(sm, forced)
    clones, match_item, _ = _clone_matching(sm, free, caps)
    if any(t is None for t in match_item):
        return None
    bundles: dict[str, set[str]] = {p: set() for p in sm.players}
    for x, p in forced.items():
        bundles[p].add(x)
    for c, t in enumerate(match_item):
        bundles[sm.players[clones[c]]].add(sm.items[t])
    return Allocation(bundles)


@dataclass(frozen=True)
class HallCertificate:
    """Players whose residual demand exceeds the free items legal to them."""

    deficient_players: frozenset
    reachable_items: frozenset
    residual_demand: int = field(default=0)

    def __post_init__(self) -> None:
        if len(self.reachable_items) >= self.residual_demand:
            raise InvalidMarketError("not a deficiency witness")


def hall_violator(sm: SimplifiedMarket, forced: Mapping[str, str]) -> HallCertificate | None:
    """A Hall deficiency certificate for the market left after ``forced``.

    Grows the alternating-path closure from an unmatched clone of a maximum
    matching; the players reached, and every free item legal to them, form
    the certificate.  Returns None when the forced pairs extend to a legal
    allocation.
    """
    for x, p in forced.items():
        if x not in sm.L(p):
            raise PreconditionError(f"item {x!r} is not legal to {p!r}")
    free, caps = _forced_split(sm, forced)
    clones, match_item, match_clone = _clone_matching(sm, free, caps)
    unmatched = [c for c, t in enumerate(match_item) if t is None]
    if not unmatched:
        return None
    free_set = set(free)
    seen_players = {clones[unmatched[0]]}
    seen_items: set[int] = set()
    frontier = [clones[unmatched[0]]]
    while frontier:
        j = frontier.pop()
        for x in sm.legal[j]:
            t = sm.item_index(x)
            if t not in free_set or t in seen_items:
                continue
            seen_items.add(t)
            owner = clones[match_clone[t]]
            if owner not in seen_players:
                seen_players.add(owner)
                frontier.append(owner)
    players = frozenset(sm.players[j] for j in seen_players)
    return HallCertificate(
        players,
        frozenset(sm.items[t] for t in seen_items),
        sum(caps[j] for j in seen_players),
    )


# ---------------------------------------------------------------- legality


@dataclass(frozen=True, eq=False)
class LegalityInfo:
    """Maximum welfare, legal sets ``K_i`` and always-assigned sets ``R_i``."""

    max_welfare: Fraction
    legal: Mapping[str, frozenset]
    exclusive: Mapping[str, frozenset]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, LegalityInfo):
            return NotImplemented
        return (
            self.max_welfare == other.max_welfare
            and dict(self.legal) == dict(other.legal)
            and dict(self.exclusive) == dict(other.exclusive)
        )


def check_standing_assumption(market: Market) -> None:
    """Raise unless every optimal allocation hands out every item.

    Dropping item ``x`` from the market must strictly lower the optimum;
    otherwise an optimal allocation leaves ``x`` unassigned (or assigns it
    at value zero).
    """
    s = _scaled(market)
    best = _scaled_optimum(market)
    if best == 0 and market.m:
        raise AssumptionViolationError("all valuations are zero")
    everything = list(range(market.m))
    for t in everything:
        rest = everything[:t] + everything[t + 1:]
        if s.welfare(rest, market.demand) >= best:
            raise AssumptionViolationError(
                f"item {market.items[t]!r} is unassigned by some optimal allocation"
            )


@lru_cache(maxsize=8192)
def legality(market: Market) -> LegalityInfo:
    """Legal and always-assigned items of every player.

    One forced query per (player, item): ``x`` is legal to ``i`` iff
    ``v_i(x)`` plus the optimum of the market without ``x`` and with one
    fewer slot for ``i`` reaches the overall optimum.
    """
    if isinstance(market, SimplifiedMarket):
        market = market.market
    check_standing_assumption(market)
    s = _scaled(market)
    best = _scaled_optimum(market)
    everything = list(range(market.m))
    legal: dict[str, frozenset] = {}
    for j, p in enumerate(market.players):
        caps = list(market.demand)
        caps[j] -= 1
        row = []
        for t in everything:
            if s.w[j][t] <= 0:
                continue
            rest = everything[:t] + everything[t + 1:]
            if s.w[j][t] + s.welfare(rest, caps) == best:
                row.append(market.items[t])
        legal[p] = frozenset(row)
    exclusive = {
        p: legal[p] - frozenset().union(*(legal[q] for q in market.players if q != p))
        for p in market.players
    }
    return LegalityInfo(Fraction(best, s.scale), legal, exclusive)


def is_extendable(market: Market | SimplifiedMarket, forced: Mapping[str, str]) -> bool:
    """Whether some optimal (legal) allocation contains every forced pair.

    Every forced pair must be legal; use :func:`extends` for arbitrary pairs.
    """
    if isinstance(market, SimplifiedMarket):
        for x, p in forced.items():
            if x not in market.L(p):
                raise PreconditionError(f"item {x!r} is not legal to {p!r}")
        return _simplified_extends(market, forced)
    info = legality(market)
    for x, p in forced.items():
        if x not in info.legal[p]:
            raise PreconditionError(f"item {x!r} is not legal to {p!r}")
    return _valued_extends(market, forced)


def extends(market: Market | SimplifiedMarket, forced: Mapping[str, str]) -> bool:
    """Like :func:`is_extendable` but returns False for illegal pairs."""
    if isinstance(market, SimplifiedMarket):
        return _simplified_extends(market, forced)
    return _valued_extends(market, forced)


# ---------------------------------------------------------------- enumeration


def enumerate_optimal_allocations(market: Market | SimplifiedMarket, limit: int = 1000) -> list[Allocation]:
    """All optimal full allocations, in a deterministic order.

    Depth-first over items in canonical order, trying players in canonical
    order and pruning any partial assignment that no longer extends to an
    optimum.  Raises :class:`AllocationOverflow` once ``limit`` is exceeded.
    For a simplified market the optimal allocations are the legal ones.
    """
    if limit < 1:
        raise PreconditionError("limit must be positive")
    if isinstance(market, SimplifiedMarket):
        ok = _simplified_extends
    else:
        check_standing_assumption(market)
        ok = _valued_extends
    found: list[Allocation] = []
    forced: dict[str, str] = {}
    load = [0] * market.n

    def walk(t: int) -> None:
        if t == market.m:
            bundles: dict[str, list[str]] = {}
            for x, p in forced.items():
                bundles.setdefault(p, []).append(x)
            found.append(Allocation(bundles))
            if len(found) > limit:
                raise AllocationOverflow(limit, found[:limit])
            return
        x = market.items[t]
        for j, p in enumerate(market.players):
            if load[j] == market.demand[j]:
                continue
            forced[x] = p
            load[j] += 1
            if ok(market, forced):
                walk(t + 1)
            load[j] -= 1
            del forced[x]

    if market.m == 0:
        return [Allocation()]
    walk(0)
    return found


def count_optimal_allocations(market: Market | SimplifiedMarket, limit: int) -> int:
    """Number of optimal allocations, capped at ``limit + 1``."""
    try:
        return len(enumerate_optimal_allocations(market, limit))
    except AllocationOverflow:
        return limit + 1
