"""Brute-force reference implementations used to derive expected values.

Nothing here imports the pricing or matching code: allocations, legality,
demand sets and the dynamic-pricing check are all computed by plain
enumeration over full allocations.
"""

from __future__ import annotations

import random
from fractions import Fraction
from itertools import combinations

from dynpricing.market import Market, SimplifiedMarket


def full_allocations(market):
    """Every assignment of all items giving each player exactly its demand."""
    items = list(market.items)
    players = list(market.players)
    caps = list(market.demand)
    bundles = [[] for _ in players]

    def walk(t):
        if t == len(items):
            if all(c == 0 for c in caps):
                yield {p: frozenset(b) for p, b in zip(players, bundles) if b}
            return
        for j in range(len(players)):
            if caps[j]:
                caps[j] -= 1
                bundles[j].append(items[t])
                yield from walk(t + 1)
                bundles[j].pop()
                caps[j] += 1

    yield from walk(0)


def value(market, player, bundle):
    if isinstance(market, SimplifiedMarket):
        return Fraction(len(set(bundle) & market.L(player)))
    row = market.value_map(player)
    vals = sorted((row[x] for x in bundle), reverse=True)
    return sum(vals[: market.k(player)], Fraction(0))


def welfare(market, alloc):
    return sum((value(market, p, b) for p, b in alloc.items()), Fraction(0))


def optimal_allocations(market):
    allocs = list(full_allocations(market))
    best = max(welfare(market, a) for a in allocs)
    return best, [a for a in allocs if welfare(market, a) == best]


def legality_sets(market):
    """(max welfare, legal, exclusive) by enumeration."""
    best, opt = optimal_allocations(market)
    legal = {p: frozenset().union(*(a.get(p, frozenset()) for a in opt)) for p in market.players}
    exclusive = {
        p: frozenset.intersection(*(a.get(p, frozenset()) for a in opt)) for p in market.players
    }
    return best, legal, exclusive


def extends(market, forced):
    """Some optimal allocation gives every forced item to its forced player."""
    _, opt = optimal_allocations(market)
    return any(all(x in a.get(p, ()) for x, p in forced.items()) for a in opt)


def demand_sets(market, player, prices):
    """All utility-maximizing bundles of size at most the player's demand."""
    k = market.k(player)
    best = None
    out = []
    for size in range(k + 1):
        for b in combinations(market.items, size):
            u = value(market, player, b) - sum((prices[x] for x in b), Fraction(0))
            if best is None or u > best:
                best, out = u, [frozenset(b)]
            elif u == best:
                out.append(frozenset(b))
    return best, set(out)


def is_dynamic(market, prices):
    """Every demanded bundle is a player's full share in some optimal allocation."""
    _, opt = optimal_allocations(market)
    for p in market.players:
        shares = {a.get(p, frozenset()) for a in opt}
        _, bundles = demand_sets(market, p, prices)
        if not bundles <= shares:
            return False
    return True


def random_market(rng: random.Random, n_max=4, k_max=3, m_max=8, bound=6, shared=0.4):
    """A saturated market with a planted positive allocation, or None if too large."""
    n = rng.randint(1, n_max)
    ks = [rng.randint(1, k_max) for _ in range(n)]
    m = sum(ks)
    if m > m_max:
        return None
    items = [f"x{t + 1}" for t in range(m)]
    players = [str(j + 1) for j in range(n)]
    common = {x: rng.randint(1, bound) for x in items}
    values = {
        p: {x: (common[x] if rng.random() < shared else rng.choice([0, 0, rng.randint(1, bound)])) for x in items}
        for p in players
    }
    order = items[:]
    rng.shuffle(order)
    start = 0
    for p, k in zip(players, ks):
        for x in order[start:start + k]:
            values[p][x] = common[x]
        start += k
    return Market.build(items, dict(zip(players, ks)), values)


def random_simplified(rng: random.Random, n_max=4, k_max=3, m_max=8, density=0.4):
    """A simplified market with a planted legal allocation, or None if too large."""
    n = rng.randint(1, n_max)
    ks = [rng.randint(1, k_max) for _ in range(n)]
    m = sum(ks)
    if m > m_max:
        return None
    items = [f"x{t + 1}" for t in range(m)]
    players = [str(j + 1) for j in range(n)]
    legal = {p: {x for x in items if rng.random() < density} for p in players}
    order = items[:]
    rng.shuffle(order)
    start = 0
    for p, k in zip(players, ks):
        legal[p].update(order[start:start + k])
        start += k
    return SimplifiedMarket.build(items, dict(zip(players, ks)), {p: sorted(v) for p, v in legal.items()})


def satisfies_assumption(market):
    """Every optimal allocation gives every item a positive value to its holder."""
    _, opt = optimal_allocations(market)
    return all(market.v(p, x) > 0 for a in opt for p, b in a.items() for x in b)


def simple_cycles(succ):
    """Every simple directed cycle, each listed once starting at its least vertex."""
    order = {v: t for t, v in enumerate(succ)}
    out = []

    def walk(start, path, seen):
        for y in succ[path[-1]]:
            if y == start:
                out.append(tuple(path))
            elif order[y] > order[start] and y not in seen:
                seen.add(y)
                path.append(y)
                walk(start, path, seen)
                path.pop()
                seen.discard(y)

    for v in succ:
        walk(v, [v], {v})
    return out


def residual_of(market):
    """Simplified residual market computed from enumerated legality, or None."""
    _, legal, exclusive = legality_sets(market)
    players = [p for p in market.players if legal[p] != exclusive[p]]
    if not players:
        return None
    decided = frozenset().union(*exclusive.values())
    items = [x for x in market.items if x not in decided]
    demand = {p: market.k(p) - len(exclusive[p]) for p in players}
    return SimplifiedMarket.build(items, demand, {p: legal[p] - exclusive[p] for p in players})


def rough_conditions(market, legal, exclusive, prices):
    """The three rough-price conditions plus positivity on legal items."""
    for p in market.players:
        u = {x: market.v(p, x) - prices[x] for x in market.items}
        K, R = legal[p], exclusive[p]
        if any(u[x] <= 0 for x in K):
            return False
        if any(u[x] <= u[y] for x in R for y in market.items if y not in R):
            return False
        if len({u[x] for x in K - R}) > 1:
            return False
        if any(u[x] <= u[y] for x in K for y in market.items if y not in K):
            return False
    return True
