"""Rough prices and the residual market.

Rough prices come from shortest paths in an auxiliary item graph.  They
already separate, for every player, the items it always receives, the
items it may receive and the items it never receives.  What remains is a
residual market whose players value exactly their undecided legal items;
any dynamic pricing of it, scaled below the headroom ``delta``, finishes
the job.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import lcm
from typing import Mapping

from .errors import InternalInvariantError, InvalidMarketError, PreconditionError
from .market import Market, SimplifiedMarket
from .matching import LegalityInfo, legality


@dataclass(frozen=True)
class AuxEdge:
    source: str
    target: str
    player: str
    weight: Fraction
    zero_cycle_member: bool


@dataclass(frozen=True)
class AuxiliaryGraph:
    vertices: tuple[str, ...]
    edges: tuple[AuxEdge, ...]

    def has_cycle(self) -> bool:
        succ: dict[str, set[str]] = {x: set() for x in self.vertices}
        for e in self.edges:
            succ[e.source].add(e.target)
        state = dict.fromkeys(self.vertices, 0)
        for root in self.vertices:
            if state[root]:
                continue
            stack = [(root, iter(succ[root]))]
            state[root] = 1
            while stack:
                node, it = stack[-1]
                nxt = next(it, None)
                if nxt is None:
                    state[node] = 2
                    stack.pop()
                elif state[nxt] == 1:
                    return True
                elif state[nxt] == 0:
                    state[nxt] = 1
                    stack.append((nxt, iter(succ[nxt])))
        return False


def build_auxiliary_graph(market: Market, info: LegalityInfo) -> AuxiliaryGraph:
    """Edge ``x -> y`` for player ``i`` whenever ``x`` is legal to ``i`` and ``y`` is
    not always assigned to ``i``; weight ``v_i(x) - v_i(y)``."""
    edges = []
    for p in market.players:
        K, R = info.legal[p], info.exclusive[p]
        vals = market.value_map(p)
        for x in market.sort_items(K):
            for y in market.items:
                if y == x or y in R:
                    continue
                shared = x not in R and y in K
                edges.append(AuxEdge(x, y, p, vals[x] - vals[y], shared))
    return AuxiliaryGraph(market.items, tuple(edges))


def compute_epsilon(market: Market, graph: AuxiliaryGraph) -> Fraction:
    """Slack below every positive cycle weight and every positive value.

    Cycle weights are sums of value differences, so a positive one is at
    least ``1/D`` with ``D`` the common denominator of all values.  An
    acyclic graph has no cycle at all and imposes no bound.
    """
    positive = [v for row in market.values for v in row if v > 0]
    if not positive:
        raise InvalidMarketError("all valuations are zero")
    eps_v = min(positive)
    bound = eps_v
    if graph.has_cycle():
        denom = lcm(1, *(v.denominator for row in market.values for v in row))
        bound = min(bound, Fraction(1, denom))
    return bound / (market.m + 1)


def rough_prices(market: Market, info: LegalityInfo | None = None) -> dict[str, Fraction]:
    """Shortest-path prices ``-dist(s, x) + eps``.

    Edges that lie on zero-weight cycles keep their weight; every other
    edge is shortened by ``eps``.  Bellman-Ford from a virtual source tied
    to every item at cost 0; a final pass confirms there is no negative
    cycle.
    """
    info = info or legality(market)
    graph = build_auxiliary_graph(market, info)
    eps = compute_epsilon(market, graph)
    best: dict[tuple[str, str], Fraction] = {}
    for e in graph.edges:
        w = e.weight if e.zero_cycle_member else e.weight - eps
        key = (e.source, e.target)
        if key not in best or w < best[key]:
            best[key] = w
    arcs = [(x, y, w) for (x, y), w in best.items()]
    dist = {x: Fraction(0) for x in market.items}
    for _ in range(market.m):
        changed = False
        for x, y, w in arcs:
            if dist[x] + w < dist[y]:
                dist[y] = dist[x] + w
                changed = True
        if not changed:
            break
    for x, y, w in arcs:
        if dist[x] + w < dist[y]:
            raise InternalInvariantError("negative cycle in the auxiliary graph")
    return {x: eps - dist[x] for x in market.items}


def rough_price_violations(
    market: Market, info: LegalityInfo, prices: Mapping[str, Fraction]
) -> list[str]:
    """Human-readable list of broken rough-price conditions (empty if none)."""
    out = []
    for p in market.players:
        vals = market.value_map(p)
        u = {x: vals[x] - prices[x] for x in market.items}
        K, R = info.legal[p], info.exclusive[p]
        mid = K - R
        for x in K:
            if u[x] <= 0:
                out.append(f"{p}: nonpositive utility for legal {x}")
        for x in R:
            for y in market.items:
                if y not in R and not u[x] > u[y]:
                    out.append(f"{p}: u({x}) <= u({y}) with {x} always assigned")
        if len({u[x] for x in mid}) > 1:
            out.append(f"{p}: unequal utilities on undecided legal items")
        for x in K:
            for y in market.items:
                if y not in K and not u[x] > u[y]:
                    out.append(f"{p}: u({x}) <= u({y}) with {y} illegal")
    return out


@dataclass(frozen=True)
class ResidualMarket:
    """Undecided part of a market after rough pricing.

    ``simplified`` is None when every player's legal items are always
    assigned to it; nothing is left to price in that case.
    """

    simplified: SimplifiedMarket | None
    headroom: Fraction
    per_player_headroom: Mapping[str, Fraction]
    base_utility: Mapping[str, Fraction]

    @property
    def trivial(self) -> bool:
        return self.simplified is None


def residual_market(
    market: Market, rough: Mapping[str, Fraction], info: LegalityInfo | None = None
) -> ResidualMarket:
    info = info or legality(market)
    decided = frozenset().union(*info.exclusive.values()) if market.players else frozenset()
    players = [p for p in market.players if info.exclusive[p] != info.legal[p]]
    if not players:
        return ResidualMarket(None, Fraction(1), {}, {})
    headroom: dict[str, Fraction] = {}
    base: dict[str, Fraction] = {}
    for p in players:
        vals = market.value_map(p)
        mid = info.legal[p] - info.exclusive[p]
        utils = {vals[x] - rough[x] for x in mid}
        if len(utils) != 1:
            raise PreconditionError(f"prices are not rough for player {p}")
        (u_star,) = utils
        outside = [vals[y] - rough[y] for y in market.items if y not in info.legal[p]]
        base[p] = u_star
        headroom[p] = u_star - max([Fraction(0)] + outside)
    delta = min(headroom.values())
    if delta <= 0:
        raise InternalInvariantError("nonpositive headroom after rough pricing")
    sm = SimplifiedMarket(
        tuple(x for x in market.items if x not in decided),
        tuple(players),
        tuple(market.k(p) - len(info.exclusive[p]) for p in players),
        tuple(info.legal[p] - info.exclusive[p] for p in players),
    )
    return ResidualMarket(sm, delta, headroom, base)


def combine_prices(
    rough: Mapping[str, Fraction], fine: Mapping[str, Fraction], residual: ResidualMarket
) -> dict[str, Fraction]:
    """``rough + fine`` on residual items, ``rough`` elsewhere."""
    out = dict(rough)
    if residual.trivial:
        if fine:
            raise PreconditionError("fine prices given for an empty residual market")
        return out
    for x in residual.simplified.items:
        f = fine[x]
        if not 0 < f < residual.headroom:
            raise PreconditionError(f"fine price of {x!r} outside (0, delta)")
        out[x] = rough[x] + f
    return out
