"""Ground truth for pricing: the dynamic-pricing check, brute-force search and
simulation of buyers arriving in adversarial order.

Nothing here depends on how prices were produced.  The check relies only on
demand sets and the matching oracles.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import permutations
from typing import Callable, Iterable, Mapping, Sequence

from .errors import PreconditionError, PricingError
from .market import (
    Market,
    SimplifiedMarket,
    bundle_value,
    check_prices,
    demand_bundles,
    sorted_bundles,
)
from .matching import check_standing_assumption, extends, max_welfare

Pricer = Callable[[Market], Mapping[str, Fraction]]
TiePolicy = Callable[[list], frozenset]


@dataclass(frozen=True)
class VerificationReport:
    accepted: bool
    counterexample: tuple[str, frozenset] | None = None

    def __bool__(self) -> bool:
        return self.accepted


def is_dynamic_pricing(
    market: Market | SimplifiedMarket, prices: Mapping[str, Fraction]
) -> VerificationReport:
    """Accept iff every demanded bundle of every player is exactly that
    player's share in some optimal allocation.

    A buyer leaves after one purchase, so a bundle smaller than the buyer's
    demand can never be completed and is rejected.
    """
    check_prices(market, prices)
    for p, k in zip(market.players, market.demand):
        for b in sorted_bundles(market, demand_bundles(market, p, prices)):
            if len(b) != k or not extends(market, {x: p for x in b}):
                return VerificationReport(False, (p, b))
    return VerificationReport(True)


def brute_force_pricing(sm: SimplifiedMarket, bound: int = 6) -> dict[str, Fraction] | None:
    """First item ordering, cheapest first, that passes :func:`is_dynamic_pricing`.

    Orderings are scanned lexicographically in canonical item order and
    realized as the prices ``1/(m+1), ..., m/(m+1)``.
    """
    if sm.m > bound:
        raise PreconditionError(f"{sm.m} items exceed the brute-force bound {bound}")
    grid = [Fraction(j + 1, sm.m + 1) for j in range(sm.m)]
    for order in permutations(sm.items):
        prices = dict(zip(order, grid))
        if is_dynamic_pricing(sm, prices):
            return prices
    return None


# ---------------------------------------------------------------- simulation


def residual_after(market: Market, player: str, bundle: Iterable[str]) -> Market:
    """The market left once ``player`` has bought ``bundle`` and left."""
    sold = frozenset(bundle)
    j = market.player_index(player)
    keep_items = [t for t, x in enumerate(market.items) if x not in sold]
    keep_players = [q for q in range(market.n) if q != j]
    return Market(
        tuple(market.items[t] for t in keep_items),
        tuple(market.players[q] for q in keep_players),
        tuple(market.demand[q] for q in keep_players),
        tuple(tuple(market.values[q][t] for t in keep_items) for q in keep_players),
    )


@dataclass(frozen=True)
class Step:
    player: str
    prices: Mapping[str, Fraction]
    bundle: frozenset
    residual: Market | None


@dataclass(frozen=True)
class SimulationTrace:
    steps: tuple[Step, ...]
    final_welfare: Fraction
    optimum: Fraction
    failure: str | None = None

    @property
    def optimal(self) -> bool:
        return self.failure is None and self.final_welfare == self.optimum


def first_bundle(bundles: list) -> frozenset:
    return bundles[0]


def _default_pricer() -> Pricer:
    from .dispatch import simulation_pricer

    return simulation_pricer


def _advance(market: Market, player: str, bundle: frozenset) -> Market:
    nxt = residual_after(market, player, bundle)
    if nxt.m:
        check_standing_assumption(nxt)
    return nxt


def simulate(
    market: Market,
    order: Sequence[str],
    tie_policy: TiePolicy = first_bundle,
    pricer: Pricer | None = None,
) -> SimulationTrace:
    """Buyers arrive in ``order``; prices are recomputed before each arrival."""
    pricer = pricer or _default_pricer()
    if sorted(order) != sorted(market.players):
        raise PreconditionError("order must be a permutation of the players")
    optimum = max_welfare(market)
    steps: list[Step] = []
    welfare = Fraction(0)
    current: Market | None = market
    for p in order:
        try:
            prices = dict(pricer(current))
            check_prices(current, prices)
        except PricingError as exc:
            return SimulationTrace(tuple(steps), welfare, optimum, f"pricing failed: {exc}")
        choices = sorted_bundles(current, demand_bundles(current, p, prices))
        bundle = tie_policy(choices)
        welfare += bundle_value(current, p, bundle)
        try:
            nxt = _advance(current, p, bundle)
        except PricingError as exc:
            steps.append(Step(p, prices, bundle, None))
            return SimulationTrace(tuple(steps), welfare, optimum, f"invalid residual: {exc}")
        steps.append(Step(p, prices, bundle, nxt))
        current = nxt
    return SimulationTrace(tuple(steps), welfare, optimum)


@dataclass
class SweepReport:
    """Outcome of exploring every arrival order and every tie-break."""

    ok: bool
    optimum: Fraction
    min_welfare: Fraction
    max_welfare: Fraction
    branches: int
    complete: bool
    witness: tuple[tuple[str, frozenset], ...] | None = None
    failures: list[str] = field(default_factory=list)

    def __bool__(self) -> bool:
        return self.ok


class _Budget(Exception):
    pass


def adversarial_sweep(
    market: Market,
    pricer: Pricer | None = None,
    budget: int = 200_000,
    orders: Iterable[Sequence[str]] | None = None,
    all_ties: bool = True,
) -> SweepReport:
    """Welfare reached under every arrival order and tie-break.

    States are residual markets; a state's outcome does not depend on the
    path that reached it, so results are memoized.  ``orders`` restricts the
    adversary to the given permutations, ``all_ties=False`` to the first
    demanded bundle.
    """
    pricer = pricer or _default_pricer()
    optimum = max_welfare(market)
    price_cache: dict[Market, Mapping[str, Fraction] | str] = {}
    memo: dict[tuple, tuple] = {}
    failures: list[str] = []
    expanded = [0]

    def prices_for(m: Market) -> Mapping[str, Fraction] | str:
        if m not in price_cache:
            try:
                pr = dict(pricer(m))
                check_prices(m, pr)
                price_cache[m] = pr
            except PricingError as exc:
                price_cache[m] = f"pricing failed: {type(exc).__name__}: {exc}"
        return price_cache[m]

    def explore(m: Market, allowed: tuple[tuple[str, ...], ...]) -> tuple:
        """(min future welfare, max future welfare, leaves, worst path)."""
        key = (m, allowed)
        if key in memo:
            return memo[key]
        if m.n == 0:
            return (Fraction(0), Fraction(0), 1, ())
        expanded[0] += 1
        if expanded[0] > budget:
            raise _Budget
        prices = prices_for(m)
        if isinstance(prices, str):
            failures.append(prices)
            res = (Fraction(0), Fraction(0), 1, (("!", frozenset()),))
            memo[key] = res
            return res
        best = worst = None
        leaves = 0
        worst_path: tuple = ()
        nexts = sorted({o[0] for o in allowed}, key=m.player_index)
        for p in nexts:
            rest = tuple(o[1:] for o in allowed if o[0] == p)
            choices = sorted_bundles(m, demand_bundles(m, p, prices))
            if not all_ties:
                choices = choices[:1]
            for b in choices:
                gain = bundle_value(m, p, b)
                try:
                    nxt = _advance(m, p, b)
                    lo, hi, cnt, path = explore(nxt, rest)
                except PricingError as exc:
                    failures.append(f"invalid residual after {p} buys {sorted(b)}: {exc}")
                    lo = hi = Fraction(0)
                    cnt, path = 1, (("!", frozenset()),)
                lo += gain
                hi += gain
                leaves += cnt
                if worst is None or lo < worst:
                    worst = lo
                    worst_path = ((p, b),) + path
                if best is None or hi > best:
                    best = hi
        res = (worst, best, leaves, worst_path)
        memo[key] = res
        return res

    if orders is None:
        order_set = tuple(permutations(market.players))
    else:
        order_set = tuple(tuple(o) for o in orders)
    try:
        lo, hi, leaves, path = explore(market, order_set)
    except _Budget:
        return SweepReport(False, optimum, Fraction(0), Fraction(0), expanded[0], False, None, failures)
    ok = not failures and lo == optimum
    return SweepReport(ok, optimum, lo, hi, leaves, True, None if ok else path, failures)
