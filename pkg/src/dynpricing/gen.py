"""Seeded market generation and the named fixtures used by the tests."""

from __future__ import annotations

import json
import random
from dataclasses import dataclass
from importlib import resources

from .errors import AssumptionViolationError, GenerationError, InvalidReferenceError
from .formats import SIMPLIFIED_VERSION, market_from_dict, simplified_from_dict
from .market import Allocation, Market, SimplifiedMarket
from .matching import check_standing_assumption, count_optimal_allocations, legality

REGIMES = ("any", "four", "two-alloc", "tri")


@dataclass(frozen=True)
class GenProfile:
    """Parameters for :func:`generate`.

    ``nontrivial`` additionally asks for a market whose legality leaves
    something for the fine pricers (some item legal to two players).
    """

    players: tuple[int, int] = (2, 4)
    demand: tuple[int, int] = (1, 3)
    value_bound: int = 10
    regime: str = "any"
    seed: int = 0
    nontrivial: bool = False
    max_items: int | None = None
    attempts: int = 2000

    def __post_init__(self) -> None:
        lo, hi = self.players
        dlo, dhi = self.demand
        if not 1 <= lo <= hi or not 1 <= dlo <= dhi:
            raise ValueError("player and demand ranges must be nonempty and positive")
        if self.value_bound < 1:
            raise ValueError("value_bound must be positive")
        if self.regime not in REGIMES:
            raise ValueError(f"regime must be one of {REGIMES}")
        if self.regime == "four" and lo > 4:
            raise ValueError("the four-player regime needs at most 4 players")
        if self.regime == "tri" and dhi > 3:
            raise ValueError("the tri-demand regime needs demands at most 3")
        if self.max_items is not None and self.max_items < lo * dlo:
            raise ValueError("max_items is below the smallest possible market")


def _sample(rng: random.Random, prof: GenProfile) -> Market | None:
    lo, hi = prof.players
    if prof.regime == "four":
        hi = min(hi, 4)
    n = rng.randint(lo, hi)
    ks = [rng.randint(*prof.demand) for _ in range(n)]
    m = sum(ks)
    if prof.max_items is not None and m > prof.max_items:
        return None
    items = [f"x{t + 1}" for t in range(m)]
    players = [str(j + 1) for j in range(n)]
    # a common value per item makes ties, hence several optimal allocations
    common = dict(zip(items, (rng.randint(1, prof.value_bound) for _ in items)))
    shared = 0.05 if prof.regime == "two-alloc" else 0.45
    values: dict[str, dict[str, int]] = {}
    for p in players:
        row = {}
        for x in items:
            r = rng.random()
            row[x] = common[x] if r < shared else rng.randint(1, prof.value_bound) if r < shared + 0.15 else 0
        values[p] = row
    # plant one allocation with positive values so every item can be used
    order = items[:]
    rng.shuffle(order)
    owner = {}
    start = 0
    for p, k in zip(players, ks):
        for x in order[start:start + k]:
            values[p][x] = common[x]
            owner[x] = p
        start += k
    if prof.regime == "two-alloc" and n > 1:
        # a cycle of players each valuing the next one's item like its owner
        size = rng.randint(2, n)
        cyc = rng.sample(players, size)
        picks = [rng.choice([x for x in items if owner[x] == p]) for p in cyc]
        for j, p in enumerate(cyc):
            x = picks[(j + 1) % size]
            values[p][x] = common[x]
    return Market.build(items, dict(zip(players, ks)), values)


def _admissible(market: Market, prof: GenProfile) -> bool:
    try:
        check_standing_assumption(market)
    except AssumptionViolationError:
        return False
    if prof.regime == "two-alloc":
        if count_optimal_allocations(market, limit=2) > 2:
            return False
    if prof.nontrivial:
        info = legality(market)
        if all(info.exclusive[p] == info.legal[p] for p in market.players):
            return False
    return True


def generate(prof: GenProfile) -> Market:
    """A market satisfying the standing assumption and the profile's regime.

    Deterministic in ``prof``.
    """
    rng = random.Random(prof.seed)
    for _ in range(prof.attempts):
        market = _sample(rng, prof)
        if market is not None and _admissible(market, prof):
            return market
    raise GenerationError(prof.attempts, f"regime {prof.regime}")


def generate_many(prof: GenProfile, count: int) -> list[Market]:
    """``count`` markets from consecutive seeds starting at ``prof.seed``."""
    out = []
    for j in range(count):
        out.append(generate(GenProfile(**{**prof.__dict__, "seed": prof.seed + j})))
    return out


# ---------------------------------------------------------------- fixtures

FIXTURES = ("M1", "M2", "M3", "C4", "odd_pair", "type4", "fig1_case3")


def _fixture_data(name: str) -> dict:
    if name not in FIXTURES:
        raise InvalidReferenceError(f"unknown fixture {name!r}; known: {', '.join(FIXTURES)}")
    text = resources.files("dynpricing.fixtures").joinpath(f"{name}.json").read_text(encoding="utf-8")
    return json.loads(text)


def fixture(name: str) -> Market | SimplifiedMarket:
    """A named market: valued markets M1, M2, M3; simplified markets otherwise."""
    data = _fixture_data(name)
    if data.get("version") == SIMPLIFIED_VERSION:
        return simplified_from_dict(data)[0]
    return market_from_dict(data)


def fixture_allocation(name: str) -> Allocation | None:
    """The allocation stored with a simplified fixture, if any."""
    data = _fixture_data(name)
    if data.get("version") != SIMPLIFIED_VERSION:
        return None
    return simplified_from_dict(data)[1]

