"""Market model: multi-demand valuations, allocations, prices and demand sets.

Identifiers are strings.  The order of ``items`` and ``players`` is the
canonical order used for every deterministic tie-break in the package.
All values and prices are :class:`fractions.Fraction`.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from itertools import combinations
from typing import Iterable, Iterator, Mapping, Union

from .errors import InvalidMarketError, InvalidReferenceError

Rational = Union[int, Fraction, str]
Bundle = frozenset
PriceVector = dict  # item -> Fraction


def as_rational(value: Rational) -> Fraction:
    """Convert ``value`` to an exact rational.  Floats are refused."""
    if isinstance(value, bool) or isinstance(value, float):
        raise InvalidMarketError(f"refusing inexact value {value!r}")
    if isinstance(value, (int, Fraction)):
        return Fraction(value)
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise InvalidMarketError(f"not a rational: {value!r}") from exc
    raise InvalidMarketError(f"not a rational: {value!r}")


def _index(seq: tuple[str, ...], what: str) -> dict[str, int]:
    idx = {name: j for j, name in enumerate(seq)}
    if len(idx) != len(seq):
        raise InvalidMarketError(f"duplicate {what} identifiers")
    return idx


@dataclass(frozen=True)
class Market:
    """A saturated multi-demand market.

    ``values[j][t]`` is the value player ``players[j]`` has for ``items[t]``.
    """

    items: tuple[str, ...]
    players: tuple[str, ...]
    demand: tuple[int, ...]
    values: tuple[tuple[Fraction, ...], ...]
    _item_idx: dict = field(init=False, repr=False, compare=False, hash=False)
    _player_idx: dict = field(init=False, repr=False, compare=False, hash=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "_item_idx", _index(self.items, "item"))
        object.__setattr__(self, "_player_idx", _index(self.players, "player"))
        if len(self.demand) != len(self.players) or len(self.values) != len(self.players):
            raise InvalidMarketError("demand/value rows do not match players")
        for row in self.values:
            if len(row) != len(self.items):
                raise InvalidMarketError("value row length does not match items")
            if any(not isinstance(v, Fraction) or v < 0 for v in row):
                raise InvalidMarketError("values must be nonnegative Fractions")
        if any(k < 1 for k in self.demand):
            raise InvalidMarketError("demands must be positive")
        if sum(self.demand) != len(self.items):
            raise InvalidMarketError(
                f"market is not saturated: {len(self.items)} items, total demand {sum(self.demand)}"
            )

    @classmethod
    def build(
        cls,
        items: Iterable[str],
        demand: Mapping[str, int],
        values: Mapping[str, Mapping[str, Rational]],
    ) -> "Market":
        """Build from dictionaries; missing values default to zero."""
        items = tuple(items)
        players = tuple(demand)
        item_set = set(items)
        rows = []
        for p in players:
            pv = values.get(p, {})
            unknown = set(pv) - item_set
            if unknown:
                raise InvalidReferenceError(f"unknown items {sorted(unknown)} for player {p}")
            rows.append(tuple(as_rational(pv.get(x, 0)) for x in items))
        extra = set(values) - set(players)
        if extra:
            raise InvalidReferenceError(f"values for unknown players {sorted(extra)}")
        return cls(items, players, tuple(int(demand[p]) for p in players), tuple(rows))

    @property
    def m(self) -> int:
        return len(self.items)

    @property
    def n(self) -> int:
        return len(self.players)

    def item_index(self, item: str) -> int:
        try:
            return self._item_idx[item]
        except KeyError:
            raise InvalidReferenceError(f"unknown item {item!r}") from None

    def player_index(self, player: str) -> int:
        try:
            return self._player_idx[player]
        except KeyError:
            raise InvalidReferenceError(f"unknown player {player!r}") from None

    def k(self, player: str) -> int:
        return self.demand[self.player_index(player)]

    def v(self, player: str, item: str) -> Fraction:
        return self.values[self.player_index(player)][self.item_index(item)]

    def value_map(self, player: str) -> dict[str, Fraction]:
        row = self.values[self.player_index(player)]
        return dict(zip(self.items, row))

    def sort_items(self, items: Iterable[str]) -> list[str]:
        return sorted(items, key=self.item_index)


@dataclass(frozen=True)
class SimplifiedMarket:
    """A market where each player values its legal items at 1 and the rest at 0."""

    items: tuple[str, ...]
    players: tuple[str, ...]
    demand: tuple[int, ...]
    legal: tuple[frozenset, ...]
    _item_idx: dict = field(init=False, repr=False, compare=False, hash=False)
    _player_idx: dict = field(init=False, repr=False, compare=False, hash=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "_item_idx", _index(self.items, "item"))
        object.__setattr__(self, "_player_idx", _index(self.players, "player"))
        if len(self.demand) != len(self.players) or len(self.legal) != len(self.players):
            raise InvalidMarketError("demand/legality rows do not match players")
        if any(k < 1 for k in self.demand):
            raise InvalidMarketError("demands must be positive")
        if sum(self.demand) != len(self.items):
            raise InvalidMarketError("simplified market is not saturated")
        covered: set[str] = set()
        for row in self.legal:
            if not row <= self._item_idx.keys():
                raise InvalidReferenceError(f"legality set mentions unknown items {sorted(row - set(self.items))}")
            covered |= row
        if len(covered) != len(self.items):
            raise InvalidMarketError("some item is legal to no player")

    @classmethod
    def build(
        cls,
        items: Iterable[str],
        demand: Mapping[str, int],
        legal: Mapping[str, Iterable[str]],
    ) -> "SimplifiedMarket":
        items = tuple(items)
        players = tuple(demand)
        return cls(
            items,
            players,
            tuple(int(demand[p]) for p in players),
            tuple(frozenset(legal.get(p, ())) for p in players),
        )

    @classmethod
    def from_market(cls, market: Market) -> "SimplifiedMarket":
        """Read legality off a 0/1 market: an item is legal iff its value is positive."""
        return cls(
            market.items,
            market.players,
            market.demand,
            tuple(frozenset(x for x, v in zip(market.items, row) if v > 0) for row in market.values),
        )

    @cached_property
    def market(self) -> Market:
        """The valued market with value 1 on legal items and 0 elsewhere."""
        one, zero = Fraction(1), Fraction(0)
        rows = tuple(tuple(one if x in row else zero for x in self.items) for row in self.legal)
        return Market(self.items, self.players, self.demand, rows)

    @property
    def m(self) -> int:
        return len(self.items)

    @property
    def n(self) -> int:
        return len(self.players)

    def item_index(self, item: str) -> int:
        try:
            return self._item_idx[item]
        except KeyError:
            raise InvalidReferenceError(f"unknown item {item!r}") from None

    def player_index(self, player: str) -> int:
        try:
            return self._player_idx[player]
        except KeyError:
            raise InvalidReferenceError(f"unknown player {player!r}") from None

    def k(self, player: str) -> int:
        return self.demand[self.player_index(player)]

    def L(self, player: str) -> frozenset:
        return self.legal[self.player_index(player)]

    def legal_players(self, item: str) -> list[str]:
        self.item_index(item)
        return [p for p, row in zip(self.players, self.legal) if item in row]

    def L_of(self, players: Iterable[str], items: Iterable[str] | None = None) -> frozenset:
        """Items of ``items`` (default: all) legal to some player of ``players``."""
        out: set[str] = set()
        for p in players:
            out |= self.L(p)
        return frozenset(out if items is None else out & set(items))

    def sort_items(self, items: Iterable[str]) -> list[str]:
        return sorted(items, key=self.item_index)

    def submarket(
        self,
        items: Iterable[str],
        demand: Mapping[str, int],
        extra_legal: Mapping[str, Iterable[str]] | None = None,
    ) -> "SimplifiedMarket":
        """Restrict to ``items`` and the players of ``demand`` (in canonical order).

        Legality is inherited from this market; ``extra_legal`` declares
        legality sets for players that do not belong to it.
        """
        keep = set(items)
        item_t = tuple(x for x in self.items if x in keep)
        if len(item_t) != len(keep):
            raise InvalidReferenceError(f"unknown items {sorted(keep - set(self.items))}")
        extra = dict(extra_legal or {})
        players = [p for p in self.players if p in demand] + [p for p in demand if p in extra]
        if len(players) != len(demand):
            raise InvalidReferenceError("submarket mentions unknown players")
        legal = tuple(
            frozenset(keep & (set(extra[p]) if p in extra else self.L(p))) for p in players
        )
        return SimplifiedMarket(item_t, tuple(players), tuple(demand[p] for p in players), legal)


class Allocation(Mapping):
    """Immutable mapping player -> bundle with pairwise disjoint bundles.

    Empty bundles are dropped, so two allocations compare equal iff they
    hand out the same items to the same players.
    """

    __slots__ = ("_bundles", "_owner")

    def __init__(self, bundles: Mapping[str, Iterable[str]] | None = None) -> None:
        clean: dict[str, frozenset] = {}
        owner: dict[str, str] = {}
        for p, items in (bundles or {}).items():
            fs = frozenset(items)
            for x in fs:
                if x in owner:
                    raise InvalidMarketError(f"item {x!r} allocated to both {owner[x]!r} and {p!r}")
                owner[x] = p
            if fs:
                clean[p] = fs
        self._bundles = clean
        self._owner = owner

    def __getitem__(self, player: str) -> frozenset:
        return self._bundles[player]

    def __iter__(self) -> Iterator[str]:
        return iter(self._bundles)

    def __len__(self) -> int:
        return len(self._bundles)

    def __hash__(self) -> int:
        return hash(frozenset(self._bundles.items()))

    def __eq__(self, other: object) -> bool:
        if isinstance(other, Allocation):
            return self._bundles == other._bundles
        return NotImplemented

    def __repr__(self) -> str:
        inner = ", ".join(f"{p!r}: {sorted(b)}" for p, b in self._bundles.items())
        return f"Allocation({{{inner}}})"

    def bundle(self, player: str) -> frozenset:
        return self._bundles.get(player, frozenset())

    def owner(self, item: str) -> str | None:
        return self._owner.get(item)

    @property
    def assigned_items(self) -> frozenset:
        return frozenset(self._owner)

    def is_full(self, market: Market | SimplifiedMarket) -> bool:
        """Every item handed out and every player holding exactly its demand."""
        return len(self._owner) == market.m and all(
            len(self.bundle(p)) == k for p, k in zip(market.players, market.demand)
        )


def _check_bundle(market: Market, bundle: Iterable[str]) -> frozenset:
    fs = frozenset(bundle)
    for x in fs:
        market.item_index(x)
    return fs


def bundle_value(market: Market, player: str, bundle: Iterable[str]) -> Fraction:
    """Sum of the ``k_i`` largest item values inside ``bundle``."""
    j = market.player_index(player)
    row = market.values[j]
    vals = sorted((row[market.item_index(x)] for x in _check_bundle(market, bundle)), reverse=True)
    return sum(vals[: market.demand[j]], Fraction(0))


def _price(prices: Mapping[str, Fraction], item: str) -> Fraction:
    try:
        return prices[item]
    except KeyError:
        raise InvalidReferenceError(f"no price for item {item!r}") from None


def utility(market: Market, player: str, bundle: Iterable[str], prices: Mapping[str, Fraction]) -> Fraction:
    fs = _check_bundle(market, bundle)
    return bundle_value(market, player, fs) - sum((_price(prices, x) for x in fs), Fraction(0))


def social_welfare(market: Market, allocation: Mapping[str, Iterable[str]]) -> Fraction:
    alloc = allocation if isinstance(allocation, Allocation) else Allocation(allocation)
    total = Fraction(0)
    for p in alloc:
        total += bundle_value(market, p, alloc[p])
    return total


def check_prices(market: Market | SimplifiedMarket, prices: Mapping[str, Fraction]) -> None:
    """Raise unless ``prices`` covers exactly the market's items with positive rationals."""
    missing = [x for x in market.items if x not in prices]
    if missing:
        raise InvalidReferenceError(f"no price for items {missing}")
    extra = set(prices) - set(market.items)
    if extra:
        raise InvalidReferenceError(f"prices for unknown items {sorted(extra)}")
    for x in market.items:
        p = prices[x]
        if not isinstance(p, Fraction) or p <= 0:
            raise InvalidMarketError(f"price of {x!r} must be a positive Fraction, got {p!r}")


def demand_bundles(
    market: Market | SimplifiedMarket, player: str, prices: Mapping[str, Fraction]
) -> frozenset:
    """All utility-maximizing bundles of ``player`` at ``prices``.

    Items are grouped by margin ``v - p``.  Whole positive classes are taken
    greedily; the class that overflows the demand contributes every
    combination of the remaining size; once positive items run out, any
    subset of zero-margin items that fits may be added.
    """
    if isinstance(market, SimplifiedMarket):
        market = market.market
    j = market.player_index(player)
    k = market.demand[j]
    row = market.values[j]
    classes: dict[Fraction, list[str]] = {}
    for x, v in zip(market.items, row):
        classes.setdefault(v - _price(prices, x), []).append(x)

    base: list[str] = []
    room = k
    for margin in sorted((mg for mg in classes if mg > 0), reverse=True):
        group = classes[margin]
        if len(group) <= room:
            base.extend(group)
            room -= len(group)
            continue
        return frozenset(frozenset(base).union(c) for c in combinations(group, room))
    zeros = classes.get(Fraction(0), [])
    out = set()
    for size in range(min(room, len(zeros)) + 1):
        for c in combinations(zeros, size):
            out.add(frozenset(base).union(c))
    return frozenset(out)


def sorted_bundles(market: Market | SimplifiedMarket, bundles: Iterable[frozenset]) -> list[frozenset]:
    """Deterministic order: by size, then by item positions."""
    return sorted(bundles, key=lambda b: (len(b), sorted(market.item_index(x) for x in b)))
