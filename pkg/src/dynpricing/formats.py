"""JSON file formats for markets, simplified markets and prices.

Rationals are written as ``"p/q"`` strings (integers as plain strings) so no
binary float ever reaches a file; integers are accepted on input.
"""

from __future__ import annotations

import hashlib
import json
from fractions import Fraction
from pathlib import Path
from typing import Any, Mapping

from .errors import InvalidMarketError
from .market import Allocation, Market, SimplifiedMarket, as_rational

MARKET_VERSION = "dynpricing-market/1"
SIMPLIFIED_VERSION = "dynpricing-simplified/1"
PRICES_VERSION = "dynpricing-prices/1"


def rational_str(q: Fraction) -> str:
    return str(Fraction(q))


def _field(obj: Any, key: str, kind: type) -> Any:
    if not isinstance(obj, dict) or key not in obj:
        raise InvalidMarketError(f"missing field {key!r}")
    value = obj[key]
    if not isinstance(value, kind) or isinstance(value, bool):
        raise InvalidMarketError(f"field {key!r} must be {kind.__name__}")
    return value


def _check_version(data: Any, expected: str) -> None:
    if _field(data, "version", str) != expected:
        raise InvalidMarketError(f"expected version {expected!r}, got {data['version']!r}")


def _names(values: list, what: str) -> list[str]:
    if any(not isinstance(v, str) for v in values):
        raise InvalidMarketError(f"{what} identifiers must be strings")
    return values


def _parse_rational(value: Any) -> Fraction:
    if isinstance(value, bool) or not isinstance(value, (int, str)):
        raise InvalidMarketError(f"rationals must be integers or 'p/q' strings, got {value!r}")
    return as_rational(value)


# ---------------------------------------------------------------- markets


def market_to_dict(market: Market) -> dict:
    players = []
    for p, k, row in zip(market.players, market.demand, market.values):
        values = {x: rational_str(v) for x, v in zip(market.items, row) if v != 0}
        players.append({"id": p, "demand": k, "values": values})
    return {"version": MARKET_VERSION, "items": list(market.items), "players": players}


def market_from_dict(data: Any) -> Market:
    _check_version(data, MARKET_VERSION)
    items = _names(_field(data, "items", list), "item")
    demand: dict[str, int] = {}
    values: dict[str, dict[str, Fraction]] = {}
    for rec in _field(data, "players", list):
        pid = _field(rec, "id", str)
        if pid in demand:
            raise InvalidMarketError(f"duplicate player {pid!r}")
        demand[pid] = _field(rec, "demand", int)
        raw = _field(rec, "values", dict)
        values[pid] = {x: _parse_rational(v) for x, v in raw.items()}
    return Market.build(items, demand, values)


def simplified_to_dict(sm: SimplifiedMarket, allocation: Allocation | None = None) -> dict:
    players = [
        {"id": p, "demand": k, "legal": sm.sort_items(row)}
        for p, k, row in zip(sm.players, sm.demand, sm.legal)
    ]
    out: dict = {"version": SIMPLIFIED_VERSION, "items": list(sm.items), "players": players}
    if allocation is not None:
        out["allocation"] = {p: sm.sort_items(allocation.bundle(p)) for p in sm.players}
    return out


def simplified_from_dict(data: Any) -> tuple[SimplifiedMarket, Allocation | None]:
    _check_version(data, SIMPLIFIED_VERSION)
    items = _names(_field(data, "items", list), "item")
    demand: dict[str, int] = {}
    legal: dict[str, list[str]] = {}
    for rec in _field(data, "players", list):
        pid = _field(rec, "id", str)
        if pid in demand:
            raise InvalidMarketError(f"duplicate player {pid!r}")
        demand[pid] = _field(rec, "demand", int)
        legal[pid] = _names(_field(rec, "legal", list), "item")
    sm = SimplifiedMarket.build(items, demand, legal)
    alloc = None
    if "allocation" in data:
        raw = _field(data, "allocation", dict)
        alloc = Allocation({p: _names(b, "item") for p, b in raw.items()})
        if not alloc.is_full(sm):
            raise InvalidMarketError("allocation does not match the market")
    return sm, alloc


def canonical_json(data: Any) -> str:
    return json.dumps(data, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def market_hash(market: Market) -> str:
    return hashlib.sha256(canonical_json(market_to_dict(market)).encode("utf-8")).hexdigest()


def dump_json(data: Any) -> str:
    return json.dumps(data, indent=2, ensure_ascii=False) + "\n"


def read_json(path: str | Path) -> Any:
    try:
        return json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise InvalidMarketError(f"{path}: invalid JSON: {exc}") from exc


def load_market(path: str | Path) -> Market:
    return market_from_dict(read_json(path))


def save_market(market: Market, path: str | Path) -> None:
    Path(path).write_text(dump_json(market_to_dict(market)), encoding="utf-8")


# ---------------------------------------------------------------- prices


def prices_to_dict(
    prices: Mapping[str, Fraction],
    market: Market,
    algorithm: str | None = None,
    seed: int | None = None,
) -> dict:
    return {
        "version": PRICES_VERSION,
        "prices": {x: rational_str(prices[x]) for x in market.items if x in prices},
        "metadata": {"algorithm": algorithm, "seed": seed, "market_hash": market_hash(market)},
    }


def prices_from_dict(data: Any, market: Market | None = None) -> dict[str, Fraction]:
    """Parse a price file; with ``market`` given, require exactly its items."""
    _check_version(data, PRICES_VERSION)
    raw = _field(data, "prices", dict)
    prices = {x: _parse_rational(v) for x, v in raw.items()}
    if market is not None:
        missing = [x for x in market.items if x not in prices]
        extra = sorted(set(prices) - set(market.items))
        if missing or extra:
            raise InvalidMarketError(f"price file items differ: missing {missing}, unknown {extra}")
    return prices


def load_prices(path: str | Path, market: Market | None = None) -> dict[str, Fraction]:
    return prices_from_dict(read_json(path), market)
