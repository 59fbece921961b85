from __future__ import annotations

import random
from itertools import combinations

import pytest
from hypothesis import given
from hypothesis import strategies as st

from dynpricing.dispatch import ROUGH, price_market
from dynpricing.errors import PreconditionError, UnsupportedRegimeError
from dynpricing.four import (
    TYPE_I,
    TYPE_II,
    RemovableSet,
    exhaustive_removable_sets,
    find_removable_set,
    is_removable_set,
    price_four_players,
)
from dynpricing.gen import fixture, fixture_allocation
from dynpricing.market import Allocation, Market, SimplifiedMarket
from dynpricing.matching import legal_allocation
from dynpricing.pipeline import recording
from dynpricing.verify import brute_force_pricing, is_dynamic_pricing
from oracles import is_dynamic, random_market, residual_of, satisfies_assumption
from structures import removable_ok


def _residual(seed, n_max=4):
    market = random_market(random.Random(seed), n_max=n_max, m_max=8)
    if market is None or not satisfies_assumption(market):
        return None
    return residual_of(market)


def _distinct_unit(prices):
    vals = list(prices.values())
    return len(set(vals)) == len(vals) and all(0 < p < 1 for p in vals)


def test_c4_type_ii():
    sm = fixture("C4")
    rs = find_removable_set(sm, fixture_allocation("C4"))
    assert rs.kind == TYPE_II
    assert rs.items == set(sm.items)
    assert removable_ok(sm, "II", rs.items, None, rs.allocation)


def test_isolated_two_cycle_type_i():
    sm = SimplifiedMarket.build(
        ["x1", "x2", "x3", "x4"],
        {"1": 1, "2": 1, "3": 1, "4": 1},
        {"1": ["x1", "x2"], "2": ["x1", "x2"], "3": ["x3", "x4"], "4": ["x3", "x4"]},
    )
    alloc = Allocation({"1": {"x1"}, "2": {"x2"}, "3": {"x3"}, "4": {"x4"}})
    rs = find_removable_set(sm, alloc)
    assert (rs.kind, rs.items, rs.central_item) == (TYPE_I, {"x1", "x2"}, "x2")
    assert removable_ok(sm, "I", rs.items, "x2", rs.allocation)


def test_fig1_case3_type_i():
    sm = fixture("fig1_case3")
    assert "x5" in sm.L("2")
    rs = find_removable_set(sm, fixture_allocation("fig1_case3"))
    assert (rs.kind, rs.items, rs.central_item) == (TYPE_I, {"x2", "x4", "x5"}, "x5")
    assert removable_ok(sm, "I", rs.items, "x5", rs.allocation)


def test_removable_set_domain():
    everywhere = SimplifiedMarket.build(["a", "b"], {"1": 1, "2": 1}, {"1": ["a", "b"], "2": ["a", "b"]})
    with pytest.raises(PreconditionError):
        find_removable_set(everywhere)


def test_price_m1_residual(m1_residual):
    prices = price_four_players(m1_residual)
    assert is_dynamic_pricing(m1_residual, prices)
    assert is_dynamic(m1_residual, prices)


def test_price_c4():
    sm = fixture("C4")
    prices = price_four_players(sm)
    assert _distinct_unit(prices)
    assert is_dynamic(sm, prices)


def test_disjoint_four_players_trivial():
    items = ["a", "b", "c", "d"]
    market = Market.build(items, {p: 1 for p in "1234"}, {p: {x: 1} for p, x in zip("1234", items)})
    result = price_market(market, "four")
    assert result.algorithm == ROUGH
    assert is_dynamic_pricing(market, result.prices)


def test_five_players_unsupported():
    items = [f"x{t}" for t in range(5)]
    legal = {str(j): [items[j], items[(j + 1) % 5]] for j in range(5)}
    sm = SimplifiedMarket.build(items, {str(j): 1 for j in range(5)}, legal)
    with pytest.raises(UnsupportedRegimeError):
        price_four_players(sm)


def test_fixture_sets_among_exhaustive():
    for name in ("C4", "fig1_case3"):
        sm = fixture(name)
        rs = find_removable_set(sm, fixture_allocation(name))
        assert rs in exhaustive_removable_sets(sm, rs.allocation)


@given(st.integers(0, 100_000))
def test_four_player_pricing_is_dynamic(seed):
    sm = _residual(seed)
    if sm is None:
        return
    with recording() as log:
        prices = price_four_players(sm)
    assert _distinct_unit(prices)
    assert is_dynamic(sm, prices)
    for e in log:
        if e.kind != "removable_set":
            continue
        rs = e.structure
        assert removable_ok(e.market, rs.kind, rs.items, rs.central_item, rs.allocation)
        assert rs in exhaustive_removable_sets(e.market, rs.allocation)


@given(st.integers(0, 100_000))
def test_exhaustive_search_agrees_with_predicate(seed):
    sm = _residual(seed)
    if sm is None or sm.m > 6:
        return
    alloc = legal_allocation(sm)
    found = set(exhaustive_removable_sets(sm, alloc))
    for rs in found:
        assert removable_ok(sm, rs.kind, rs.items, rs.central_item, alloc)
    # every candidate the independent predicate accepts is found too
    for size in range(1, sm.m + 1):
        for sub in combinations(sm.items, size):
            s = frozenset(sub)
            if removable_ok(sm, "II", s, None, alloc):
                assert RemovableSet(TYPE_II, s, None, alloc) in found
            for x in sub:
                if removable_ok(sm, "I", s, x, alloc):
                    assert RemovableSet(TYPE_I, s, x, alloc) in found


def test_small_bases_always_verify():
    rng = random.Random(3)
    seen = 0
    while seen < 30:
        sm = _residual(rng.randrange(10**6))
        if sm is None or sm.m > 3:
            continue
        prices = brute_force_pricing(sm)
        assert prices is not None and is_dynamic(sm, prices)
        seen += 1


def test_is_removable_set_rejects_wrong_kind():
    sm = fixture("C4")
    rs = find_removable_set(sm, fixture_allocation("C4"))
    assert not is_removable_set(sm, RemovableSet(TYPE_I, rs.items, None, rs.allocation))
