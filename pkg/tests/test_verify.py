from __future__ import annotations

import random
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from dynpricing.dispatch import price_market, simulation_pricer
from dynpricing.errors import InvalidReferenceError, PreconditionError, UnsupportedRegimeError
from dynpricing.market import Market, SimplifiedMarket
from dynpricing.verify import (
    adversarial_sweep,
    brute_force_pricing,
    is_dynamic_pricing,
    residual_after,
    simulate,
)
from conftest import M1_PRICES
from oracles import is_dynamic, random_market, satisfies_assumption

F = Fraction


def _market(seed, **kw):
    market = random_market(random.Random(seed), **kw)
    if market is None or not satisfies_assumption(market):
        return None
    return market


def test_m1_prices_accepted(m1):
    report = is_dynamic_pricing(m1, M1_PRICES)
    assert report and report.counterexample is None


def test_m1_bad_prices_rejected(m1):
    bad = {"α": F(1, 10), "β": F(3, 2), "γ": F(1, 2), "δ": F(9, 10)}
    report = is_dynamic_pricing(m1, bad)
    assert not report
    assert report.counterexample == ("1", frozenset({"α", "γ"}))


def test_single_player_accepted(single):
    assert is_dynamic_pricing(single, {"a": F(1), "b": F(1)})


def test_short_bundle_rejected(single):
    # both items cost more than player 1 values them, so it buys nothing
    assert not is_dynamic_pricing(single, {"a": F(4), "b": F(3)})


def test_missing_price_rejected(m1):
    prices = dict(M1_PRICES)
    del prices["δ"]
    with pytest.raises(InvalidReferenceError):
        is_dynamic_pricing(m1, prices)


def test_brute_force_examples(m1_residual, m2):
    for sm in (m1_residual, m2):
        prices = brute_force_pricing(sm)
        assert prices is not None
        assert is_dynamic(sm, prices)
    assert brute_force_pricing(m1_residual) == {"α": F(1, 3), "γ": F(2, 3)}


def test_brute_force_bound(m2):
    with pytest.raises(PreconditionError):
        brute_force_pricing(m2, bound=3)


def test_residual_after(m1):
    rest = residual_after(m1, "1", {"α", "β"})
    assert rest.items == ("γ", "δ")
    assert rest.players == ("2", "3")


def test_simulate_m1(m1):
    for order in (("1", "2", "3"), ("3", "2", "1")):
        trace = simulate(m1, order)
        assert trace.optimal
        assert trace.final_welfare == 5
        assert len(trace.steps) == 3


def test_simulate_rejects_bad_order(m1):
    with pytest.raises(PreconditionError):
        simulate(m1, ("1", "2"))


def test_sweep_m1(m1):
    report = adversarial_sweep(m1)
    assert report.ok and report.complete
    assert report.min_welfare == report.max_welfare == report.optimum == 5


def test_sweep_finds_bad_pricer(m1):
    flat = adversarial_sweep(m1, pricer=lambda m: {x: F(1, 100) for x in m.items})
    assert not flat
    assert flat.min_welfare < flat.optimum
    assert flat.witness


def test_sweep_restricted_orders(m1):
    report = adversarial_sweep(m1, orders=[("2", "1", "3")], all_ties=False)
    assert report.ok and report.branches == 1


@given(st.integers(0, 100_000), st.integers(0, 10**6))
def test_check_agrees_with_oracle(seed, pseed):
    market = _market(seed, n_max=3, m_max=6)
    if market is None:
        return
    rng = random.Random(pseed)
    prices = {x: F(rng.randint(1, 12), 2) for x in market.items}
    assert bool(is_dynamic_pricing(market, prices)) == is_dynamic(market, prices)


@given(st.integers(0, 100_000))
def test_brute_force_sound(seed):
    market = _market(seed, n_max=3, m_max=6)
    if market is None:
        return
    sm = SimplifiedMarket.from_market(market)
    if not all(len(sm.legal_players(x)) for x in sm.items):
        return
    prices = brute_force_pricing(sm)
    if prices is not None:
        assert is_dynamic(sm, prices)


@given(st.integers(0, 100_000), st.integers(0, 10**6))
def test_dynamic_prices_give_optimal_runs(seed, oseed):
    market = _market(seed, n_max=4, m_max=7)
    if market is None:
        return
    try:
        prices = price_market(market).prices
    except UnsupportedRegimeError:
        return
    assert is_dynamic(market, prices)
    order = list(market.players)
    random.Random(oseed).shuffle(order)
    trace = simulate(market, order, pricer=simulation_pricer)
    assert trace.optimal


def test_zero_value_market_is_trivially_priced():
    market = Market.build(["a", "b"], {"1": 1, "2": 1}, {"1": {"a": 1}, "2": {"b": 1}})
    assert adversarial_sweep(market).ok
