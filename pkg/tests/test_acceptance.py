"""Acceptance criteria 1-8, one PASS/FAIL line each, exact arithmetic throughout.

Ensembles are built once and shared: the structural and oracle criteria
(6-8) reuse the markets and the structures emitted while criteria 3-5 ran.
"""

from __future__ import annotations

import time
from fractions import Fraction
from functools import cache

import pytest

from dynpricing.dispatch import BRUTE_BOUND
from dynpricing.four import fine_four
from dynpricing.gen import GenProfile, fixture, generate
from dynpricing.market import SimplifiedMarket, demand_bundles
from dynpricing.matching import count_optimal_allocations, enumerate_optimal_allocations, legality
from dynpricing.pipeline import price_with, recording
from dynpricing.rough import build_auxiliary_graph, compute_epsilon, residual_market, rough_prices
from dynpricing.tridemand import MAX_DEMAND, fine_tridemand, price_fixed_at
from dynpricing.two_allocs import fine_two
from dynpricing.verify import adversarial_sweep, brute_force_pricing, is_dynamic_pricing
from conftest import M1_PRICES
from oracles import is_dynamic, legality_sets, optimal_allocations, rough_conditions
from structures import cycle_structure_ok, pair_conditions, pair_is_maximal, removable_ok

F = Fraction

ROUGH_MARKETS = 200
FOUR_MARKETS = 200
TWO_MARKETS = 100
TRI_MARKETS = 200


@pytest.fixture
def report(capsys):
    def emit(number, ok, detail, started, limit=None):
        elapsed = time.perf_counter() - started
        ok = ok and (limit is None or elapsed < limit)
        budget = f" of {limit}s" if limit else ""
        line = f"criterion {number}: {'PASS' if ok else 'FAIL'} ({detail}; {elapsed:.1f}s{budget})"
        with capsys.disabled():
            print("\n" + line)
        assert ok, line

    return emit


def _residual(market):
    info = legality(market)
    return residual_market(market, rough_prices(market, info), info).simplified


def _four(market):
    return price_with(market, fine_four)


def _two(market):
    return price_with(market, fine_two)


def _run(markets, pricer):
    """Verifier verdict and full sweep for each market, plus every emitted structure."""
    failures = []
    with recording() as log:
        for name, market in markets:
            prices = pricer(market)
            if not is_dynamic_pricing(market, prices):
                failures.append(f"{name}: rejected")
                continue
            sweep = adversarial_sweep(market, pricer=pricer)
            if not (sweep.ok and sweep.complete):
                failures.append(f"{name}: sweep {sweep.min_welfare}..{sweep.max_welfare} of {sweep.optimum}")
    return failures, list(log)


@cache
def rough_ensemble():
    prof = GenProfile(players=(1, 5), demand=(1, 3), max_items=12)
    return [generate(GenProfile(**{**prof.__dict__, "seed": s})) for s in range(ROUGH_MARKETS)]


@cache
def four_ensemble():
    out = []
    for s in range(FOUR_MARKETS):
        prof = GenProfile(players=(4, 4), demand=(1, 3), regime="four", seed=s, nontrivial=s % 2 == 0, max_items=9)
        out.append((f"four/{s}", generate(prof)))
    return out


@cache
def two_ensemble():
    out = [(name, fixture(name).market) for name in ("odd_pair", "type4")]
    for s in range(TWO_MARKETS):
        prof = GenProfile(players=(2, 5), regime="two-alloc", seed=s, nontrivial=s % 2 == 0, max_items=9)
        out.append((f"two/{s}", generate(prof)))
    return out


@cache
def tri_ensemble():
    out = []
    for s in range(TRI_MARKETS):
        prof = GenProfile(players=(2, 5), demand=(1, 3), regime="tri", seed=s, nontrivial=True, max_items=9)
        out.append((f"tri/{s}", generate(prof)))
    return out


@cache
def four_run():
    return _run(four_ensemble(), _four)


@cache
def two_run():
    return _run(two_ensemble(), _two)


@cache
def tri_run():
    failures = []
    checked = 0
    with recording() as log:
        for name, market in tri_ensemble():
            sm = _residual(market)
            for x in sm.items:
                fp = price_fixed_at(sm, x)
                checked += 1
                cheapest = all(fp.prices[x] < v for y, v in fp.prices.items() if y != x)
                if not (cheapest and is_dynamic_pricing(sm, fp.prices)):
                    failures.append(f"{name} at {x}")
    return failures, list(log), checked


def test_criterion_1_worked_example(report):
    started = time.perf_counter()
    m1 = fixture("M1")
    info = legality(m1)
    allocs = enumerate_optimal_allocations(m1)
    best, oracle_allocs = optimal_allocations(m1)
    demand = demand_bundles(m1, "1", M1_PRICES)
    utility = {sum(m1.v("1", x) - M1_PRICES[x] for x in b) for b in demand}
    checks = {
        "welfare": info.max_welfare == best == 5,
        "two allocations": len(allocs) == len(oracle_allocs) == 2,
        "K": {p: set(info.legal[p]) for p in m1.players} == {"1": {"α", "β", "γ"}, "2": {"α", "γ"}, "3": {"δ"}},
        "R": {p: set(info.exclusive[p]) for p in m1.players} == {"1": {"β"}, "2": set(), "3": {"δ"}},
        "verified": bool(is_dynamic_pricing(m1, M1_PRICES)) and is_dynamic(m1, M1_PRICES),
        "demand set": set(demand) == {frozenset({"α", "β"}), frozenset({"β", "γ"})},
        "utility": utility == {F(7, 5)},
    }
    bad = [k for k, v in checks.items() if not v]
    report(1, not bad, f"failed: {bad}" if bad else "M1 reproduced", started, 1)


def test_criterion_2_rough_prices(report):
    started = time.perf_counter()
    bad = []
    for j, market in enumerate(rough_ensemble()):
        info = legality(market)
        graph = build_auxiliary_graph(market, info)
        eps = compute_epsilon(market, graph)
        prices = rough_prices(market, info)
        legal = {p: info.legal[p] for p in market.players}
        exclusive = {p: info.exclusive[p] for p in market.players}
        if not rough_conditions(market, legal, exclusive, prices):
            bad.append(j)
            continue
        # prices are eps minus shortest distances, so every edge being
        # tight or slack certifies that no negative cycle exists
        for e in graph.edges:
            w = e.weight if e.zero_cycle_member else e.weight - eps
            if prices[e.source] - prices[e.target] > w:
                bad.append(j)
                break
    report(2, not bad, f"{len(rough_ensemble())} markets, bad: {bad[:5]}", started, 60)


def test_criterion_3_four_players(report):
    started = time.perf_counter()
    failures, _ = four_run()
    report(3, not failures, f"{FOUR_MARKETS} markets, all orders and ties; failures: {failures[:3]}", started, 120)


def test_criterion_4_two_allocations(report):
    started = time.perf_counter()
    markets = two_ensemble()
    over = [n for n, m in markets[2:] if count_optimal_allocations(m, limit=2) > 2]
    failures, _ = two_run()
    ok = not failures and not over
    report(4, ok, f"{len(markets)} markets incl. odd_pair, type4; failures: {failures[:3]}; over two: {over}", started, 120)


def test_criterion_5_tri_demand(report):
    started = time.perf_counter()
    failures, _, checked = tri_run()
    report(5, not failures, f"{TRI_MARKETS} markets, {checked} fixed items; failures: {failures[:3]}", started, 180)


def _small_residuals():
    seen = {}
    markets = [m for _, m in four_ensemble() + two_ensemble() + tri_ensemble()]
    for market in markets:
        sm = _residual(market)
        if sm is not None and sm.m <= BRUTE_BOUND:
            seen[sm] = None
    return list(seen)


def _algorithms(sm: SimplifiedMarket):
    out = []
    if max(sm.demand) <= MAX_DEMAND:
        out.append(("tri", fine_tridemand))
    if sm.n <= 4:
        out.append(("four", fine_four))
    if all(len(sm.legal_players(x)) <= 2 for x in sm.items) and count_optimal_allocations(sm, limit=2) <= 2:
        out.append(("two-alloc", fine_two))
    return out


def test_criterion_6_oracle_equivalence(report):
    started = time.perf_counter()
    bad = []
    runs = 0
    residuals = _small_residuals()
    for sm in residuals:
        prices = brute_force_pricing(sm, BRUTE_BOUND)
        if prices is None or not is_dynamic_pricing(sm, prices) or not is_dynamic(sm, prices):
            bad.append(("brute", sm))
        for name, fine in _algorithms(sm):
            runs += 1
            prices = fine(sm)
            if not is_dynamic_pricing(sm, prices) or not is_dynamic(sm, prices):
                bad.append((name, sm))
    report(6, not bad, f"{len(residuals)} residual markets, {runs} algorithm runs; bad: {bad[:2]}", started)


def test_criterion_7_matching_oracle(report):
    started = time.perf_counter()
    bad = []
    markets = list(rough_ensemble()) + [m for _, m in four_ensemble() + two_ensemble() + tri_ensemble()]
    markets += [sm.market for sm in _small_residuals()]
    compared = 0
    for market in markets:
        if market.m > 8:
            continue
        compared += 1
        info = legality(market)
        best, legal, exclusive = legality_sets(market)
        same = info.max_welfare == best and all(
            info.legal[p] == legal[p] and info.exclusive[p] == exclusive[p] for p in market.players
        )
        if not same:
            bad.append(market)
    report(7, not bad and compared > 0, f"{compared} markets with m <= 8; mismatches: {len(bad)}", started)


def test_criterion_8_structural_predicates(report):
    started = time.perf_counter()
    logs = four_run()[1] + two_run()[1] + tri_run()[1]
    counts = {"removable_set": 0, "cycle_structure": 0, "submarket_pair": 0, "maximality": 0}
    bad = []
    for e in logs:
        s, sm = e.structure, e.market
        if e.kind == "removable_set":
            ok = removable_ok(sm, s.kind, s.items, s.central_item, s.allocation)
        elif e.kind == "cycle_structure":
            ok = cycle_structure_ok(sm, s)
        elif e.kind == "submarket_pair":
            ok = pair_conditions(sm, s.items_b, s.players_b, s.spare)
            if ok and sm.n <= 6 and sm.m <= 9:
                ok = pair_is_maximal(sm, s.items_b, s.players_b, s.spare)
                counts["maximality"] += 1
        else:
            continue
        counts[e.kind] += 1
        if not ok:
            bad.append((e.kind, s))
    seen_all = all(counts[k] for k in ("removable_set", "cycle_structure", "submarket_pair"))
    report(8, not bad and seen_all, f"checked {counts}; bad: {bad[:2]}", started)
