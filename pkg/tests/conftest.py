from __future__ import annotations

from fractions import Fraction

import pytest
from hypothesis import settings

from dynpricing.gen import fixture
from dynpricing.market import Market, SimplifiedMarket

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")

F = Fraction
M1_PRICES = {"α": F(3, 2), "β": F(1, 10), "γ": F(1, 2), "δ": F(9, 10)}


@pytest.fixture
def m1() -> Market:
    return fixture("M1")


@pytest.fixture
def m2() -> SimplifiedMarket:
    return SimplifiedMarket.from_market(fixture("M2"))


@pytest.fixture
def m3() -> SimplifiedMarket:
    return SimplifiedMarket.from_market(fixture("M3"))


@pytest.fixture
def disjoint() -> Market:
    return Market.build(["a", "b"], {"1": 1, "2": 1}, {"1": {"a": 2, "b": 1}, "2": {"a": 1, "b": 2}})


@pytest.fixture
def single() -> Market:
    return Market.build(["a", "b"], {"1": 2}, {"1": {"a": 3, "b": 2}})


@pytest.fixture
def m1_residual() -> SimplifiedMarket:
    return SimplifiedMarket.build(["α", "γ"], {"1": 1, "2": 1}, {"1": ["α", "γ"], "2": ["α", "γ"]})
