from itertools import combinations

import pytest
from hypothesis import given, strategies as st

from kspaging import Config, distance, service_cost, service_support
from kspaging.cache import CacheProblem

from oracles import cfg


def test_distance_examples():
    assert distance(cfg("ab"), cfg("ab")) == 0
    assert distance(cfg("ab"), cfg("ac")) == 1
    assert distance(cfg("abc"), cfg("def")) == 3


def test_distance_rejects_mismatched_sizes():
    with pytest.raises(ValueError):
        distance(cfg("ab"), cfg("abc"))


def test_config_rejects_duplicates_and_empty():
    with pytest.raises(ValueError):
        Config(["a", "a"])
    with pytest.raises(ValueError):
        Config([])


def test_config_is_canonical():
    assert Config("ba") == Config("ab")
    assert repr(Config("ba")) == "{a,b}"
    assert sorted([Config("bc"), Config("ab")])[0] == Config("ab")


def test_service_cost_examples():
    assert service_cost(cfg("ab"), "a", cfg("ab")) == 0
    assert service_cost(cfg("ab"), "c", cfg("ac")) == 1
    assert service_cost(cfg("ab"), "c", cfg("ab")) == 2
    assert service_cost(cfg("ab"), "c", cfg("ad")) == 2


def test_service_support_examples():
    assert service_support(cfg("ab"), "a") == (cfg("ab"),)
    assert set(service_support(cfg("ab"), "c")) == {cfg("cb"), cfg("ac")}
    assert set(service_support(cfg("abc"), "d")) == {cfg("dbc"), cfg("adc"), cfg("abd")}


def test_cache_problem_validates_initial():
    CacheProblem(2, cfg("ab"))
    with pytest.raises(ValueError):
        CacheProblem(3, cfg("ab"))
    with pytest.raises(ValueError):
        CacheProblem(0, cfg("a"))


def _k_configs(universe: str, k: int):
    return [Config(c) for c in combinations(universe, k)]


config2 = st.sampled_from(_k_configs("abcde", 2))
config3 = st.sampled_from(_k_configs("abcdef", 3))
page = st.sampled_from("abcdef")


@given(config3, config3, config3)
def test_triangle_inequality(x, y, z):
    assert distance(x, z) <= distance(x, y) + distance(y, z)


@given(config3, config3, config3, config3, page)
def test_cost_distance_consistency(u, x, y, v, r):
    assert service_cost(u, r, v) <= distance(u, x) + service_cost(x, r, y) + distance(y, v)


@given(config2, config2, page)
def test_service_cost_via_support(x, y, r):
    # when r sits in x or y, cost factors through the cheapest landing spot
    if r in x or r in y:
        assert service_cost(x, r, y) == min(
            distance(x, z) + distance(z, y) for z in service_support(x, r)
        )


@given(config3, page)
def test_service_support_contains_request(x, r):
    for z in service_support(x, r):
        assert r in z
    assert service_cost(x, r, x) == (0 if r in x else 2)
