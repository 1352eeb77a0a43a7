from fractions import Fraction
from itertools import combinations

import pytest
import random

from kspaging import (
    Config,
    ConfigDistribution,
    TransportInstance,
    TransportPlan,
    distance,
    distribution_distance,
    service_cost,
    solve_min_cost,
    step_cost,
)

from oracles import brute_min_transport, cfg, random_feasible_plan

F = Fraction


def dist(*pairs):
    return ConfigDistribution({cfg(s): F(n, d) for s, n, d in pairs})


def test_distribution_validates():
    with pytest.raises(ValueError):
        ConfigDistribution({cfg("ab"): F(1, 2)})
    with pytest.raises(ValueError):
        ConfigDistribution({cfg("ab"): F(3, 2), cfg("ac"): F(-1, 2)})
    # zero weights are stripped so support equals the key set
    d = ConfigDistribution({cfg("ab"): F(1), cfg("ac"): F(0)})
    assert d.support == (cfg("ab"),)


def test_identity_transport_is_free():
    pi = dist(("ab", 1, 2), ("ac", 1, 2))
    assert distribution_distance(pi, pi) == 0
    plan, cost = solve_min_cost(TransportInstance.between(pi, pi, distance))
    assert cost == 0
    assert plan.flow == {(cfg("ab"), cfg("ab")): F(1, 2), (cfg("ac"), cfg("ac")): F(1, 2)}


def test_distribution_distance_examples():
    assert distribution_distance(dist(("ab", 1, 1)), dist(("ca", 1, 2), ("cb", 1, 2))) == 1
    b = dist(("ab", 1, 2), ("ac", 1, 2))
    sinks = dist(("da", 1, 3), ("db", 1, 3), ("dc", 1, 3))
    assert distribution_distance(b, sinks) == 1


def test_step_cost_examples():
    point = dist(("ab", 1, 1))
    assert step_cost(point, "a", point) == 0
    assert step_cost(point, "c", dist(("ca", 1, 2), ("cb", 1, 2))) == 1


def test_k3_fixture_costs():
    # D + b -> E: half the mass moves one page
    d_state = ConfigDistribution(
        {cfg(s): F(1, 6) for s in ("abc", "abd", "abe", "acd", "ace", "ade")}
    )
    e_state = dist(("abc", 1, 2), ("abd", 1, 4), ("abe", 1, 4))
    assert step_cost(d_state, "b", e_state) == F(1, 2)

    # B + b -> C
    b_state = dist(("abc", 1, 3), ("abd", 1, 3), ("acd", 1, 3))
    c_state = dist(("abc", 1, 2), ("abd", 1, 2))
    assert step_cost(b_state, "b", c_state) == F(1, 3)

    # E + d -> A^{a,b,d}
    assert step_cost(e_state, "d", dist(("abd", 1, 1))) == F(3, 4)


def test_fixture_plans_match_solver_optimum():
    # hand-written transports achieve exactly the optimal cost
    d_state = ConfigDistribution(
        {cfg(s): F(1, 6) for s in ("abc", "abd", "abe", "acd", "ace", "ade")}
    )
    e_state = dist(("abc", 1, 2), ("abd", 1, 4), ("abe", 1, 4))
    db_plan = TransportPlan(
        {
            (cfg("abc"), cfg("abc")): F(1, 6),
            (cfg("abd"), cfg("abd")): F(1, 6),
            (cfg("abe"), cfg("abe")): F(1, 6),
            (cfg("acd"), cfg("abc")): F(1, 6),  # eject d
            (cfg("ace"), cfg("abc")): F(1, 6),  # eject e
            (cfg("ade"), cfg("abe")): F(1, 12),  # eject d
            (cfg("ade"), cfg("abd")): F(1, 12),  # eject e
        }
    )
    inst = TransportInstance.between(d_state, e_state, lambda x, y: service_cost(x, "b", y))
    assert db_plan.check_marginals(inst)
    _, best = solve_min_cost(inst)
    assert db_plan.total_cost(inst.cost) == best == F(1, 2)

    # F + d -> C^{a,d,b,c}: keep d, else eject e, else split {a,b,c}
    f_state = dist(("abc", 1, 2), ("abd", 1, 8), ("abe", 1, 8), ("acd", 1, 8), ("ace", 1, 8))
    c_target = dist(("abd", 1, 2), ("acd", 1, 2))
    fd_plan = TransportPlan(
        {
            (cfg("abd"), cfg("abd")): F(1, 8),
            (cfg("acd"), cfg("acd")): F(1, 8),
            (cfg("abe"), cfg("abd")): F(1, 8),
            (cfg("ace"), cfg("acd")): F(1, 8),
            (cfg("abc"), cfg("acd")): F(1, 4),  # eject b
            (cfg("abc"), cfg("abd")): F(1, 4),  # eject c
        }
    )
    inst = TransportInstance.between(f_state, c_target, lambda x, y: service_cost(x, "d", y))
    assert fd_plan.check_marginals(inst)
    _, best = solve_min_cost(inst)
    assert fd_plan.total_cost(inst.cost) == best == F(3, 4)


def test_infeasible_marginals_rejected():
    with pytest.raises(ValueError):
        TransportInstance(
            ((cfg("ab"), F(1, 2)),),
            ((cfg("ab"), F(1, 3)),),
            distance,
        )


def _random_instance(rng, n, m, universe="abcdef"):
    def rand_dist(count):
        cuts = sorted(rng.sample(range(1, 24), count - 1))
        weights = []
        prev = 0
        for c in cuts + [24]:
            weights.append(F(c - prev, 24))
            prev = c
        configs = rng.sample([Config(c) for c in combinations(universe, 2)], count)
        return list(zip(configs, weights))

    sources = rand_dist(n)
    sinks = rand_dist(m)
    costs = {
        (a, b): F(rng.randrange(0, 12), rng.choice([1, 2, 3, 4]))
        for a, _ in sources
        for b, _ in sinks
    }
    return sources, sinks, lambda a, b: costs[(a, b)]


def test_solver_matches_vertex_enumeration():
    rng = random.Random(20240811)
    for trial in range(30):
        n, m = rng.choice([(2, 3), (3, 3), (3, 4), (4, 4)])
        sources, sinks, cost = _random_instance(rng, n, m)
        inst = TransportInstance(tuple(sources), tuple(sinks), cost)
        plan, got = solve_min_cost(inst)
        assert plan.check_marginals(inst)
        assert got == brute_min_transport(sources, sinks, cost), trial


def test_solver_never_beaten_by_random_plans():
    rng = random.Random(7)
    for trial in range(25):
        sources, sinks, cost = _random_instance(rng, 3, 4)
        inst = TransportInstance(tuple(sources), tuple(sinks), cost)
        _, best = solve_min_cost(inst)
        for _ in range(20):
            plan = random_feasible_plan(rng, sources, sinks)
            sampled = sum(f * cost(a, b) for (a, b), f in plan.items())
            assert sampled >= best


def test_canonical_plan_is_deterministic_and_lex_greedy():
    pi = dist(("ab", 1, 2), ("ac", 1, 2))
    sigma = dist(("ab", 1, 2), ("ac", 1, 2))
    # all-zero-cost square: the lexicographic preference keeps mass diagonal
    # on ({a,b},{a,b}) first since that pair sorts lowest
    inst = TransportInstance.between(pi, sigma, lambda x, y: 0)
    plan1, _ = solve_min_cost(inst)
    plan2, _ = solve_min_cost(inst)
    assert plan1.flow == plan2.flow
    assert plan1.flow[(cfg("ab"), cfg("ab"))] == F(1, 2)
    assert plan1.flow[(cfg("ac"), cfg("ac"))] == F(1, 2)
