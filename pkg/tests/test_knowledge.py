from fractions import Fraction

import pytest

from kspaging import (
    ConfigDistribution,
    KnowledgeState,
    action_outcome,
    check_update_inequality,
    k2_rules,
    k3_rules,
    max_adjust,
    parse_bar,
    reference_potentials,
    synthesize_potential,
    verify_potential,
)

from oracles import cfg

F = Fraction


@pytest.fixture(scope="module")
def r2():
    return k2_rules()


@pytest.fixture(scope="module")
def r3():
    return k3_rules()


def _ks(rules, name, *groups):
    return rules.realize(rules.state(name, *groups))


def test_knowledge_state_requires_zero_minimum():
    with pytest.raises(ValueError):
        KnowledgeState(ConfigDistribution({cfg("ab"): F(1)}), parse_bar("ab||", 2) + 1)


def test_max_adjust_k2(r2):
    a = _ks(r2, "A", "ab")
    b_sub = _ks(r2, "B", "c", "ab")
    assert max_adjust(a, "c", [(F(1), b_sub)]) == 1

    b = _ks(r2, "B", "a", "bc")
    assert max_adjust(b, "b", [(F(1), _ks(r2, "A", "ab"))]) == 0

    third = F(1, 3)
    subs = [(third, _ks(r2, "A", pair)) for pair in ("ad", "bd", "cd")]
    assert max_adjust(b, "d", subs) == F(1, 3)


def test_max_adjust_k3_new_page_cases(r3):
    f_state = _ks(r3, "F", "a", "bc", "de")
    sixth = F(1, 6)
    subs = [
        (sixth, _ks(r3, "C", "fa", "bc")),
        (sixth, _ks(r3, "C", "fb", "ac")),
        (sixth, _ks(r3, "C", "fc", "ab")),
        (sixth, _ks(r3, "C", "fa", "de")),
        (sixth, _ks(r3, "C", "fb", "de")),
        (sixth, _ks(r3, "C", "fc", "de")),
    ]
    assert max_adjust(f_state, "f", subs) == F(1, 6)

    # replacing the estimator table with plain caches around the new page
    # costs margin: the best adjustment is negative
    d_state = _ks(r3, "D", "a", "bcde")
    tenth = F(1, 10)
    pairs = ["bc", "bd", "be", "cd", "ce", "de", "ab", "ac", "ad", "ae"]
    subs = [(tenth, _ks(r3, "A", "f" + p)) for p in pairs]
    assert max_adjust(d_state, "f", subs) == F(-1, 5)


def test_check_update_inequality_boundaries(r2):
    b = _ks(r2, "B", "a", "bc")
    third = F(1, 3)
    subs = [(third, _ks(r2, "A", pair)) for pair in ("ad", "bd", "cd")]
    assert check_update_inequality(b, "d", subs, F(1, 3))
    assert not check_update_inequality(b, "d", subs, F(1, 2))
    assert check_update_inequality(b, "d", subs, max_adjust(b, "d", subs))


def test_action_outcome_examples(r2, r3):
    a = _ks(r2, "A", "ab")
    out = action_outcome(a, "c", [(F(1), _ks(r2, "B", "c", "ab"))])
    assert (out.cost, out.adjust) == (1, 1)

    b = _ks(r2, "B", "a", "bc")
    out = action_outcome(b, "b", [(F(1), _ks(r2, "A", "ab"))])
    assert (out.cost, out.adjust) == (F(1, 2), 0)

    f_state = _ks(r3, "F", "a", "bc", "de")
    out = action_outcome(f_state, "b", [(F(1), _ks(r3, "E", "ab", "c", "de"))])
    assert (out.cost, out.adjust) == (F(1, 4), 0)


def test_subsequent_weights_validated(r2):
    a = _ks(r2, "A", "ab")
    with pytest.raises(ValueError):
        max_adjust(a, "c", [(F(1, 2), _ks(r2, "B", "c", "ab"))])


def test_verify_k2_is_tight(r2):
    report = verify_potential(r2, {"A": 0, "B": F(1, 2)}, F(3, 2))
    assert report.passed
    for label, cost, adjust, dphi in [
        ("Ac", F(1), F(1), F(1, 2)),
        ("Bb", F(1, 2), F(0), F(-1, 2)),
        ("Bd", F(1), F(1, 3), F(-1, 2)),
    ]:
        c = report.check(label)
        assert (c.cost, c.adjust, c.delta_phi, c.slack) == (cost, adjust, dphi, F(0))
    for label in ("Aa", "Ba"):
        c = report.check(label)
        assert (c.cost, c.adjust, c.delta_phi, c.slack) == (0, 0, 0, 0)


def test_verify_k2_fails_below_three_halves(r2):
    report = verify_potential(r2, {"A": 0, "B": F(1, 2)}, F(7, 5))
    assert not report.passed
    assert report.violations()


def test_verify_k3_certified_table(r3):
    report = verify_potential(r3, r3.potential, F(11, 6))
    assert report.passed
    expected_costs = {
        "Bb": F(1, 3), "Cc": F(1, 2), "Db": F(1, 2), "Ec": F(1, 2), "Ed": F(3, 4),
        "Fb": F(1, 4), "Fd": F(3, 4), "Ef": F(1), "Df": F(1), "Ff": F(1),
        "Ad": F(1), "Be": F(1), "Ce": F(1),
    }
    for label, cost in expected_costs.items():
        assert report.check(label).cost == cost, label
    assert report.check("Ff").adjust == F(1, 6)


def test_verify_k3_reference_table_fails_on_db(r3):
    report = verify_potential(r3, reference_potentials("k3"), F(11, 6))
    assert not report.passed
    assert report.check("Db").slack < 0


def test_negative_table_fails_verification(r2):
    report = verify_potential(r2, {"A": F(-1), "B": F(1, 2)}, F(100))
    assert not report.nonnegative and not report.passed


def test_trivial_actions_are_free(r2, r3):
    for rules in (r2, r3):
        report = verify_potential(rules, rules.potential, rules.ratio)
        for c in report.checks:
            if c.request_class == "trivial":
                assert (c.cost, c.adjust, c.delta_phi) == (0, 0, 0)


def test_monotone_slack_in_source_potential(r2):
    # raising B only helps B's outgoing non-self actions
    lo = verify_potential(r2, {"A": 0, "B": F(1, 2)}, F(3, 2))
    hi = verify_potential(r2, {"A": 0, "B": F(3, 4)}, F(3, 2))
    assert hi.check("Bd").slack >= lo.check("Bd").slack
    assert hi.check("Bb").slack >= lo.check("Bb").slack


def test_synthesize_k2_minimal_ratio(r2):
    result = synthesize_potential(r2)
    assert result is not None
    assert result.ratio == F(3, 2)
    assert result.potential == {"A": F(0), "B": F(1, 2)}
    assert verify_potential(r2, result.potential, result.ratio).passed


def test_synthesize_k2_infeasible_at_one(r2):
    assert synthesize_potential(r2, ratio=1) is None


def test_synthesize_k3_minimal_ratio(r3):
    result = synthesize_potential(r3)
    assert result is not None
    assert result.ratio == F(11, 6)
    assert result.potential == r3.potential
    assert verify_potential(r3, result.potential, result.ratio).passed


def test_synthesize_k3_with_pinned_classes(r3):
    fixed = {k: v for k, v in reference_potentials("k3").items() if k != "D"}
    result = synthesize_potential(r3, ratio=F(11, 6), fixed=fixed)
    assert result is not None
    assert F(3, 2) <= result.potential["D"] <= F(5, 3)
    assert verify_potential(r3, result.potential, F(11, 6)).passed
    # the feasible interval for D is exactly [3/2, 5/3]
    for d, ok in [(F(3, 2), True), (F(5, 3), True), (F(149, 100), False), (F(42, 25), False)]:
        table = dict(fixed)
        table["D"] = d
        assert verify_potential(r3, table, F(11, 6)).passed == ok


def test_report_json_shape(r2):
    payload = verify_potential(r2, r2.potential, r2.ratio).to_json_dict()
    assert payload["C"] == "3/2" and payload["feasible"] is True
    row = payload["actions"][0]
    assert set(row) == {
        "label", "state_class", "request_class", "cost", "adjust", "delta_phi", "slack",
    }
    assert all(isinstance(row[k], str) for k in ("cost", "adjust", "delta_phi", "slack"))
