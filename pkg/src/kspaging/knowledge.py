"""Knowledge states, per-step outcomes, and potential certification.

A knowledge state pairs a configuration distribution with a
zero-minimum estimator.  For an action (state, request, weighted
subsequent states) the step cost is the transportation cost from the
state's distribution to the subsequent mixture, and the adjustment is
the largest value the updated estimator can concede to the weighted
subsequent estimators while staying above them everywhere.

A table Phi of non-negative class values certifies a competitive ratio
C when every action satisfies cost + delta(Phi) <= C * adjust; the
verifier reports the exact slack of each action, and the synthesizer
searches for such a table (or the least feasible C) by exact rational
linear programming.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from .cache import Page
from .estimator import Estimator, weighted_sum
from .transport import ConfigDistribution, TransportPlan, step_plan

Subsequents = Sequence[tuple[Fraction, "KnowledgeState"]]


class KnowledgeState:
    """A (distribution, estimator) pair; the estimator has zero minimum."""

    __slots__ = ("pi", "omega")

    def __init__(self, pi: ConfigDistribution, omega: Estimator):
        if omega.min_value != 0:
            raise ValueError("knowledge-state estimator must have zero minimum")
        for x in pi.support:
            assert x in omega.entries, (
                f"distribution point {x!r} outside estimator support"
            )
        self.pi = pi
        self.omega = omega

    def __repr__(self) -> str:
        return f"KnowledgeState({self.pi!r}, {self.omega!r})"


def _checked_weights(subs: Subsequents) -> list[tuple[Fraction, "KnowledgeState"]]:
    out = [(Fraction(w), k) for w, k in subs]
    if not out or any(w <= 0 for w, _ in out):
        raise ValueError("subsequent weights must be strictly positive")
    if sum(w for w, _ in out) != 1:
        raise ValueError("subsequent weights must sum to exactly 1")
    return out


def max_adjust(state: KnowledgeState, r: Page, subs: Subsequents) -> Fraction:
    """Largest adjustment for which the update stays above the subsequents.

    Equals the minimum, over the updated estimator's support, of the
    updated value minus the weighted subsequent value; the dominance
    check on the support is equivalent to the global one.  May be
    negative.
    """
    branches = _checked_weights(subs)
    upd = state.omega.update(r)
    ref = weighted_sum([(w, k.omega) for w, k in branches])
    return min(v - ref.evaluate(x) for x, v in upd.entries.items())


def check_update_inequality(
    state: KnowledgeState, r: Page, subs: Subsequents, adjust: Fraction | int
) -> bool:
    return Fraction(adjust) <= max_adjust(state, r, subs)


@dataclass(frozen=True)
class ActionOutcome:
    """Everything one (state, request) action yields."""

    branches: tuple[tuple[Fraction, KnowledgeState], ...]
    mixture: ConfigDistribution
    cost: Fraction
    adjust: Fraction
    plan: TransportPlan  # canonical minimum transport; drives the behavioural conversion


def action_outcome(state: KnowledgeState, r: Page, subs: Subsequents) -> ActionOutcome:
    branches = tuple(_checked_weights(subs))
    mixture = ConfigDistribution.mix([(w, k.pi) for w, k in branches])
    plan, cost = step_plan(state.pi, r, mixture)
    adjust = max_adjust(state, r, subs)
    return ActionOutcome(branches, mixture, cost, adjust, plan)


@dataclass(frozen=True)
class ActionCheck:
    """One verified action: exact cost, adjustment, potential drift, slack."""

    label: str
    state_class: str
    request_class: str
    cost: Fraction
    adjust: Fraction
    delta_phi: Fraction
    slack: Fraction


@dataclass(frozen=True)
class PotentialReport:
    ratio: Fraction
    potential: dict[str, Fraction]
    checks: tuple[ActionCheck, ...]
    nonnegative: bool

    @property
    def passed(self) -> bool:
        return self.nonnegative and all(c.slack >= 0 for c in self.checks)

    def violations(self) -> tuple[ActionCheck, ...]:
        return tuple(c for c in self.checks if c.slack < 0)

    def check(self, label: str) -> ActionCheck:
        for c in self.checks:
            if c.label == label:
                return c
        raise KeyError(label)

    def to_json_dict(self) -> dict:
        return {
            "C": str(self.ratio),
            "feasible": self.passed,
            "potential": {name: str(v) for name, v in sorted(self.potential.items())},
            "actions": [
                {
                    "label": c.label,
                    "state_class": c.state_class,
                    "request_class": c.request_class,
                    "cost": str(c.cost),
                    "adjust": str(c.adjust),
                    "delta_phi": str(c.delta_phi),
                    "slack": str(c.slack),
                }
                for c in self.checks
            ],
        }


def verify_potential(
    rules, potential: Mapping[str, Fraction | int], ratio: Fraction | int
) -> PotentialReport:
    """Check cost + delta(Phi) <= ratio * adjust on every action of a rule table.

    Violations are report content, not errors; `passed` also requires
    the table itself to be non-negative.
    """
    ratio = Fraction(ratio)
    pot = {name: Fraction(v) for name, v in potential.items()}
    checks = []
    for act in rules.actions():
        out = rules.outcome(act.state, act.request)
        dphi = (
            sum((w * pot[sub.name] for w, sub in out.branches), Fraction(0))
            - pot[act.state.name]
        )
        slack = ratio * out.adjust - out.cost - dphi
        checks.append(
            ActionCheck(
                act.label, act.state.name, act.request_class,
                out.cost, out.adjust, dphi, slack,
            )
        )
    nonnegative = all(v >= 0 for v in pot.values())
    return PotentialReport(ratio, pot, tuple(checks), nonnegative)


@dataclass(frozen=True)
class SynthesisResult:
    ratio: Fraction
    potential: dict[str, Fraction]


def synthesize_potential(
    rules,
    ratio: Fraction | int | None = None,
    fixed: Mapping[str, Fraction | int] | None = None,
) -> SynthesisResult | None:
    """Find a certifying table by exact LP, or None when none exists.

    With `ratio` given, searches for any feasible non-negative table
    (returning the one of least total value, which makes the output
    canonical); with `ratio` None, first minimizes the ratio itself and
    then canonicalizes the table at that optimum.  `fixed` pins chosen
    class values.
    """
    import sympy
    from sympy.solvers.simplex import InfeasibleLPError, lpmin

    def to_sym(v: Fraction | int):
        f = Fraction(v)
        return sympy.Rational(f.numerator, f.denominator)

    def to_frac(v) -> Fraction:
        # lpmin is exact: values are ints or sympy Integers/Rationals
        return Fraction(str(v))

    fixed = {name: Fraction(v) for name, v in (fixed or {}).items()}
    if any(v < 0 for v in fixed.values()):
        return None
    phi = {
        name: to_sym(fixed[name]) if name in fixed else sympy.Symbol(f"phi_{name}")
        for name in rules.class_names
    }
    free = [phi[name] for name in rules.class_names if name not in fixed]

    def constraints(c_sym) -> list | None:
        cons = [v >= 0 for v in free]
        for act in rules.actions():
            out = rules.outcome(act.state, act.request)
            lhs = to_sym(out.cost) + sum(
                to_sym(w) * phi[sub.name] for w, sub in out.branches
            ) - phi[act.state.name]
            rel = lhs <= c_sym * to_sym(out.adjust)
            if rel is sympy.false:
                return None
            if rel is not sympy.true:
                cons.append(rel)
        return cons

    def solve(objective, cons) -> dict | None:
        try:
            _, sol = lpmin(objective, cons)
        except InfeasibleLPError:
            return None
        return sol

    if ratio is not None:
        cons = constraints(to_sym(ratio))
        if cons is None:
            return None
        if not free:
            return SynthesisResult(Fraction(ratio), dict(fixed))
        sol = solve(sum(free, sympy.Integer(0)), cons)
        if sol is None:
            return None
        table = {
            name: fixed[name] if name in fixed else to_frac(sol[phi[name]])
            for name in rules.class_names
        }
        return SynthesisResult(Fraction(ratio), table)

    c_sym = sympy.Symbol("C")
    cons = constraints(c_sym)
    if cons is None:
        return None
    sol = solve(c_sym, cons + [c_sym >= 0])
    if sol is None:
        return None
    best = to_frac(sol[c_sym])
    # canonicalize the table at the optimal ratio
    result = synthesize_potential(rules, ratio=best, fixed=fixed)
    assert result is not None
    return SynthesisResult(best, result.potential)
