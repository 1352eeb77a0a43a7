"""Exact and sampled execution of knowledge-state rule tables.

The distributional run propagates an exact probability mix over
canonical states, accruing expected cost and adjustment per step.  The
behavioural conversion pins the algorithm to one concrete cache at a
time: from configuration x it samples the landing configuration y along
the canonical minimum transport (probability plan(x, y)/pi(x)) and then
the subsequent state with probability weight * sigma(y)/mixture(y).
The exact chain propagates the resulting joint distribution over
(configuration, state) pairs in rational arithmetic, and the Monte
Carlo driver replays the behavioural step under seeded substreams.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .cache import Config, Page
from .rules import RuleTable, StateClass


def parse_sequence(text: str) -> list[Page]:
    """One page token per line; blank lines and '#' comments are skipped."""
    out: list[Page] = []
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        out.extend(line.split())
    return out


def read_sequence(path) -> list[Page]:
    with open(path, encoding="utf-8") as fh:
        return parse_sequence(fh.read())


class DistributionalRun:
    """Exact expected-cost execution over the knowledge-state mix."""

    __slots__ = ("rules", "mix", "expected_cost", "expected_adjust", "step_log")

    def __init__(self, rules, mix, expected_cost, expected_adjust, step_log):
        self.rules: RuleTable = rules
        self.mix: dict[StateClass, Fraction] = mix
        self.expected_cost: Fraction = expected_cost
        self.expected_adjust: Fraction = expected_adjust
        self.step_log: tuple[tuple[Fraction, Fraction], ...] = step_log

    @classmethod
    def start(cls, rules: RuleTable, pages: Sequence[Page]) -> "DistributionalRun":
        s0 = rules.initial_state(pages)
        return cls(rules, {s0: Fraction(1)}, Fraction(0), Fraction(0), ())

    def step(self, r: Page) -> "DistributionalRun":
        new_mix: dict[StateClass, Fraction] = {}
        cost = Fraction(0)
        adjust = Fraction(0)
        for s, p in self.mix.items():
            out = self.rules.outcome(s, r)
            cost += p * out.cost
            adjust += p * out.adjust
            for w, sub in out.branches:
                new_mix[sub] = new_mix.get(sub, Fraction(0)) + p * w
        assert sum(new_mix.values()) == 1
        return DistributionalRun(
            self.rules,
            new_mix,
            self.expected_cost + cost,
            self.expected_adjust + adjust,
            self.step_log + ((cost, adjust),),
        )

    def run(self, requests: Sequence[Page]) -> "DistributionalRun":
        run = self
        for r in requests:
            run = run.step(r)
        return run

    def expected_estimate(self, x: Config) -> Fraction:
        """Expected current estimator value at configuration x."""
        return sum(
            (p * self.rules.realize(s).omega.evaluate(x) for s, p in self.mix.items()),
            Fraction(0),
        )

    def page_probability(self, page: Page) -> Fraction:
        """Probability that `page` is currently cached."""
        total = Fraction(0)
        for s, p in self.mix.items():
            pi = self.rules.realize(s).pi
            total += p * sum((w for x, w in pi.items() if page in x), Fraction(0))
        return total


@dataclass(frozen=True)
class BehavioralState:
    """One concrete cache plus the emulated knowledge state."""

    config: Config
    state: StateClass


def start_behavioral(rules: RuleTable, pages: Sequence[Page]) -> BehavioralState:
    s0 = rules.initial_state(pages)
    ks = rules.realize(s0)
    (x0,) = ks.pi.support
    return BehavioralState(x0, s0)


def behavioral_step(
    rules: RuleTable, st: BehavioralState, r: Page, rng: np.random.Generator
) -> tuple[BehavioralState, int]:
    """Serve one request, paying the sampled service cost.

    Draws a single uniform integer below the row's common denominator,
    so the branch probabilities are hit exactly.
    """
    denom, rows = rules.sampler(st.state, r)[st.config]
    u = int(rng.integers(denom)) if denom > 1 else 0
    for threshold, y, sub, cost, _p in rows:
        if u < threshold:
            return BehavioralState(y, sub), cost
    raise AssertionError("sampling thresholds must cover the denominator")


def behavioral_run(
    rules: RuleTable, requests: Sequence[Page], pages: Sequence[Page], rng: np.random.Generator
) -> int:
    st = start_behavioral(rules, pages)
    total = 0
    for r in requests:
        st, cost = behavioral_step(rules, st, r, rng)
        total += cost
    return total


def trial_rng(seed: int, trial: int) -> np.random.Generator:
    """The named per-trial substream: PCG64 under a spawned seed sequence."""
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(trial,)))


def monte_carlo(
    rules: RuleTable,
    requests: Sequence[Page],
    trials: int,
    seed: int,
    pages: Sequence[Page],
) -> tuple[Fraction, Fraction]:
    """Mean and sample variance of the behavioural cost over seeded trials.

    Deterministic given (seed, trials): trial i always uses substream i,
    whatever order the trials run in.
    """
    if trials < 1:
        raise ValueError("need at least one trial")
    total = 0
    total_sq = 0
    for t in range(trials):
        cost = behavioral_run(rules, requests, pages, trial_rng(seed, t))
        total += cost
        total_sq += cost * cost
    mean = Fraction(total, trials)
    if trials == 1:
        return mean, Fraction(0)
    variance = (Fraction(total_sq) - trials * mean * mean) / (trials - 1)
    return mean, variance


class ExactChain:
    """Exact joint distribution over (configuration, state) pairs per step."""

    __slots__ = ("rules", "joint", "step_costs")

    def __init__(self, rules, joint, step_costs):
        self.rules: RuleTable = rules
        self.joint: dict[tuple[Config, StateClass], Fraction] = joint
        self.step_costs: tuple[Fraction, ...] = step_costs

    @classmethod
    def start(cls, rules: RuleTable, pages: Sequence[Page]) -> "ExactChain":
        st = start_behavioral(rules, pages)
        return cls(rules, {(st.config, st.state): Fraction(1)}, ())

    def step(self, r: Page) -> "ExactChain":
        new_joint: dict[tuple[Config, StateClass], Fraction] = {}
        cost = Fraction(0)
        for (x, s), q in self.joint.items():
            _, rows = self.rules.sampler(s, r)[x]
            for _threshold, y, sub, step_cost, p in rows:
                key = (y, sub)
                new_joint[key] = new_joint.get(key, Fraction(0)) + q * p
                cost += q * p * step_cost
        assert sum(new_joint.values()) == 1
        return ExactChain(self.rules, new_joint, self.step_costs + (cost,))

    def run(self, requests: Sequence[Page]) -> "ExactChain":
        chain = self
        for r in requests:
            chain = chain.step(r)
        return chain

    def state_marginal(self) -> dict[StateClass, Fraction]:
        out: dict[StateClass, Fraction] = {}
        for (_x, s), q in self.joint.items():
            out[s] = out.get(s, Fraction(0)) + q
        return out


def behavioral_chain_exact(
    rules: RuleTable, requests: Sequence[Page], pages: Sequence[Page]
) -> list[ExactChain]:
    """The chain after every prefix of the sequence, index t = prefix length."""
    chains = [ExactChain.start(rules, pages)]
    for r in requests:
        chains.append(chains[-1].step(r))
    return chains
