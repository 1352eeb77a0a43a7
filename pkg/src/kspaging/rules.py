"""The concrete rule tables of the 2-cache and 3-cache algorithms.

Up to renaming of pages, the 2-cache algorithm has two state classes
(A, B) and the 3-cache algorithm six (A-F).  A state class instance
records which concrete pages fill which role group; pages inside one
group are interchangeable.  `realize` is the single bridge from class
instances to (distribution, estimator) semantics.

Outcomes (step cost, maximal adjustment, canonical transport plan) and
behavioural sampling tables are computed through the generic machinery
and cached per concrete (state, request) pair; the caches only ever
gain entries, so sharing a table between threads is safe.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from math import lcm
from typing import Iterable, Sequence

from .cache import Config, Page, service_cost
from .estimator import parse_bar
from .knowledge import ActionOutcome, KnowledgeState, action_outcome
from .transport import ConfigDistribution

_GROUP_SHAPES: dict[tuple[str, str], tuple[int, ...]] = {
    ("k2", "A"): (2,),
    ("k2", "B"): (1, 2),
    ("k3", "A"): (3,),
    ("k3", "B"): (1, 3),
    ("k3", "C"): (2, 2),
    ("k3", "D"): (1, 4),
    ("k3", "E"): (2, 1, 2),
    ("k3", "F"): (1, 2, 2),
}

# request class per role group; group 0 is always the forced block
_REQUEST_CLASS: dict[tuple[str, str], tuple[str, ...]] = {
    ("k2", "A"): ("trivial",),
    ("k2", "B"): ("trivial", "b"),
    ("k3", "A"): ("trivial",),
    ("k3", "B"): ("trivial", "b"),
    ("k3", "C"): ("trivial", "c"),
    ("k3", "D"): ("trivial", "b"),
    ("k3", "E"): ("trivial", "c", "d"),
    ("k3", "F"): ("trivial", "b", "d"),
}


@dataclass(frozen=True)
class StateClass:
    """A state class instance: class name plus concrete pages per role group."""

    algo: str
    name: str
    groups: tuple[tuple[Page, ...], ...]

    def __post_init__(self):
        groups = tuple(tuple(sorted(g)) for g in self.groups)
        object.__setattr__(self, "groups", groups)
        shape = _GROUP_SHAPES.get((self.algo, self.name))
        if shape is None:
            raise ValueError(f"unknown state class {self.algo}:{self.name}")
        if tuple(len(g) for g in groups) != shape:
            raise ValueError(
                f"{self.algo}:{self.name} wants group sizes {shape}, got {groups}"
            )
        pages = [p for g in groups for p in g]
        if len(set(pages)) != len(pages):
            raise ValueError(f"role pages must be distinct, got {groups}")

    @property
    def pages(self) -> tuple[Page, ...]:
        return tuple(p for g in self.groups for p in g)

    def serialize(self) -> str:
        body = ";".join(",".join(g) for g in self.groups)
        return f"{self.algo.upper()}:{self.name}({body})"

    @classmethod
    def parse(cls, text: str) -> "StateClass":
        head, _, body = text.partition(":")
        name, _, rest = body.partition("(")
        if not rest.endswith(")"):
            raise ValueError(f"malformed state class {text!r}")
        groups = tuple(
            tuple(tok for tok in grp.split(",") if tok)
            for grp in rest[:-1].split(";")
        )
        return cls(head.lower(), name, groups)

    def __repr__(self) -> str:
        return self.serialize()


@dataclass(frozen=True)
class ActionSpec:
    """One symmetry-distinct (state class, request class) action."""

    label: str
    state: StateClass
    request: Page
    request_class: str


_SamplerRow = tuple[int, Config, StateClass, int, Fraction]


class RuleTable:
    """Transitions, potential, and target ratio for one algorithm."""

    algo: str
    k: int
    ratio: Fraction
    class_names: tuple[str, ...]

    def __init__(self, potential: dict[str, Fraction]):
        self.potential = dict(potential)
        self._realized: dict[StateClass, KnowledgeState] = {}
        self._outcomes: dict[tuple[StateClass, Page], ActionOutcome] = {}
        self._samplers: dict[
            tuple[StateClass, Page], dict[Config, tuple[int, tuple[_SamplerRow, ...]]]
        ] = {}

    def state(self, name: str, *groups: Iterable[Page]) -> StateClass:
        return StateClass(self.algo, name, tuple(tuple(g) for g in groups))

    def initial_state(self, pages: Sequence[Page]) -> StateClass:
        """The start state: class A on the initial cache content."""
        if len(set(pages)) < self.k:
            raise ValueError(f"need at least {self.k} distinct pages")
        return self.state("A", sorted(set(pages))[: self.k])

    def classify(self, s: StateClass, r: Page) -> str:
        for gi, g in enumerate(s.groups):
            if r in g:
                return _REQUEST_CLASS[(self.algo, s.name)][gi]
        return "new"

    def subsequents(self, s: StateClass, r: Page) -> tuple[tuple[Fraction, StateClass], ...]:
        rcls = self.classify(s, r)
        if rcls == "trivial":
            return ((Fraction(1), s),)
        return self._transition(s, r, rcls)

    def _transition(
        self, s: StateClass, r: Page, rcls: str
    ) -> tuple[tuple[Fraction, StateClass], ...]:
        raise NotImplementedError

    def _realize_parts(self, s: StateClass) -> tuple[dict[Config, Fraction], str]:
        raise NotImplementedError

    def realize(self, s: StateClass) -> KnowledgeState:
        ks = self._realized.get(s)
        if ks is None:
            dist, bar = self._realize_parts(s)
            ks = KnowledgeState(ConfigDistribution(dist), parse_bar(bar, self.k))
            self._realized[s] = ks
        return ks

    def outcome(self, s: StateClass, r: Page) -> "RuleOutcome":
        key = (s, r)
        out = self._outcomes.get(key)
        if out is None:
            branches = self.subsequents(s, r)
            generic = action_outcome(
                self.realize(s), r, [(w, self.realize(sub)) for w, sub in branches]
            )
            out = RuleOutcome(
                cost=generic.cost,
                adjust=generic.adjust,
                branches=branches,
                mixture=generic.mixture,
                plan=generic.plan,
            )
            self._outcomes[key] = out
        return out

    def sampler(
        self, s: StateClass, r: Page
    ) -> dict[Config, tuple[int, tuple[_SamplerRow, ...]]]:
        """Per-configuration joint sampling rows for the behavioural conversion.

        From configuration x the next (configuration y, state) pair is
        drawn with probability plan(x, y)/pi(x) * weight * sigma(y)/mixture(y);
        rows carry cumulative integer thresholds over a common denominator
        so draws stay exact.
        """
        key = (s, r)
        table = self._samplers.get(key)
        if table is not None:
            return table
        out = self.outcome(s, r)
        pi = self.realize(s).pi
        table = {}
        for x, px in pi.items():
            probs: dict[tuple[Config, StateClass], Fraction] = {}
            for y, f in sorted(out.plan.row(x).items()):
                py = f / px
                for w, sub in out.branches:
                    sy = self.realize(sub).pi[y]
                    if sy > 0:
                        p = py * w * sy / out.mixture[y]
                        probs[(y, sub)] = probs.get((y, sub), Fraction(0)) + p
            assert sum(probs.values()) == 1
            denom = lcm(*(p.denominator for p in probs.values()))
            rows = []
            acc = 0
            for (y, sub), p in sorted(probs.items()):
                acc += p.numerator * (denom // p.denominator)
                rows.append((acc, y, sub, service_cost(x, r, y), p))
            assert acc == denom
            table[x] = (denom, tuple(rows))
        self._samplers[key] = table
        return table

    def actions(self) -> tuple[ActionSpec, ...]:
        raise NotImplementedError


@dataclass(frozen=True)
class RuleOutcome:
    """Cached per-(state, request) results at the class-instance level."""

    cost: Fraction
    adjust: Fraction
    branches: tuple[tuple[Fraction, StateClass], ...]
    mixture: ConfigDistribution
    plan: "TransportPlan"


class K2Rules(RuleTable):
    """The 3/2-competitive two-page-cache algorithm."""

    algo = "k2"
    k = 2
    ratio = Fraction(3, 2)
    class_names = ("A", "B")

    def __init__(self):
        super().__init__({"A": Fraction(0), "B": Fraction(1, 2)})

    def _realize_parts(self, s: StateClass):
        half = Fraction(1, 2)
        if s.name == "A":
            (p, q), = s.groups
            return {Config([p, q]): Fraction(1)}, f"{p} {q} | |"
        (a,), (b, c) = s.groups
        dist = {Config([a, b]): half, Config([a, c]): half}
        return dist, f"{a} | {b} {c} |"

    def _transition(self, s, r, rcls):
        one = Fraction(1)
        if s.name == "A":  # new page: remember both old pages as candidates
            return ((one, self.state("B", (r,), s.groups[0])),)
        (a,), _ = s.groups
        if rcls == "b":
            return ((one, self.state("A", (r, a))),)
        # new page: all three old pages equally likely to be the survivor
        third = Fraction(1, 3)
        return tuple((third, self.state("A", (r, p))) for p in s.pages)

    def actions(self):
        a = self.state("A", "ab")
        b = self.state("B", "a", "bc")
        return (
            ActionSpec("Aa", a, "a", "trivial"),
            ActionSpec("Ac", a, "c", "new"),
            ActionSpec("Ba", b, "a", "trivial"),
            ActionSpec("Bb", b, "b", "b"),
            ActionSpec("Bd", b, "d", "new"),
        )


class K3Rules(RuleTable):
    """The 11/6-competitive three-page-cache algorithm.

    The shipped potential uses Phi(D) = 3/2, the least value the class-D
    constraints admit at ratio 11/6 (`reference_potentials` keeps the
    historical 1/2, which fails verification on action Db).
    """

    algo = "k3"
    k = 3
    ratio = Fraction(11, 6)
    class_names = ("A", "B", "C", "D", "E", "F")

    def __init__(self):
        super().__init__(
            {
                "A": Fraction(0),
                "B": Fraction(5, 6),
                "C": Fraction(1, 2),
                "D": Fraction(3, 2),
                "E": Fraction(1),
                "F": Fraction(5, 4),
            }
        )

    def _realize_parts(self, s: StateClass):
        half, quarter, eighth = Fraction(1, 2), Fraction(1, 4), Fraction(1, 8)
        third, sixth = Fraction(1, 3), Fraction(1, 6)
        g = s.groups
        if s.name == "A":
            (a, b, c), = g
            return {Config([a, b, c]): Fraction(1)}, f"{a} {b} {c} | | |"
        if s.name == "B":
            (a,), (b, c, d) = g
            dist = {
                Config([a, b, c]): third,
                Config([a, b, d]): third,
                Config([a, c, d]): third,
            }
            return dist, f"{a} | {b} {c} {d} | |"
        if s.name == "C":
            (a, b), (c, d) = g
            dist = {Config([a, b, c]): half, Config([a, b, d]): half}
            return dist, f"{a} {b} | | {c} {d} |"
        if s.name == "D":
            (a,), rest = g
            dist = {Config([a, p, q]): sixth for p, q in combinations(rest, 2)}
            return dist, f"{a} | {' '.join(rest)} | |"
        if s.name == "E":
            (a, b), (c,), (d, e) = g
            dist = {
                Config([a, b, c]): half,
                Config([a, b, d]): quarter,
                Config([a, b, e]): quarter,
            }
            return dist, f"{a} {b} | | {c} {d} {e} |"
        (a,), (b, c), (d, e) = g
        dist = {
            Config([a, b, c]): half,
            Config([a, b, d]): eighth,
            Config([a, b, e]): eighth,
            Config([a, c, d]): eighth,
            Config([a, c, e]): eighth,
        }
        return dist, f"{a} | {b} {c} | {d} {e} |"

    def _transition(self, s, r, rcls):
        one = Fraction(1)
        g = s.groups
        if s.name == "A":
            return ((one, self.state("B", (r,), g[0])),)
        if s.name == "B":
            (a,), others = g
            if rcls == "b":
                rest = tuple(p for p in others if p != r)
                return ((one, self.state("C", (a, r), rest)),)
            return ((one, self.state("D", (r,), s.pages)),)
        if s.name == "C":
            front, back = g
            if rcls == "c":
                return ((one, self.state("A", front + (r,))),)
            return ((one, self.state("F", (r,), front, back)),)
        if s.name == "D":
            (a,), others = g
            if rcls == "b":
                rest = tuple(p for p in others if p != r)
                return ((one, self.state("E", (a, r), rest[:1], rest[1:])),)
            # new page: forget the estimator down to plain caches around r
            tenth = Fraction(1, 10)
            return tuple(
                (tenth, self.state("A", (r,) + pair))
                for pair in combinations(s.pages, 2)
            )
        if s.name == "E":
            (a, b), (c,), pair = g
            if rcls == "c":
                return ((one, self.state("A", (a, b, c))),)
            if rcls == "d":
                return ((one, self.state("A", (a, b, r))),)
            return ((one, self.state("A", (r, a, b))),)
        (a,), mid, back = g
        if rcls == "b":
            other = tuple(p for p in mid if p != r)
            return ((one, self.state("E", (a, r), other, back)),)
        if rcls == "d":
            return ((one, self.state("C", (a, r), mid)),)
        sixth = Fraction(1, 6)
        trio = (a,) + mid
        subs = [
            (sixth, self.state("C", (r, p), tuple(q for q in trio if q != p)))
            for p in trio
        ] + [(sixth, self.state("C", (r, p), back)) for p in trio]
        return tuple(subs)

    def actions(self):
        a = self.state("A", "abc")
        b = self.state("B", "a", "bcd")
        c = self.state("C", "ab", "cd")
        d = self.state("D", "a", "bcde")
        e = self.state("E", "ab", "c", "de")
        f = self.state("F", "a", "bc", "de")
        return (
            ActionSpec("Aa", a, "a", "trivial"),
            ActionSpec("Ad", a, "d", "new"),
            ActionSpec("Ba", b, "a", "trivial"),
            ActionSpec("Bb", b, "b", "b"),
            ActionSpec("Be", b, "e", "new"),
            ActionSpec("Ca", c, "a", "trivial"),
            ActionSpec("Cc", c, "c", "c"),
            ActionSpec("Ce", c, "e", "new"),
            ActionSpec("Da", d, "a", "trivial"),
            ActionSpec("Db", d, "b", "b"),
            ActionSpec("Df", d, "f", "new"),
            ActionSpec("Ea", e, "a", "trivial"),
            ActionSpec("Ec", e, "c", "c"),
            ActionSpec("Ed", e, "d", "d"),
            ActionSpec("Ef", e, "f", "new"),
            ActionSpec("Fa", f, "a", "trivial"),
            ActionSpec("Fb", f, "b", "b"),
            ActionSpec("Fd", f, "d", "d"),
            ActionSpec("Ff", f, "f", "new"),
        )


def k2_rules() -> K2Rules:
    return K2Rules()


def k3_rules() -> K3Rules:
    return K3Rules()


def rules_for(algo: str) -> RuleTable:
    if algo == "k2":
        return k2_rules()
    if algo == "k3":
        return k3_rules()
    raise ValueError(f"unknown algorithm {algo!r}")


def reference_potentials(algo: str) -> dict[str, Fraction]:
    """The classic hand-derived tables.

    The k3 table's D value (1/2) fails certification on action Db; the
    rule tables ship the corrected value instead.  Kept verbatim so the
    discrepancy stays reproducible.
    """
    if algo == "k2":
        return {"A": Fraction(0), "B": Fraction(1, 2)}
    if algo == "k3":
        return {
            "A": Fraction(0),
            "B": Fraction(5, 6),
            "C": Fraction(1, 2),
            "D": Fraction(1, 2),
            "E": Fraction(1),
            "F": Fraction(5, 4),
        }
    raise ValueError(f"unknown algorithm {algo!r}")
