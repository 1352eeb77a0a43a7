"""Finitely supported estimators and the bar-string notation.

An estimator is a non-negative Lipschitz function on configurations,
represented by its values on a minimal support set: the value anywhere
else is the minimum over support points x of value(x) + d(x, y).
Estimators track a lower-bound proxy for the adversary's cost; folding
a request into one (the update operator) takes a pointwise minimum of
value plus service cost, and stays finitely supported.

Bar strings are the compact ASCII encoding of zero-valued supports for
the k-cache problem: a string of page tokens and exactly k bars, where
a configuration belongs to the support iff at least i of its pages are
written left of the i-th bar, for every i.
"""

from __future__ import annotations

from fractions import Fraction
from itertools import combinations, product
from typing import Iterable, Mapping, Protocol, Sequence

from .cache import Config, Page, distance, service_cost, service_support


class LipschitzFunction(Protocol):
    """Anything evaluable on configurations and 1-Lipschitz for `distance`."""

    def evaluate(self, y: Config) -> Fraction: ...


class Estimator:
    """A non-negative Lipschitz function stored by its minimal support.

    Construct via `minimize_support` (alias `Estimator.from_values`) so
    redundant entries are pruned; the constructor itself asserts the
    minimality and Lipschitz invariants rather than repairing them.
    """

    __slots__ = ("entries",)

    def __init__(self, entries: Mapping[Config, Fraction]):
        if not entries:
            raise ValueError("estimator must have non-empty support")
        items = sorted(entries.items())
        for x, v in items:
            if v < 0:
                raise ValueError(f"negative estimator value {v} at {x!r}")
        for (x, vx), (y, vy) in combinations(items, 2):
            # minimality implies strict two-sided Lipschitz bounds
            d = distance(x, y)
            assert vy < vx + d and vx < vy + d, (
                f"support not minimal: {x!r}:{vx} vs {y!r}:{vy} at distance {d}"
            )
        self.entries = dict(items)

    @classmethod
    def from_values(cls, raw: Mapping[Config, Fraction | int]) -> "Estimator":
        return minimize_support(raw)

    @classmethod
    def point(cls, x: Config) -> "Estimator":
        """The estimator y -> d(x, y), supported at x with value 0."""
        return cls({x: Fraction(0)})

    @property
    def support(self) -> tuple[Config, ...]:
        return tuple(self.entries)

    @property
    def min_value(self) -> Fraction:
        return min(self.entries.values())

    def evaluate(self, y: Config) -> Fraction:
        return min(v + distance(x, y) for x, v in self.entries.items())

    def update(self, r: Page) -> "Estimator":
        """Fold request r in: new(y) = min over support x of value(x) + cost(x, r, y).

        Candidates are, per support point, its service support plus the
        point itself (the stay-put miss at +2); pruning restores minimality.
        """
        candidates: dict[Config, Fraction] = {}

        def offer(z: Config, w: Fraction):
            if z not in candidates or w < candidates[z]:
                candidates[z] = w

        for x, v in self.entries.items():
            for z in service_support(x, r):
                offer(z, v + service_cost(x, r, z))
            offer(x, v + service_cost(x, r, x))
        return minimize_support(candidates)

    def normalize(self) -> tuple["Estimator", Fraction]:
        """Split off the minimum: returns (self - m, m) with m = min support value."""
        m = self.min_value
        return self.shift(-m), m

    def shift(self, c: Fraction | int) -> "Estimator":
        shifted = {x: v + c for x, v in self.entries.items()}
        if any(v < 0 for v in shifted.values()):
            raise ValueError("shift would make the estimator negative")
        return Estimator(shifted)

    def __add__(self, c):
        if isinstance(c, (int, Fraction)):
            return self.shift(c)
        return NotImplemented

    def dominates(self, rho: LipschitzFunction) -> bool:
        """True iff self >= rho everywhere; checked on self's support only.

        Sound because any shortfall elsewhere would propagate back to a
        support point through rho's Lipschitz bound.
        """
        return all(v >= rho.evaluate(x) for x, v in self.entries.items())

    def to_bar(self) -> str | None:
        return format_bar(self)

    def __eq__(self, other) -> bool:
        return isinstance(other, Estimator) and self.entries == other.entries

    def __hash__(self) -> int:
        return hash(tuple(sorted(self.entries.items())))

    def __repr__(self) -> str:
        body = ", ".join(f"{x!r}: {v}" for x, v in sorted(self.entries.items()))
        return f"Estimator({{{body}}})"


def minimize_support(raw: Mapping[Config, Fraction | int]) -> Estimator:
    """Prune every entry implied by another one and build the estimator.

    An entry y is redundant when some other entry x satisfies
    raw(y) >= raw(x) + d(x, y); pruning never changes the evaluated
    function and is order-independent by the triangle inequality.
    """
    if not raw:
        raise ValueError("cannot build an estimator from an empty map")
    items = {x: Fraction(v) for x, v in raw.items()}
    kept: dict[Config, Fraction] = {}
    for y, vy in items.items():
        if vy < 0:
            raise ValueError(f"negative estimator value {vy} at {y!r}")
        if all(vy < vx + distance(x, y) for x, vx in items.items() if x != y):
            kept[y] = vy
    return Estimator(kept)


class WeightedSum:
    """A convex combination of estimators plus a constant; Lipschitz by construction."""

    __slots__ = ("terms", "offset")

    def __init__(self, terms: Sequence[tuple[Fraction, Estimator]], offset: Fraction = Fraction(0)):
        self.terms = tuple((Fraction(w), e) for w, e in terms)
        self.offset = Fraction(offset)

    def evaluate(self, y: Config) -> Fraction:
        return sum((w * e.evaluate(y) for w, e in self.terms), self.offset)

    def __add__(self, c):
        if isinstance(c, (int, Fraction)):
            return WeightedSum(self.terms, self.offset + c)
        return NotImplemented


def weighted_sum(
    terms: Iterable[tuple[Fraction | int, Estimator]],
    offset: Fraction | int = 0,
) -> WeightedSum:
    """Combine estimators with non-negative weights summing to one."""
    ts = [(Fraction(w), e) for w, e in terms]
    if any(w < 0 for w, _ in ts):
        raise ValueError("weights must be non-negative")
    if sum(w for w, _ in ts) != 1:
        raise ValueError("weights must sum to exactly 1")
    return WeightedSum(ts, Fraction(offset))


def parse_bar(text: str, k: int) -> Estimator:
    """Parse a bar string into the zero-valued estimator it denotes.

    Tokens are whitespace-separated; a string containing no whitespace
    at all is read in the compact one-letter-per-page form ("a|bc|").
    Tokens after the k-th bar are accepted but can never enter the
    support.
    """
    if k < 1:
        raise ValueError("k must be positive")
    if text.count("|") != k:
        raise ValueError(f"expected exactly {k} bars, got {text.count('|')}: {text!r}")
    compact = not any(ch.isspace() for ch in text)
    chunks = text.split("|")
    blocks = [list(chunk) if compact else chunk.split() for chunk in chunks]

    seen: set[Page] = set()
    for block in blocks:
        for token in block:
            if token in seen:
                raise ValueError(f"page {token!r} appears twice in {text!r}")
            seen.add(token)

    prefixes: list[set[Page]] = []
    acc: set[Page] = set()
    for i in range(k):
        acc |= set(blocks[i])
        if len(acc) < i + 1:
            raise ValueError(
                f"fewer than {i + 1} page names left of bar {i + 1} in {text!r}"
            )
        prefixes.append(set(acc))

    pool = sorted(prefixes[-1])
    support = [
        Config(xs)
        for xs in combinations(pool, k)
        if all(len(set(xs) & prefixes[i]) >= i + 1 for i in range(k - 1))
    ]
    assert support, "a well-formed bar string always has non-empty support"
    return Estimator({x: Fraction(0) for x in support})


def format_bar(omega: Estimator) -> str | None:
    """Reconstruct a bar string for a zero-minimum estimator, or None.

    Searches block assignments of the support's page universe and keeps
    the one reproducing the support exactly, preferring maximal early
    blocks; returns None when no bar string matches (the estimator is
    then not an offset function).
    """
    if omega.min_value != 0 or any(v != 0 for v in omega.entries.values()):
        return None
    support = set(omega.support)
    k = len(next(iter(support)))
    universe = sorted({p for x in support for p in x})
    if len(universe) > 12:
        raise ValueError("bar reconstruction is only supported for small page universes")

    best: tuple[tuple[int, ...], tuple[str, ...]] | None = None
    for assign in product(range(k), repeat=len(universe)):
        blocks: list[list[Page]] = [[] for _ in range(k)]
        for page, b in zip(universe, assign):
            blocks[b].append(page)
        sizes = []
        total = 0
        for i in range(k):
            total += len(blocks[i])
            sizes.append(total)
        if any(sizes[i] < i + 1 for i in range(k)):
            continue
        prefixes = []
        acc: set[Page] = set()
        for i in range(k):
            acc |= set(blocks[i])
            prefixes.append(set(acc))
        candidate = {
            Config(xs)
            for xs in combinations(universe, k)
            if all(len(set(xs) & prefixes[i]) >= i + 1 for i in range(k - 1))
        }
        if candidate != support:
            continue
        block_strs = tuple(" ".join(sorted(b)) for b in blocks)
        # prefer lexicographically largest prefix sizes, then smallest text
        better = best is None or tuple(sizes) > best[0] or (
            tuple(sizes) == best[0] and block_strs < best[1]
        )
        if better:
            best = (tuple(sizes), block_strs)
    if best is None:
        return None
    out: list[str] = []
    for s in best[1]:
        if s:
            out.append(s)
        out.append("|")
    return " ".join(out)
