"""Exact minimum-cost transportation between configuration distributions.

The solver runs successive shortest augmenting paths on the bipartite
source/sink graph with Bellman-Ford searches, entirely in rational
arithmetic.  Edge costs carry an extra lexicographic component so that,
among all minimum-cost plans, the returned one greedily prefers flow on
lexicographically earlier (source, sink) configuration pairs; any
minimal plan would be equally valid, the preference just makes the
result canonical.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Mapping

from .cache import Config, Page, distance, service_cost


class ConfigDistribution:
    """A finite probability distribution over configurations, exact weights."""

    __slots__ = ("weights",)

    def __init__(self, weights: Mapping[Config, Fraction | int]):
        ws = {x: Fraction(w) for x, w in weights.items() if w != 0}
        if any(w < 0 for w in ws.values()):
            raise ValueError("distribution weights must be non-negative")
        if sum(ws.values()) != 1:
            raise ValueError(f"distribution weights must sum to 1, got {sum(ws.values())}")
        self.weights = dict(sorted(ws.items()))

    @classmethod
    def point(cls, x: Config) -> "ConfigDistribution":
        return cls({x: Fraction(1)})

    @classmethod
    def mix(cls, parts: Iterable[tuple[Fraction, "ConfigDistribution"]]) -> "ConfigDistribution":
        """The weighted mixture of distributions; weights must sum to 1."""
        acc: dict[Config, Fraction] = {}
        for w, dist in parts:
            for x, p in dist.weights.items():
                acc[x] = acc.get(x, Fraction(0)) + Fraction(w) * p
        return cls(acc)

    @property
    def support(self) -> tuple[Config, ...]:
        return tuple(self.weights)

    def __getitem__(self, x: Config) -> Fraction:
        return self.weights.get(x, Fraction(0))

    def items(self):
        return self.weights.items()

    def __eq__(self, other) -> bool:
        return isinstance(other, ConfigDistribution) and self.weights == other.weights

    def __hash__(self) -> int:
        return hash(tuple(self.weights.items()))

    def __repr__(self) -> str:
        body = " + ".join(f"{w}*{x!r}" for x, w in self.weights.items())
        return f"ConfigDistribution({body})"


@dataclass(frozen=True)
class TransportInstance:
    """Sources and sinks with equal total mass, and a cost on the edges."""

    sources: tuple[tuple[Config, Fraction], ...]
    sinks: tuple[tuple[Config, Fraction], ...]
    cost: Callable[[Config, Config], Fraction | int]

    @classmethod
    def between(
        cls,
        alpha: ConfigDistribution,
        beta: ConfigDistribution,
        cost: Callable[[Config, Config], Fraction | int],
    ) -> "TransportInstance":
        return cls(tuple(alpha.items()), tuple(beta.items()), cost)

    def __post_init__(self):
        if not self.sources or not self.sinks:
            raise ValueError("transport instance needs non-empty sources and sinks")
        if any(w <= 0 for _, w in self.sources) or any(w <= 0 for _, w in self.sinks):
            raise ValueError("marginal weights must be strictly positive")
        if sum(w for _, w in self.sources) != sum(w for _, w in self.sinks):
            raise ValueError("source and sink marginals must have equal total mass")


class TransportPlan:
    """A feasible flow between the marginals of an instance."""

    __slots__ = ("flow",)

    def __init__(self, flow: Mapping[tuple[Config, Config], Fraction]):
        self.flow = {e: Fraction(f) for e, f in sorted(flow.items()) if f != 0}
        if any(f < 0 for f in self.flow.values()):
            raise ValueError("flows must be non-negative")

    def total_cost(self, cost: Callable[[Config, Config], Fraction | int]) -> Fraction:
        return sum((f * Fraction(cost(a, b)) for (a, b), f in self.flow.items()), Fraction(0))

    def row(self, a: Config) -> dict[Config, Fraction]:
        return {b: f for (src, b), f in self.flow.items() if src == a}

    def check_marginals(self, inst: TransportInstance) -> bool:
        rows: dict[Config, Fraction] = {}
        cols: dict[Config, Fraction] = {}
        for (a, b), f in self.flow.items():
            rows[a] = rows.get(a, Fraction(0)) + f
            cols[b] = cols.get(b, Fraction(0)) + f
        return rows == {a: w for a, w in inst.sources} and cols == {
            b: w for b, w in inst.sinks
        }

    def __repr__(self) -> str:
        body = ", ".join(f"{a!r}->{b!r}: {f}" for (a, b), f in self.flow.items())
        return f"TransportPlan({body})"


def solve_min_cost(inst: TransportInstance) -> tuple[TransportPlan, Fraction]:
    """Return a canonical minimum-cost plan and its exact cost.

    Instances here have at most a dozen nodes per side, so each
    augmentation runs a full Bellman-Ford pass; the lexicographic cost
    component never changes the true cost, only which optimum is picked.
    """
    sources = list(inst.sources)
    sinks = list(inst.sinks)
    n, m = len(sources), len(sinks)
    zero = (Fraction(0),) + (0,) * (n * m)

    def edge_cost(i: int, j: int) -> tuple:
        vec = [0] * (n * m)
        vec[i * m + j] = -1
        return (Fraction(inst.cost(sources[i][0], sinks[j][0])),) + tuple(vec)

    cost = [[edge_cost(i, j) for j in range(m)] for i in range(n)]
    if any(c[0] < 0 for row in cost for c in row):
        raise ValueError("edge costs must be non-negative")

    def tadd(u: tuple, v: tuple) -> tuple:
        return tuple(a + b for a, b in zip(u, v))

    def tsub(u: tuple, v: tuple) -> tuple:
        return tuple(a - b for a, b in zip(u, v))

    supply = [w for _, w in sources]
    demand = [w for _, w in sinks]
    flow = [[Fraction(0)] * m for _ in range(n)]

    while True:
        remaining = sum(supply)
        if remaining == 0:
            break
        dist_s: list[tuple | None] = [zero if supply[i] > 0 else None for i in range(n)]
        dist_t: list[tuple | None] = [None] * m
        pred_t: list[int | None] = [None] * m
        pred_s: list[int | None] = [None] * n  # sink index of the back edge, if any
        for _ in range(n + m):
            changed = False
            for i in range(n):
                di = dist_s[i]
                if di is None:
                    continue
                for j in range(m):
                    nd = tadd(di, cost[i][j])
                    if dist_t[j] is None or nd < dist_t[j]:
                        dist_t[j] = nd
                        pred_t[j] = i
                        changed = True
            for j in range(m):
                dj = dist_t[j]
                if dj is None:
                    continue
                for i in range(n):
                    if flow[i][j] > 0:
                        nd = tsub(dj, cost[i][j])
                        if dist_s[i] is None or nd < dist_s[i]:
                            dist_s[i] = nd
                            pred_s[i] = j
                            changed = True
            if not changed:
                break
        end = min(
            (j for j in range(m) if demand[j] > 0 and dist_t[j] is not None),
            key=lambda j: (dist_t[j], j),
        )

        # walk back to a source with remaining supply, collecting the path
        path: list[tuple[int, int, bool]] = []  # (i, j, forward)
        j = end
        while True:
            i = pred_t[j]
            path.append((i, j, True))
            if pred_s[i] is None:
                break
            j = pred_s[i]
            path.append((i, j, False))
        start = path[-1][0]

        bottleneck = min(supply[start], demand[end])
        for i, j, forward in path:
            if not forward:
                bottleneck = min(bottleneck, flow[i][j])
        assert bottleneck > 0
        for i, j, forward in path:
            flow[i][j] += bottleneck if forward else -bottleneck
        supply[start] -= bottleneck
        demand[end] -= bottleneck

    plan = TransportPlan(
        {
            (sources[i][0], sinks[j][0]): flow[i][j]
            for i in range(n)
            for j in range(m)
            if flow[i][j] != 0
        }
    )
    total = sum(
        (flow[i][j] * cost[i][j][0] for i in range(n) for j in range(m)),
        Fraction(0),
    )
    assert plan.check_marginals(inst)
    return plan, total


def distribution_distance(pi: ConfigDistribution, sigma: ConfigDistribution) -> Fraction:
    """Minimum transportation cost between two distributions under `distance`."""
    _, cost = solve_min_cost(TransportInstance.between(pi, sigma, distance))
    return cost


def step_cost(pi: ConfigDistribution, r: Page, sigma: ConfigDistribution) -> Fraction:
    """Minimum transportation cost under the request-r service cost."""
    inst = TransportInstance.between(pi, sigma, lambda x, y: service_cost(x, r, y))
    _, cost = solve_min_cost(inst)
    return cost


def step_plan(
    pi: ConfigDistribution, r: Page, sigma: ConfigDistribution
) -> tuple[TransportPlan, Fraction]:
    """Canonical minimum plan and cost under the request-r service cost."""
    inst = TransportInstance.between(pi, sigma, lambda x, y: service_cost(x, r, y))
    return solve_min_cost(inst)
