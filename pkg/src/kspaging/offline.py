"""Optimal offline service cost for the k-cache problem.

Two independent routes: a dense work-function table folded one request
at a time over all k-subsets of the active pages, and the classic
farthest-in-future eviction rule.  Costs are integral, so tables hold
plain integers.
"""

from __future__ import annotations

from bisect import bisect_right
from dataclasses import dataclass
from itertools import combinations
from typing import Sequence

import numpy as np

from .cache import Config, Page, distance, service_cost

_COST_MATRICES: dict[tuple, np.ndarray] = {}


def _cost_matrix(universe: tuple[Page, ...], k: int, r: Page) -> np.ndarray:
    key = (universe, k, r)
    m = _COST_MATRICES.get(key)
    if m is None:
        configs = [Config(c) for c in combinations(universe, k)]
        m = np.array(
            [[service_cost(x, r, y) for y in configs] for x in configs],
            dtype=np.int64,
        )
        _COST_MATRICES[key] = m
    return m


@dataclass(frozen=True)
class WorkFunctionTable:
    """Final minimal costs of serving a sequence and ending in each configuration."""

    k: int
    universe: tuple[Page, ...]
    values: dict[Config, int]

    def value(self, x: Config) -> int:
        if x not in self.values:
            raise KeyError(f"{x!r} uses pages outside the tracked universe {self.universe}")
        return self.values[x]

    def minimum(self) -> int:
        return min(self.values.values())


def work_function(
    requests: Sequence[Page], initial: Config, extra_pages: Sequence[Page] = ()
) -> WorkFunctionTable:
    """Fold the request sequence into the table w(y) = min over z of w(z) + cost(z, r, y).

    Starts from w(x) = d(initial, x) over all k-subsets of the pages
    seen (initial, requested, and any extra target pages).
    """
    k = len(initial)
    universe = tuple(sorted(set(initial.pages) | set(requests) | set(extra_pages)))
    configs = [Config(c) for c in combinations(universe, k)]
    w = np.array([distance(initial, x) for x in configs], dtype=np.int64)
    for r in requests:
        m = _cost_matrix(universe, k, r)
        w = (w[:, None] + m).min(axis=0)
    return WorkFunctionTable(k, universe, {x: int(v) for x, v in zip(configs, w)})


def opt_cost(requests: Sequence[Page], initial: Config) -> tuple[int, WorkFunctionTable]:
    """Optimal offline cost of serving the sequence from the initial cache."""
    table = work_function(requests, initial)
    return table.minimum(), table


def opt_cost_to(requests: Sequence[Page], initial: Config, x: Config) -> int:
    """Optimal offline cost of serving the sequence and ending in configuration x."""
    table = work_function(requests, initial, extra_pages=x.pages)
    return table.value(x)


def opt_cost_classical(requests: Sequence[Page], initial: Config) -> int:
    """Fault count of farthest-in-future eviction; optimal for this cost model."""
    positions: dict[Page, list[int]] = {}
    for i, r in enumerate(requests):
        positions.setdefault(r, []).append(i)
    horizon = len(requests) + 1

    def next_use(p: Page, t: int) -> int:
        pos = positions.get(p, ())
        i = bisect_right(pos, t)
        return pos[i] if i < len(pos) else horizon

    cache = set(initial.pages)
    faults = 0
    for t, r in enumerate(requests):
        if r in cache:
            continue
        faults += 1
        victim = max(cache, key=lambda p: (next_use(p, t), p))
        cache.remove(victim)
        cache.add(r)
    return faults
