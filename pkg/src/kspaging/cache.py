"""Pages, cache configurations, and the page-fault cost model.

A configuration is a set of k distinct pages (the cache content).
Moving from configuration x to configuration y costs the number of
pages ejected, |x - y|.  Serving a request r while moving from x to y
costs d(x, y) when r is in x or y, d(x, y) + 1 when r must be fetched
and dropped again, and 2 in the degenerate stay-put miss case.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator

Page = str


class Config:
    """An immutable set of distinct pages, stored sorted for canonical hashing."""

    __slots__ = ("pages",)

    def __init__(self, pages: Iterable[Page]):
        ps = tuple(sorted(pages))
        if not ps:
            raise ValueError("configuration must contain at least one page")
        if len(set(ps)) != len(ps):
            raise ValueError(f"duplicate page in configuration: {ps}")
        self.pages = ps

    def __eq__(self, other) -> bool:
        return isinstance(other, Config) and self.pages == other.pages

    def __hash__(self) -> int:
        return hash(self.pages)

    def __lt__(self, other: "Config") -> bool:
        return self.pages < other.pages

    def __contains__(self, page: Page) -> bool:
        return page in self.pages

    def __iter__(self) -> Iterator[Page]:
        return iter(self.pages)

    def __len__(self) -> int:
        return len(self.pages)

    def __repr__(self) -> str:
        return "{" + ",".join(self.pages) + "}"

    def replace(self, drop: Page, add: Page) -> "Config":
        """Return the configuration with `drop` ejected and `add` fetched."""
        if drop not in self.pages:
            raise ValueError(f"page {drop!r} not in configuration {self!r}")
        return Config([p for p in self.pages if p != drop] + [add])


def distance(x: Config, y: Config) -> int:
    """Cost of changing the cache from x to y: the number of ejected pages."""
    if len(x) != len(y):
        raise ValueError(f"configurations of different size: {x!r} vs {y!r}")
    return len(set(x.pages) - set(y.pages))


def service_cost(x: Config, r: Page, y: Config) -> int:
    """Cost of serving request r while moving from configuration x to y."""
    if r in x or r in y:
        return distance(x, y)
    if x == y:
        return 2
    return distance(x, y) + 1


def service_support(x: Config, r: Page) -> tuple[Config, ...]:
    """Cheapest-landing configurations when x serves r.

    {x} when r is cached, otherwise the k single-ejection results x - a + r.
    """
    if r in x:
        return (x,)
    return tuple(sorted(x.replace(a, r) for a in x))


@dataclass(frozen=True)
class CacheProblem:
    """A k-cache instance: cache size and initial cache content."""

    k: int
    initial: Config

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("cache size must be positive")
        if len(self.initial) != self.k:
            raise ValueError(
                f"initial configuration {self.initial!r} does not have {self.k} pages"
            )
