"""Query and result types for the h-hop traversal engines."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field


class QueryKind(enum.Enum):
    AGGREGATION = "aggregation"
    RANDOM_WALK = "random_walk"
    REACHABILITY = "reachability"


DEFAULT_RESTART_PROB = 0.15


@dataclass(frozen=True)
class Query:
    """A typed h-hop request.

    The seed makes random walks reproducible no matter where they execute;
    target is present only for reachability queries.
    """

    kind: QueryKind
    source: int
    h: int
    target: int | None = None
    label_filter: str | None = None
    restart_prob: float = DEFAULT_RESTART_PROB
    seed: int = 0
    query_id: int = 0

    def __post_init__(self) -> None:
        if self.h < 1:
            raise ValueError("h must be >= 1")
        if (self.target is not None) != (self.kind is QueryKind.REACHABILITY):
            raise ValueError("target must be set exactly for reachability queries")
        if self.kind is QueryKind.RANDOM_WALK and not (0.0 < self.restart_prob < 1.0 or self.restart_prob == 1.0):
            # restart_prob = 1.0 is allowed as the degenerate always-restart walk.
            raise ValueError("restart_prob must be in (0, 1]")


@dataclass(frozen=True)
class AggregationResult:
    count: int


@dataclass(frozen=True)
class RandomWalkResult:
    terminal: int
    # Multiset of positions occupied after each step, as sorted (node, count).
    visits: tuple[tuple[int, int], ...]


@dataclass(frozen=True)
class ReachabilityResult:
    reachable: bool


QueryPayload = AggregationResult | RandomWalkResult | ReachabilityResult


@dataclass
class QueryResult:
    """Engine output plus per-query cache accounting."""

    kind: QueryKind
    payload: QueryPayload
    cache_hits: int
    cache_misses: int
    elapsed_us: float = 0.0

    @property
    def fetches(self) -> int:
        return self.cache_hits + self.cache_misses


def visits_multiset(sequence: list[int]) -> tuple[tuple[int, int], ...]:
    counts: dict[int, int] = {}
    for node in sequence:
        counts[node] = counts.get(node, 0) + 1
    return tuple(sorted(counts.items()))
