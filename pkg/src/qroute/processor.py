"""Query processor: cached adjacency access plus the three h-hop engines.

A processor owns a private LRU cache and talks to the storage tier for
misses. Each query fetches every distinct node it touches exactly once
(entries already pulled for the current query are reused from a per-query
memo), so hits + misses equals the number of distinct nodes fetched.

Engines are deterministic given (graph, query): results never depend on
cache state, routing, or which processor runs them. Only the hit/miss
split varies.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Callable, Protocol

from .cache import LruCache
from .graph import AdjacencyEntry
from .queries import (
    AggregationResult,
    Query,
    QueryKind,
    QueryResult,
    RandomWalkResult,
    ReachabilityResult,
    visits_multiset,
)
from .rng import rand_index, rand_uniform


@dataclass(frozen=True)
class CostModel:
    """Simulated time charged per query, in microseconds.

    storage_latency_us models one storage-tier get (RAM-store scale);
    hit_cost_us models cache lookup + maintenance; per_node_compute_us is
    a deterministic stand-in for traversal compute so that simulated
    clocks are reproducible across hosts.
    """

    storage_latency_us: float = 10.0
    hit_cost_us: float = 0.5
    per_node_compute_us: float = 1.0
    query_overhead_us: float = 5.0

    def duration_us(self, hits: int, misses: int) -> float:
        return (
            self.query_overhead_us
            + misses * self.storage_latency_us
            + hits * self.hit_cost_us
            + (hits + misses) * self.per_node_compute_us
        )


class StorageLike(Protocol):
    def get(self, node: int) -> AdjacencyEntry: ...


class Processor:
    """One worker in the processing tier."""

    def __init__(self, index: int, storage: StorageLike, cache_bytes: int, cost_model: CostModel | None = None):
        self.index = index
        self.storage = storage
        self.cache = LruCache(cache_bytes)
        self.cost_model = cost_model or CostModel()
        self.total_hits = 0
        self.total_misses = 0
        self.completed = 0

    def execute(self, query: Query) -> QueryResult:
        memo: dict[int, AdjacencyEntry] = {}
        hits = misses = 0

        def fetch(node: int) -> AdjacencyEntry:
            nonlocal hits, misses
            cached = memo.get(node)
            if cached is not None:
                return cached
            entry = self.cache.get(node)
            if entry is not None:
                hits += 1
            else:
                entry = self.storage.get(node)
                self.cache.put(node, entry)
                misses += 1
            memo[node] = entry
            return entry

        if query.kind is QueryKind.AGGREGATION:
            payload = run_aggregation(fetch, query)
        elif query.kind is QueryKind.RANDOM_WALK:
            payload = run_random_walk(fetch, query)
        elif query.kind is QueryKind.REACHABILITY:
            payload = run_reachability(fetch, query)
        else:
            raise ValueError(f"unknown query kind {query.kind}")

        self.total_hits += hits
        self.total_misses += misses
        self.completed += 1
        elapsed = self.cost_model.duration_us(hits, misses)
        return QueryResult(kind=query.kind, payload=payload, cache_hits=hits, cache_misses=misses, elapsed_us=elapsed)


FetchFn = Callable[[int], AdjacencyEntry]


def run_aggregation(fetch: FetchFn, query: Query) -> AggregationResult:
    """BFS over out-edges to depth h; count distinct nodes at hops 1..h.

    Every discovered node (source included, frontier at depth h included)
    is fetched exactly once, mirroring the neighborhood-retrieval cost the
    cache metrics are defined over.
    """
    source = query.source
    dist: dict[int, int] = {source: 0}
    frontier = deque([source])
    fetch(source)
    matched = 0
    while frontier:
        node = frontier.popleft()
        d = dist[node]
        if d == query.h:
            continue
        entry = fetch(node)
        for nxt in entry.out_neighbors:
            if nxt not in dist:
                dist[nxt] = d + 1
                nxt_entry = fetch(nxt)
                if query.label_filter is None or nxt_entry.label == query.label_filter:
                    matched += 1
                frontier.append(nxt)
    return AggregationResult(count=matched)


def run_random_walk(fetch: FetchFn, query: Query) -> RandomWalkResult:
    """h-step walk with restart; seeded counter-based randomness.

    At each step: restart to the source with probability restart_prob,
    otherwise move to a uniformly chosen out-neighbor. A dead end forces a
    restart. Two draws per step keep the stream independent of branching.
    """
    current = query.source
    fetch(current)
    visited: list[int] = []
    for step in range(query.h):
        u = rand_uniform(query.seed, 2 * step)
        entry = fetch(current)
        if u < query.restart_prob or not entry.out_neighbors:
            current = query.source
        else:
            out = list(entry.out_neighbors)
            current = out[rand_index(query.seed, 2 * step + 1, len(out))]
        fetch(current)
        visited.append(current)
    return RandomWalkResult(terminal=current, visits=visits_multiset(visited))


def run_reachability(fetch: FetchFn, query: Query) -> ReachabilityResult:
    """Bidirectional BFS: forward over out-edges, backward over in-edges.

    The smaller frontier expands first (ties go forward); the combined
    depth never exceeds h. True iff the visited sets intersect.
    """
    source, target = query.source, query.target
    assert target is not None
    fetch(source)
    fetch(target)
    if source == target:
        return ReachabilityResult(True)

    fwd_visited = {source}
    bwd_visited = {target}
    fwd_frontier = [source]
    bwd_frontier = [target]
    depth_used = 0
    while fwd_frontier and bwd_frontier and depth_used < query.h:
        if len(fwd_frontier) <= len(bwd_frontier):
            next_frontier = []
            for node in fwd_frontier:
                for nxt in fetch(node).out_neighbors:
                    if nxt in bwd_visited:
                        return ReachabilityResult(True)
                    if nxt not in fwd_visited:
                        fwd_visited.add(nxt)
                        next_frontier.append(nxt)
            fwd_frontier = next_frontier
        else:
            next_frontier = []
            for node in bwd_frontier:
                for nxt in fetch(node).in_neighbors:
                    if nxt in fwd_visited:
                        return ReachabilityResult(True)
                    if nxt not in bwd_visited:
                        bwd_visited.add(nxt)
                        next_frontier.append(nxt)
            bwd_frontier = next_frontier
        depth_used += 1
    return ReachabilityResult(False)
