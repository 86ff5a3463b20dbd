"""Query router: strategy decisions, per-processor queues, and the
acknowledgment-driven dispatch loop.

The loop is a deterministic discrete-event simulation over a virtual
microsecond clock. Each dispatched query's duration comes from the
processor's cost model, completions are processed in virtual-time order
(ties broken by dispatch sequence), and a new query is sent to a
processor only after its previous acknowledgment. Because the schedule
depends only on the reported durations, the same seeded run produces the
same dispatch schedule over any transport.

Work stealing happens at the router: a processor that acknowledges with
an empty queue takes the oldest query from the longest queue, so no
processor idles while any queue holds work.
"""

from __future__ import annotations

import enum
import heapq
import logging
from collections import deque
from dataclasses import dataclass, field
from typing import Protocol

import numpy as np

from .errors import ConfigurationError, NotFoundError, TransportError
from .queries import Query, QueryResult
from .rng import derive_seed

logger = logging.getLogger(__name__)

DEFAULT_LOAD_FACTOR = 20.0
DEFAULT_ALPHA = 0.5


class Strategy(enum.Enum):
    NEXT_READY = "next-ready"
    HASH = "hash"
    LANDMARK = "landmark"
    EMBED = "embed"
    NO_CACHE = "no-cache"


@dataclass
class RouterConfig:
    num_processors: int
    strategy: Strategy
    load_factor: float = DEFAULT_LOAD_FACTOR
    alpha: float = DEFAULT_ALPHA
    steal_enabled: bool = True
    seed: int = 0

    def __post_init__(self) -> None:
        if self.num_processors < 1:
            raise ConfigurationError("need at least one processor")
        if self.load_factor <= 0:
            raise ConfigurationError("load_factor must be positive")
        if not 0.0 < self.alpha < 1.0:
            raise ConfigurationError("alpha must lie in (0, 1)")


class EmbedRouterState:
    """Per-processor EMA of dispatched query coordinates.

    Means start uniformly at random inside the landmark bounding box and
    move by mean <- alpha * mean + (1 - alpha) * coords(query node).
    """

    def __init__(self, num_processors: int, lo: np.ndarray, hi: np.ndarray, alpha: float, seed: int):
        rng = np.random.default_rng(derive_seed(seed, 0xEA))
        self.mean_coords = rng.uniform(lo, hi, size=(num_processors, lo.size))
        self.alpha = alpha

    def update(self, processor: int, coords: np.ndarray) -> None:
        self.mean_coords[processor] = self.alpha * self.mean_coords[processor] + (1.0 - self.alpha) * coords

    def distances(self, coords: np.ndarray) -> np.ndarray:
        diff = self.mean_coords - coords
        return np.sqrt((diff * diff).sum(axis=1))


def route_hash(source: int, num_processors: int) -> int:
    """Fixed modulo hash of the query node id."""
    return source % num_processors


def route_landmark(
    processor_hops: np.ndarray, queue_lengths: list[int] | np.ndarray, load_factor: float
) -> int:
    """Argmin over processors of hops + queue_length / load_factor."""
    scores = processor_hops.astype(np.float64) + np.asarray(queue_lengths, dtype=np.float64) / load_factor
    return int(np.argmin(scores))


def route_embed(
    coord_distances: np.ndarray, queue_lengths: list[int] | np.ndarray, load_factor: float
) -> int:
    """Argmin over processors of embedded distance + queue_length / load_factor."""
    scores = coord_distances + np.asarray(queue_lengths, dtype=np.float64) / load_factor
    return int(np.argmin(scores))


class ExecutorLike(Protocol):
    """One processor endpoint: executes a query, reports counts + duration."""

    def execute(self, query: Query) -> QueryResult: ...


@dataclass
class QueryRecord:
    query: Query
    processor: int
    submit_us: float
    dispatch_us: float
    complete_us: float
    result: QueryResult
    routed_processor: int  # strategy decision before any stealing
    fallback_used: bool = False

    @property
    def latency_us(self) -> float:
        return self.complete_us - self.submit_us


@dataclass
class DispatchStats:
    submitted: int = 0
    completed: int = 0
    stolen: int = 0
    fallback_routed: int = 0
    conservation_violations: int = 0
    per_processor_completed: list[int] = field(default_factory=list)


class DispatchLoop:
    """Event loop owning queues, strategy state, and the virtual clock."""

    def __init__(
        self,
        config: RouterConfig,
        executors: list[ExecutorLike],
        landmark_index=None,
        embedding=None,
    ):
        if len(executors) != config.num_processors:
            raise ConfigurationError("one executor per processor required")
        self.config = config
        self.executors = executors
        self.landmark_index = landmark_index
        self.embedding = embedding
        self.embed_state: EmbedRouterState | None = None
        if config.strategy is Strategy.EMBED:
            if embedding is None:
                raise ConfigurationError("embed routing requires an embedding table artifact")
            lo, hi = embedding.bounding_box()
            self.embed_state = EmbedRouterState(config.num_processors, lo, hi, config.alpha, config.seed)
        if config.strategy is Strategy.LANDMARK and landmark_index is None:
            raise ConfigurationError("landmark routing requires a landmark index artifact")

        P = config.num_processors
        self.queues: list[deque[Query]] = [deque() for _ in range(P)]
        self.global_queue: deque[Query] = deque()
        self.in_flight: list[bool] = [False] * P
        self.ready: deque[int] = deque(range(P))
        self.clock_us = 0.0
        self.stats = DispatchStats(per_processor_completed=[0] * P)
        self.records: list[QueryRecord] = []
        self._heap: list[tuple[float, int, int]] = []  # (complete_us, seq, processor)
        self._pending: dict[int, tuple[Query, QueryResult, float, int, bool]] = {}
        self._seq = 0
        self._submit_times: dict[int, float] = {}
        self._routed: dict[int, tuple[int, bool]] = {}

    # -- strategy decisions ------------------------------------------------

    def _queue_lengths(self) -> list[int]:
        return [len(q) for q in self.queues]

    def _decide(self, query: Query) -> tuple[int, bool]:
        """Pick a processor for a query; returns (index, used_hash_fallback)."""
        cfg = self.config
        if cfg.strategy is Strategy.HASH:
            return route_hash(query.source, cfg.num_processors), False
        if cfg.strategy is Strategy.LANDMARK:
            try:
                hops = self.landmark_index.processor_distances(query.source)
            except NotFoundError:
                return route_hash(query.source, cfg.num_processors), True
            return route_landmark(hops, self._queue_lengths(), cfg.load_factor), False
        if cfg.strategy is Strategy.EMBED:
            coords = self.embedding.get(query.source)
            if coords is None:
                return route_hash(query.source, cfg.num_processors), True
            assert self.embed_state is not None
            target = route_embed(self.embed_state.distances(coords), self._queue_lengths(), cfg.load_factor)
            # The EMA tracks what was routed toward each processor: update
            # at decision time so consecutive nearby queries see it.
            self.embed_state.update(target, coords)
            return target, False
        raise ConfigurationError(f"strategy {cfg.strategy} does not use per-processor queues")

    # -- event loop --------------------------------------------------------

    def run(self, queries: list[Query]) -> list[QueryRecord]:
        """Route and execute a burst of queries arriving at virtual time 0."""
        for query in queries:
            self._submit(query)
        while self._heap:
            self._step()
        if self.stats.completed != self.stats.submitted:
            raise AssertionError(
                f"lost queries: submitted {self.stats.submitted}, completed {self.stats.completed}"
            )
        return self.records

    def _submit(self, query: Query) -> None:
        self.stats.submitted += 1
        self._submit_times[query.query_id] = self.clock_us
        if self.config.strategy in (Strategy.NEXT_READY, Strategy.NO_CACHE):
            self.global_queue.append(query)
            self._record_route(query, -1, False)
        else:
            target, fallback = self._decide(query)
            if fallback:
                self.stats.fallback_routed += 1
            self.queues[target].append(query)
            self._record_route(query, target, fallback)
        self._fill_idle()

    def _record_route(self, query: Query, target: int, fallback: bool) -> None:
        self._routed[query.query_id] = (target, fallback)

    def _next_work_for(self, processor: int) -> tuple[Query, bool] | None:
        """The next query processor should run: own queue head, else steal."""
        if self.config.strategy in (Strategy.NEXT_READY, Strategy.NO_CACHE):
            if self.global_queue:
                return self.global_queue.popleft(), False
            return None
        own = self.queues[processor]
        if own:
            return own.popleft(), False
        if not self.config.steal_enabled:
            return None
        lengths = self._queue_lengths()
        longest = max(range(len(lengths)), key=lambda p: (lengths[p], -p))
        if lengths[longest] == 0:
            return None
        return self.queues[longest].popleft(), True

    def _fill_idle(self) -> None:
        # Dispatch work to ready processors in becomes-ready order. A
        # processor with no reachable work goes back to the ready queue.
        passes = 0
        while self.ready and passes < len(self.ready):
            processor = self.ready.popleft()
            work = self._next_work_for(processor)
            if work is None:
                self.ready.append(processor)
                passes += 1
                continue
            passes = 0
            query, stolen = work
            if stolen:
                self.stats.stolen += 1
            self._dispatch(query, processor)
        self._check_conservation()

    def _dispatch(self, query: Query, processor: int) -> None:
        assert not self.in_flight[processor], "ack protocol violated: processor already busy"
        self.in_flight[processor] = True
        result = self.executors[processor].execute(query)
        complete = self.clock_us + result.elapsed_us
        self._seq += 1
        heapq.heappush(self._heap, (complete, self._seq, processor))
        routed, fallback = self._routed.get(query.query_id, (processor, False))
        self._pending[processor] = (query, result, self.clock_us, routed, fallback)

    def _step(self) -> None:
        complete_us, _, processor = heapq.heappop(self._heap)
        self.clock_us = complete_us
        query, result, dispatch_us, routed, fallback = self._pending.pop(processor)
        self.in_flight[processor] = False
        self.stats.completed += 1
        self.stats.per_processor_completed[processor] += 1
        self.records.append(
            QueryRecord(
                query=query,
                processor=processor,
                submit_us=self._submit_times[query.query_id],
                dispatch_us=dispatch_us,
                complete_us=complete_us,
                result=result,
                routed_processor=routed if routed >= 0 else processor,
                fallback_used=fallback,
            )
        )
        self.ready.append(processor)
        self._fill_idle()

    def _check_conservation(self) -> None:
        # With stealing disabled a processor may legitimately idle beside
        # another's queue, so the invariant only binds when stealing is on.
        if not self.config.steal_enabled:
            return
        has_work = bool(self.global_queue) or any(self.queues[p] for p in range(self.config.num_processors))
        has_idle = any(not self.in_flight[p] for p in range(self.config.num_processors))
        if has_work and has_idle:
            self.stats.conservation_violations += 1
            raise AssertionError("work conservation violated: idle processor beside a non-empty queue")
