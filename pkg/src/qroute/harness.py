"""Experiment driver: build the tiers, stream a workload, collect metrics.

Runs start with cold caches. Throughput is measured on the simulated
clock (charged storage latencies plus a deterministic per-node compute
cost), which keeps results reproducible across hosts and transports.
"""

from __future__ import annotations

import csv
import dataclasses
from dataclasses import dataclass, field
from pathlib import Path

from .embedding import EmbedConfig, EmbeddingTable, build_embedding
from .errors import ConfigurationError
from .graph import Graph, load_edge_list
from .landmarks import (
    DEFAULT_LANDMARK_COUNT,
    DEFAULT_SEPARATION_HOPS,
    LandmarkIndex,
    LandmarkSet,
    assign_pivots,
    build_landmark_index,
)
from .processor import CostModel, Processor
from .router import DispatchLoop, QueryRecord, RouterConfig, Strategy
from .storage import StoragePartitionMap, StorageTier
from .synth import parse_graph_spec
from .workload import GeneratedWorkload, WorkloadSpec, generate_workload, load_workload, parse_workload_spec

DEFAULT_CACHE_BYTES = 4 * 1024 * 1024 * 1024  # ample: nothing evicts at desk scale

CSV_HEADER = [
    "run_id",
    "strategy",
    "P",
    "S",
    "cache_bytes",
    "load_factor",
    "alpha",
    "D",
    "L",
    "query_id",
    "kind",
    "processor",
    "latency_us",
    "hits",
    "misses",
]

SWEEP_PARAMETERS = {
    "processors": "num_processors",
    "storage": "num_storage_servers",
    "cache": "cache_bytes",
    "load_factor": "load_factor",
    "alpha": "alpha",
    "dimensions": "dimensions",
    "landmarks": "num_landmarks",
}


@dataclass
class ExperimentConfig:
    graph: str = "powerlaw:10000:4"  # path to an edge list, or a synthetic spec
    workload: str = "hotspot:100x10:r2:h2"  # path to a workload JSON, or a spec
    strategy: Strategy = Strategy.EMBED
    num_processors: int = 4
    num_storage_servers: int = 2
    cache_bytes: int = DEFAULT_CACHE_BYTES
    load_factor: float = 20.0
    alpha: float = 0.5
    dimensions: int = 10
    num_landmarks: int = DEFAULT_LANDMARK_COUNT
    separation: int = DEFAULT_SEPARATION_HOPS
    transport: str = "inproc"  # inproc | tcp
    seed: int = 0
    steal_enabled: bool = True
    cold_start: bool = True
    repetitions: int = 1
    cost_model: CostModel = field(default_factory=CostModel)
    landmark_snapshot: str | None = None
    embedding_snapshot: str | None = None
    auto_preprocess: bool = True
    run_id: str | None = None

    def resolved_run_id(self) -> str:
        return self.run_id or f"{self.strategy.value}-p{self.num_processors}-seed{self.seed}"


@dataclass(frozen=True)
class QueryRow:
    query_id: int
    kind: str
    processor: int
    latency_us: float
    hits: int
    misses: int


@dataclass(frozen=True)
class RunMetrics:
    total_queries: int
    wall_time_us: float
    hit_total: int
    miss_total: int
    per_processor_completed: tuple[int, ...]
    storage_requests: int
    rows: tuple[QueryRow, ...]

    @property
    def throughput_qps(self) -> float:
        if self.wall_time_us <= 0:
            return 0.0
        return self.total_queries * 1e6 / self.wall_time_us

    @property
    def hit_rate(self) -> float:
        fetches = self.hit_total + self.miss_total
        return self.hit_total / fetches if fetches else 0.0

    @property
    def mean_latency_us(self) -> float:
        if not self.rows:
            return 0.0
        return sum(r.latency_us for r in self.rows) / len(self.rows)


class Runtime:
    """Heavy, reusable pieces of an experiment: graph, workload, artifacts.

    Landmark indexes and embeddings are cached per parameter combination
    so sweeps and multi-strategy comparisons do not redo BFS/embedding
    work. Cached artifacts are shared read-only.
    """

    def __init__(self, graph: Graph, workload: GeneratedWorkload):
        self.graph = graph
        self.workload = workload
        self._landmark_sets: dict[tuple[int, int], LandmarkSet] = {}
        self._indexes: dict[tuple[int, int, int], LandmarkIndex] = {}
        self._embeddings: dict[tuple[int, int, int, int], EmbeddingTable] = {}

    def landmark_index(self, num_landmarks: int, separation: int, num_processors: int) -> LandmarkIndex:
        key = (num_landmarks, separation, num_processors)
        if key not in self._indexes:
            base = self._base_index(num_landmarks, separation)
            if base.assignment.num_processors == num_processors:
                self._indexes[key] = base
            else:
                lm_dist = base.landmark_submatrix()
                assignment = assign_pivots(base.landmarks, lm_dist, num_processors)
                self._indexes[key] = LandmarkIndex(
                    base.landmark_set, base.node_ids, base.dist, assignment, base.sentinel
                )
        return self._indexes[key]

    def _base_index(self, num_landmarks: int, separation: int) -> LandmarkIndex:
        for (L, sep, _), index in self._indexes.items():
            if L == num_landmarks and sep == separation:
                return index
        index = build_landmark_index(self.graph, 1, num_landmarks, separation)
        self._indexes[(num_landmarks, separation, 1)] = index
        return index

    def embedding(self, num_landmarks: int, separation: int, dimensions: int, seed: int) -> EmbeddingTable:
        key = (num_landmarks, separation, dimensions, seed)
        if key not in self._embeddings:
            index = self.landmark_index(num_landmarks, separation, 1)
            cfg = EmbedConfig(dimensions=dimensions, seed=seed)
            self._embeddings[key] = build_embedding(index, cfg)
        return self._embeddings[key]


def prepare_runtime(cfg: ExperimentConfig) -> Runtime:
    graph_source = cfg.graph
    if Path(graph_source).exists():
        graph = load_edge_list(graph_source)
    else:
        graph = parse_graph_spec(graph_source, seed=cfg.seed)
    if Path(cfg.workload).exists():
        workload = load_workload(cfg.workload)
    else:
        spec = parse_workload_spec(cfg.workload)
        spec = dataclasses.replace(spec, seed=cfg.seed)
        workload = generate_workload(graph, spec)
    return Runtime(graph, workload)


def _resolve_artifacts(cfg: ExperimentConfig, runtime: Runtime) -> tuple[LandmarkIndex | None, EmbeddingTable | None]:
    landmark_index = None
    embedding = None
    if cfg.strategy in (Strategy.LANDMARK, Strategy.EMBED):
        if cfg.landmark_snapshot is not None:
            if not Path(cfg.landmark_snapshot).exists():
                raise ConfigurationError(
                    f"strategy {cfg.strategy.value} needs the landmark distance table; "
                    f"snapshot {cfg.landmark_snapshot!r} not found"
                )
            landmark_index = LandmarkIndex.load(cfg.landmark_snapshot)
        elif cfg.auto_preprocess:
            landmark_index = runtime.landmark_index(cfg.num_landmarks, cfg.separation, cfg.num_processors)
        else:
            raise ConfigurationError(
                f"strategy {cfg.strategy.value} needs the landmark distance table artifact "
                "(enable auto_preprocess or pass landmark_snapshot)"
            )
    if cfg.strategy is Strategy.EMBED:
        if cfg.embedding_snapshot is not None:
            if not Path(cfg.embedding_snapshot).exists():
                raise ConfigurationError(
                    f"strategy embed needs the coordinate table; "
                    f"snapshot {cfg.embedding_snapshot!r} not found"
                )
            embedding = EmbeddingTable.load(cfg.embedding_snapshot, hops_lookup=landmark_index.landmark_distances)
        elif cfg.auto_preprocess:
            embedding = runtime.embedding(cfg.num_landmarks, cfg.separation, cfg.dimensions, cfg.seed)
        else:
            raise ConfigurationError(
                "strategy embed needs the coordinate table artifact "
                "(enable auto_preprocess or pass embedding_snapshot)"
            )
    return landmark_index, embedding


def run_experiment(
    cfg: ExperimentConfig,
    runtime: Runtime | None = None,
    landmark_index: LandmarkIndex | None = None,
    embedding: EmbeddingTable | None = None,
) -> RunMetrics:
    """Execute one cold-cache run and return its metrics.

    Explicitly passed artifacts win over the runtime cache and snapshots.
    """
    runtime = runtime or prepare_runtime(cfg)
    if landmark_index is None and embedding is None:
        landmark_index, embedding = _resolve_artifacts(cfg, runtime)

    tier = StorageTier(runtime.graph, StoragePartitionMap(cfg.num_storage_servers))
    cache_bytes = 0 if cfg.strategy is Strategy.NO_CACHE else cfg.cache_bytes
    router_cfg = RouterConfig(
        num_processors=cfg.num_processors,
        strategy=cfg.strategy,
        load_factor=cfg.load_factor,
        alpha=cfg.alpha,
        steal_enabled=cfg.steal_enabled,
        seed=cfg.seed,
    )

    cluster = None
    try:
        if cfg.transport == "tcp":
            from .tcp import TcpCluster

            cluster = TcpCluster(tier, cfg.num_processors, cache_bytes, cfg.cost_model)
            executors = cluster.executors
        elif cfg.transport == "inproc":
            executors = [
                Processor(i, tier, cache_bytes, cfg.cost_model) for i in range(cfg.num_processors)
            ]
        else:
            raise ConfigurationError(f"unknown transport {cfg.transport!r} (inproc | tcp)")

        loop = DispatchLoop(router_cfg, executors, landmark_index=landmark_index, embedding=embedding)
        records = loop.run(list(runtime.workload.queries))
    finally:
        if cluster is not None:
            cluster.close()

    return build_metrics(records, loop.clock_us, cfg.num_processors)


def build_metrics(records: list[QueryRecord], wall_time_us: float, num_processors: int) -> RunMetrics:
    rows = tuple(
        QueryRow(
            query_id=r.query.query_id,
            kind=r.query.kind.value,
            processor=r.processor,
            latency_us=r.latency_us,
            hits=r.result.cache_hits,
            misses=r.result.cache_misses,
        )
        for r in records
    )
    per_proc = [0] * num_processors
    for r in rows:
        per_proc[r.processor] += 1
    hit_total = sum(r.hits for r in rows)
    miss_total = sum(r.misses for r in rows)
    return RunMetrics(
        total_queries=len(rows),
        wall_time_us=wall_time_us,
        hit_total=hit_total,
        miss_total=miss_total,
        per_processor_completed=tuple(per_proc),
        storage_requests=miss_total,  # every miss is exactly one storage get
        rows=rows,
    )


# -- CSV ---------------------------------------------------------------------


def _config_columns(cfg: ExperimentConfig) -> list[str]:
    return [
        cfg.resolved_run_id(),
        cfg.strategy.value,
        str(cfg.num_processors),
        str(cfg.num_storage_servers),
        str(cfg.cache_bytes),
        repr(cfg.load_factor),
        repr(cfg.alpha),
        str(cfg.dimensions),
        str(cfg.num_landmarks),
    ]


def write_metrics_csv(path: str | Path, cfg: ExperimentConfig, metrics: RunMetrics, provenance: dict | None = None) -> None:
    """One row per query plus a SUMMARY row (wall time in latency_us)."""
    with open(path, "w", newline="") as fh:
        for key, value in (provenance or {}).items():
            fh.write(f"# {key}={value}\n")
        writer = csv.writer(fh)
        writer.writerow(CSV_HEADER)
        prefix = _config_columns(cfg)
        for row in metrics.rows:
            writer.writerow(
                prefix + [str(row.query_id), row.kind, str(row.processor), repr(row.latency_us), str(row.hits), str(row.misses)]
            )
        writer.writerow(prefix + ["SUMMARY", "", "", repr(metrics.wall_time_us), str(metrics.hit_total), str(metrics.miss_total)])


def read_metrics_csv(path: str | Path) -> RunMetrics:
    rows: list[QueryRow] = []
    wall_time_us = 0.0
    hit_total = miss_total = 0
    num_processors = 1
    with open(path, "r", newline="") as fh:
        data = [line for line in fh if not line.startswith("#")]
    reader = csv.reader(data)
    header = next(reader)
    if header != CSV_HEADER:
        raise ConfigurationError(f"{path}: unexpected CSV header")
    for record in reader:
        num_processors = max(num_processors, int(record[2]))
        if record[9] == "SUMMARY":
            wall_time_us = float(record[12])
            hit_total = int(record[13])
            miss_total = int(record[14])
            continue
        rows.append(
            QueryRow(
                query_id=int(record[9]),
                kind=record[10],
                processor=int(record[11]),
                latency_us=float(record[12]),
                hits=int(record[13]),
                misses=int(record[14]),
            )
        )
    per_proc = [0] * num_processors
    for row in rows:
        per_proc[row.processor] += 1
    return RunMetrics(
        total_queries=len(rows),
        wall_time_us=wall_time_us,
        hit_total=hit_total,
        miss_total=miss_total,
        per_processor_completed=tuple(per_proc),
        storage_requests=miss_total,
        rows=tuple(rows),
    )


# -- sweeps ------------------------------------------------------------------


@dataclass(frozen=True)
class SweepPoint:
    parameter: str
    value: float
    config: ExperimentConfig
    metrics: RunMetrics


def sweep(
    cfg: ExperimentConfig,
    parameter: str,
    values: list,
    runtime: Runtime | None = None,
) -> list[SweepPoint]:
    """Run the experiment once per parameter value."""
    if parameter not in SWEEP_PARAMETERS:
        raise ConfigurationError(f"unknown sweep parameter {parameter!r} (one of {sorted(SWEEP_PARAMETERS)})")
    field_name = SWEEP_PARAMETERS[parameter]
    runtime = runtime or prepare_runtime(cfg)
    points = []
    for value in values:
        typed = type(getattr(cfg, field_name))(value)
        point_cfg = dataclasses.replace(cfg, **{field_name: typed})
        metrics = run_experiment(point_cfg, runtime=runtime)
        points.append(SweepPoint(parameter=parameter, value=float(value), config=point_cfg, metrics=metrics))
    return points


def write_sweep_csv(path: str | Path, points: list[SweepPoint], provenance: dict | None = None) -> None:
    """One SUMMARY row per sweep point."""
    with open(path, "w", newline="") as fh:
        for key, value in (provenance or {}).items():
            fh.write(f"# {key}={value}\n")
        writer = csv.writer(fh)
        writer.writerow(CSV_HEADER)
        for point in points:
            metrics = point.metrics
            writer.writerow(
                _config_columns(point.config)
                + ["SUMMARY", "", "", repr(metrics.wall_time_us), str(metrics.hit_total), str(metrics.miss_total)]
            )
