"""Hotspot workload generation.

A workload is a list of queries drawn from small graph regions: centers
are sampled uniformly, each contributes a group of queries on nodes
within r hops of it, and groups are emitted consecutively so that
topology-aware routing has locality to exploit. Query kinds rotate
round-robin through aggregation, random walk, and reachability.
"""

from __future__ import annotations

import json
import random
from dataclasses import asdict, dataclass
from pathlib import Path

from .errors import ConfigurationError
from .graph import Graph
from .landmarks import bfs_distances_truncated
from .queries import DEFAULT_RESTART_PROB, Query, QueryKind
from .rng import derive_seed

KIND_ROTATION = (QueryKind.AGGREGATION, QueryKind.RANDOM_WALK, QueryKind.REACHABILITY)


@dataclass(frozen=True)
class WorkloadSpec:
    num_hotspots: int = 100
    queries_per_hotspot: int = 10
    hotspot_radius: int = 2  # r: query nodes lie within r hops of the center
    hops: int = 2  # h: traversal budget of each query
    seed: int = 0
    restart_prob: float = DEFAULT_RESTART_PROB

    def total_queries(self) -> int:
        return self.num_hotspots * self.queries_per_hotspot


@dataclass
class GeneratedWorkload:
    spec: WorkloadSpec
    queries: list[Query]
    centers: list[int]
    center_resamples: int = 0


def generate_workload(graph: Graph, spec: WorkloadSpec) -> GeneratedWorkload:
    """Sample a hotspot workload from the graph.

    Centers are drawn uniformly without replacement; a center whose
    r-hop ball is smaller than the per-hotspot query count is resampled
    (and counted). Every query gets a derived seed so walks reproduce.
    """
    if graph.node_count < spec.num_hotspots:
        raise ConfigurationError(
            f"graph has {graph.node_count} nodes, fewer than {spec.num_hotspots} hotspots"
        )
    rng = random.Random(spec.seed)
    nodes = sorted(graph.entries)
    candidates = nodes[:]
    rng.shuffle(candidates)

    queries: list[Query] = []
    centers: list[int] = []
    resamples = 0
    query_id = 0
    pool_pos = 0
    while len(centers) < spec.num_hotspots:
        if pool_pos >= len(candidates):
            raise ConfigurationError("ran out of candidate centers with large enough regions")
        center = candidates[pool_pos]
        pool_pos += 1
        ball = sorted(bfs_distances_truncated(graph, center, spec.hotspot_radius))
        if len(ball) < spec.queries_per_hotspot:
            resamples += 1
            continue
        centers.append(center)
        chosen = rng.sample(ball, spec.queries_per_hotspot)
        for source in chosen:
            kind = KIND_ROTATION[query_id % len(KIND_ROTATION)]
            target = None
            if kind is QueryKind.REACHABILITY:
                others = [u for u in ball if u != source]
                target = rng.choice(others) if others else source
            queries.append(
                Query(
                    kind=kind,
                    source=source,
                    h=spec.hops,
                    target=target,
                    restart_prob=spec.restart_prob,
                    seed=derive_seed(spec.seed, 0x51, query_id),
                    query_id=query_id,
                )
            )
            query_id += 1
    return GeneratedWorkload(spec=spec, queries=queries, centers=centers, center_resamples=resamples)


def parse_workload_spec(text: str) -> WorkloadSpec:
    """Parse "hotspot:<count>x<per>:r<radius>:h<hops>" into a WorkloadSpec."""
    parts = text.split(":")
    if not parts or parts[0] != "hotspot":
        raise ConfigurationError(f"unknown workload spec {text!r} (expected hotspot:AxB:rR:hH)")
    try:
        count_s, per_s = parts[1].split("x")
        spec = WorkloadSpec(num_hotspots=int(count_s), queries_per_hotspot=int(per_s))
        for extra in parts[2:]:
            if extra.startswith("r"):
                spec = WorkloadSpec(**{**asdict(spec), "hotspot_radius": int(extra[1:])})
            elif extra.startswith("h"):
                spec = WorkloadSpec(**{**asdict(spec), "hops": int(extra[1:])})
            else:
                raise ValueError(f"unknown field {extra!r}")
    except (IndexError, ValueError) as exc:
        raise ConfigurationError(f"bad workload spec {text!r}: {exc}") from exc
    return spec


def save_workload(workload: GeneratedWorkload, path: str | Path) -> None:
    doc = {
        "version": 1,
        "spec": asdict(workload.spec),
        "centers": workload.centers,
        "center_resamples": workload.center_resamples,
        "queries": [
            {
                "query_id": q.query_id,
                "kind": q.kind.value,
                "source": q.source,
                "target": q.target,
                "h": q.h,
                "label_filter": q.label_filter,
                "restart_prob": q.restart_prob,
                "seed": q.seed,
            }
            for q in workload.queries
        ],
    }
    Path(path).write_text(json.dumps(doc, indent=1))


def load_workload(path: str | Path) -> GeneratedWorkload:
    doc = json.loads(Path(path).read_text())
    if doc.get("version") != 1:
        raise ConfigurationError(f"{path}: unsupported workload version {doc.get('version')}")
    spec = WorkloadSpec(**doc["spec"])
    queries = [
        Query(
            kind=QueryKind(q["kind"]),
            source=q["source"],
            h=q["h"],
            target=q["target"],
            label_filter=q["label_filter"],
            restart_prob=q["restart_prob"],
            seed=q["seed"],
            query_id=q["query_id"],
        )
        for q in doc["queries"]
    ]
    return GeneratedWorkload(
        spec=spec, queries=queries, centers=doc["centers"], center_resamples=doc["center_resamples"]
    )
