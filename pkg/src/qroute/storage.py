"""Partitioned key-value storage tier serving adjacency entries.

The graph is hash-partitioned across storage servers; any processor can
ask any server for an entry. Reads are concurrent-safe, updates take the
partition's lock exclusively.
"""

from __future__ import annotations

import threading
from typing import Callable

from .errors import NotFoundError
from .graph import AdjacencyEntry, Graph, GraphUpdate

PartitionFn = Callable[[int], int]


def modulo_partition(num_servers: int) -> PartitionFn:
    """Default partitioner: node id modulo server count."""

    def fn(node: int) -> int:
        return node % num_servers

    return fn


class StoragePartitionMap:
    """Deterministic total map node id -> storage server index."""

    def __init__(self, num_servers: int, partition_fn: PartitionFn | None = None):
        if num_servers < 1:
            raise ValueError("need at least one storage server")
        self.num_servers = num_servers
        self._fn = partition_fn or modulo_partition(num_servers)

    def server_of(self, node: int) -> int:
        idx = self._fn(node)
        if not 0 <= idx < self.num_servers:
            raise ValueError(f"partition_fn mapped {node} to invalid server {idx}")
        return idx


class StoragePartition:
    """One server's shard: an entry dict, a request counter, and a lock."""

    def __init__(self, index: int):
        self.index = index
        self.entries: dict[int, AdjacencyEntry] = {}
        self.request_count = 0
        self.lock = threading.Lock()

    def get(self, node: int) -> AdjacencyEntry:
        with self.lock:
            self.request_count += 1
            entry = self.entries.get(node)
        if entry is None:
            raise NotFoundError(f"node {node} not stored on server {self.index}")
        return entry


class StorageTier:
    """All partitions plus the graph they shard.

    The tier keeps the authoritative Graph object; partitions hold
    references into it. Updates are serialized through a single writer
    lock and re-shard only the entries the update touched.
    """

    def __init__(self, graph: Graph, partition_map: StoragePartitionMap):
        self.graph = graph
        self.partition_map = partition_map
        self.partitions = [StoragePartition(i) for i in range(partition_map.num_servers)]
        self._writer_lock = threading.Lock()
        for node, entry in graph.entries.items():
            self.partitions[partition_map.server_of(node)].entries[node] = entry

    def get(self, node: int) -> AdjacencyEntry:
        return self.partitions[self.partition_map.server_of(node)].get(node)

    def apply_update(self, update: GraphUpdate) -> set[int]:
        """Apply a structural update to the graph and re-shard changed entries."""
        with self._writer_lock:
            receipt = self.graph.apply_update(update)
            for node in receipt:
                server = self.partitions[self.partition_map.server_of(node)]
                with server.lock:
                    if node in self.graph.entries:
                        server.entries[node] = self.graph.entries[node]
                    else:
                        server.entries.pop(node, None)
            return receipt

    @property
    def total_requests(self) -> int:
        return sum(p.request_count for p in self.partitions)

    def reset_counters(self) -> None:
        for p in self.partitions:
            p.request_count = 0

    def stored_counts(self) -> list[int]:
        return [len(p.entries) for p in self.partitions]
