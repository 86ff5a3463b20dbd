"""Landmark distance index used by topology-aware routing.

A small set of well-separated high-degree nodes is chosen as landmarks.
Hop distances from every node to every landmark (BFS over the bi-directed
view) give the router an O(n * L) sketch of the topology; grouping
landmarks under per-processor pivots collapses it to the O(n * P) table
d(u, p) = min distance from u to any landmark owned by processor p.
"""

from __future__ import annotations

import struct
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ConfigurationError, NotFoundError
from .graph import Graph

SNAPSHOT_MAGIC = b"QRLM"
SNAPSHOT_VERSION = 1

DEFAULT_LANDMARK_COUNT = 96
DEFAULT_SEPARATION_HOPS = 3
DEFAULT_REFRESH_RADIUS = 2
# Full preprocessing is redone after this many structural updates.
DEFAULT_REBUILD_AFTER_UPDATES = 10_000


def bfs_distances(graph: Graph, source: int) -> dict[int, int]:
    """Exact hop distances from source over the bi-directed view.

    Unreachable nodes are absent from the result.
    """
    if source not in graph:
        raise NotFoundError(f"BFS source {source} not in graph")
    dist = {source: 0}
    frontier = deque([source])
    while frontier:
        node = frontier.popleft()
        d = dist[node] + 1
        for nxt in graph.entries[node].undirected_neighbors():
            if nxt not in dist:
                dist[nxt] = d
                frontier.append(nxt)
    return dist


def bfs_distances_truncated(graph: Graph, source: int, max_depth: int) -> dict[int, int]:
    """Hop distances up to max_depth (inclusive) over the bi-directed view."""
    if source not in graph:
        raise NotFoundError(f"BFS source {source} not in graph")
    dist = {source: 0}
    frontier = deque([source])
    while frontier:
        node = frontier.popleft()
        d = dist[node] + 1
        if d > max_depth:
            continue
        for nxt in graph.entries[node].undirected_neighbors():
            if nxt not in dist:
                dist[nxt] = d
                frontier.append(nxt)
    return dist


def multi_source_ball(graph: Graph, sources: set[int], radius: int) -> dict[int, int]:
    """Distance to the nearest source, truncated at radius; sources at 0."""
    dist = {s: 0 for s in sources if s in graph}
    frontier = deque(dist)
    while frontier:
        node = frontier.popleft()
        d = dist[node] + 1
        if d > radius:
            continue
        for nxt in graph.entries[node].undirected_neighbors():
            if nxt not in dist:
                dist[nxt] = d
                frontier.append(nxt)
    return dist


@dataclass
class LandmarkSet:
    landmarks: list[int]
    separation_threshold: int = DEFAULT_SEPARATION_HOPS
    target_count: int = DEFAULT_LANDMARK_COUNT


def select_landmarks(
    graph: Graph,
    target_count: int = DEFAULT_LANDMARK_COUNT,
    separation_threshold: int = DEFAULT_SEPARATION_HOPS,
) -> LandmarkSet:
    """Pick up to target_count high-degree, mutually separated landmarks.

    Candidates are scanned in descending total degree (ties by ascending
    node id); a candidate is accepted iff every previously accepted
    landmark lies at hop distance >= separation_threshold, checked with a
    BFS truncated at separation_threshold - 1. Deterministic by
    construction. Small graphs may yield fewer than target_count.
    """
    if graph.node_count == 0:
        raise ConfigurationError("cannot select landmarks on an empty graph")
    order = sorted(graph.entries, key=lambda u: (-graph.entries[u].degree, u))
    accepted: list[int] = []
    accepted_set: set[int] = set()
    for candidate in order:
        if len(accepted) >= target_count:
            break
        if separation_threshold > 1:
            near = bfs_distances_truncated(graph, candidate, separation_threshold - 1)
            if any(u in accepted_set for u in near):
                continue
        accepted.append(candidate)
        accepted_set.add(candidate)
    return LandmarkSet(accepted, separation_threshold, target_count)


@dataclass
class PivotAssignment:
    """One pivot landmark per processor; every landmark owned by one processor."""

    pivot_of_processor: list[int]  # processor index -> landmark id
    processor_of_landmark: dict[int, int]  # landmark id -> processor index
    num_processors: int


def assign_pivots(landmarks: list[int], landmark_dist: np.ndarray, num_processors: int) -> PivotAssignment:
    """Greedy farthest-point pivots, then attach landmarks to closest pivot.

    The first two pivots are the farthest-apart landmark pair; each next
    pivot maximizes its minimum distance to the chosen pivots. Ties break
    toward lower landmark list position; attachment ties break toward the
    lower processor index.
    """
    L = len(landmarks)
    if num_processors < 1:
        raise ConfigurationError("need at least one processor")
    if L < num_processors:
        raise ConfigurationError(f"{L} landmarks cannot cover {num_processors} processors")

    pivot_idx: list[int] = []
    if num_processors == 1:
        pivot_idx = [0]
    else:
        best = (-1, 0, 1)
        for i in range(L):
            for j in range(i + 1, L):
                d = int(landmark_dist[i, j])
                if d > best[0]:
                    best = (d, i, j)
        pivot_idx = [best[1], best[2]]
        while len(pivot_idx) < num_processors:
            best_i, best_min = -1, -1
            for i in range(L):
                if i in pivot_idx:
                    continue
                m = min(int(landmark_dist[i, p]) for p in pivot_idx)
                if m > best_min:
                    best_min, best_i = m, i
            pivot_idx.append(best_i)

    processor_of: dict[int, int] = {}
    for i in range(L):
        if i in pivot_idx:
            processor_of[landmarks[i]] = pivot_idx.index(i)
            continue
        best_p, best_d = 0, None
        for p, pi in enumerate(pivot_idx):
            d = int(landmark_dist[i, pi])
            if best_d is None or d < best_d:
                best_p, best_d = p, d
        processor_of[landmarks[i]] = best_p
    return PivotAssignment(
        pivot_of_processor=[landmarks[i] for i in pivot_idx],
        processor_of_landmark=processor_of,
        num_processors=num_processors,
    )


class LandmarkIndex:
    """Distance tables: node x landmark and the derived node x processor.

    Rows are int32; unreachable distances take the sentinel value n (the
    node count at build time) so load-balanced arithmetic stays finite.
    """

    def __init__(
        self,
        landmark_set: LandmarkSet,
        node_ids: list[int],
        dist: np.ndarray,
        assignment: PivotAssignment,
        sentinel: int,
    ):
        self.landmark_set = landmark_set
        self.node_ids = list(node_ids)
        self.node_row = {u: i for i, u in enumerate(self.node_ids)}
        self.dist = dist  # shape (n, L)
        self.assignment = assignment
        self.sentinel = sentinel
        self._proc_cols = self._landmark_columns_by_processor()
        self.node_processor = self._build_node_processor()
        self.updates_since_build = 0
        self.rebuild_after_updates = DEFAULT_REBUILD_AFTER_UPDATES

    @property
    def landmarks(self) -> list[int]:
        return self.landmark_set.landmarks

    def _landmark_columns_by_processor(self) -> list[list[int]]:
        cols: list[list[int]] = [[] for _ in range(self.assignment.num_processors)]
        for col, lm in enumerate(self.landmarks):
            cols[self.assignment.processor_of_landmark[lm]].append(col)
        return cols

    def _build_node_processor(self) -> np.ndarray:
        out = np.empty((len(self.node_ids), self.assignment.num_processors), dtype=np.int32)
        for p, group in enumerate(self._proc_cols):
            out[:, p] = self.dist[:, group].min(axis=1)
        return out

    def landmark_distances(self, node: int) -> np.ndarray:
        row = self.node_row.get(node)
        if row is None:
            raise NotFoundError(f"node {node} has no landmark distance row")
        return self.dist[row]

    def processor_distances(self, node: int) -> np.ndarray:
        row = self.node_row.get(node)
        if row is None:
            raise NotFoundError(f"node {node} has no processor distance row")
        return self.node_processor[row]

    def landmark_submatrix(self) -> np.ndarray:
        """The (L, L) hop-distance matrix between landmarks."""
        rows = [self.node_row[lm] for lm in self.landmarks]
        return self.dist[rows]

    def table_bytes(self) -> int:
        return int(self.dist.nbytes + self.node_processor.nbytes)

    def needs_rebuild(self) -> bool:
        return self.updates_since_build >= self.rebuild_after_updates

    def _ensure_row(self, node: int) -> int:
        row = self.node_row.get(node)
        if row is not None:
            return row
        row = len(self.node_ids)
        self.node_ids.append(node)
        self.node_row[node] = row
        self.dist = np.vstack([self.dist, np.full((1, len(self.landmarks)), self.sentinel, dtype=np.int32)])
        self.node_processor = np.vstack(
            [self.node_processor, np.full((1, self.assignment.num_processors), self.sentinel, dtype=np.int32)]
        )
        return row

    def refresh_after_update(self, graph: Graph, receipt: set[int], hop_radius: int = DEFAULT_REFRESH_RADIUS) -> int:
        """Recompute landmark-distance rows near an applied update.

        Rows for every node within hop_radius of the receipt set (on the
        post-update graph) are refreshed; rows further out are left stale
        by design. Edge additions only shorten distances, so affected rows
        relax through the receipt nodes' fresh rows; removals fall back to
        exact per-node BFS. Returns the number of rows refreshed.
        """
        if not receipt:
            return 0
        self.updates_since_build += 1
        present = {u for u in receipt if u in graph}
        removed = receipt - present
        ball = multi_source_ball(graph, present, hop_radius)
        if removed:
            refreshed = self._refresh_exact(graph, set(ball))
        else:
            refreshed = self._refresh_relax(graph, present, ball, hop_radius)
        return refreshed

    def _refresh_exact(self, graph: Graph, nodes: set[int]) -> int:
        lm_col = {lm: c for c, lm in enumerate(self.landmarks)}
        want = len(self.landmarks)
        for node in sorted(nodes):
            row = self._ensure_row(node)
            new_row = np.full(len(self.landmarks), self.sentinel, dtype=np.int32)
            # BFS from the node, stopping once every landmark is seen.
            found = 0
            dist = {node: 0}
            frontier = deque([node])
            if node in lm_col:
                new_row[lm_col[node]] = 0
                found += 1
            while frontier and found < want:
                u = frontier.popleft()
                d = dist[u] + 1
                for nxt in graph.entries[u].undirected_neighbors():
                    if nxt not in dist:
                        dist[nxt] = d
                        col = lm_col.get(nxt)
                        if col is not None:
                            new_row[col] = d
                            found += 1
                        frontier.append(nxt)
            self.dist[row] = new_row
            self._refresh_processor_row(row)
        return len(nodes)

    def _refresh_relax(self, graph: Graph, anchors: set[int], ball: dict[int, int], hop_radius: int) -> int:
        # New edges only create shortcuts through the anchor nodes (the
        # changed entries), so for a node u in the ball:
        #   d'(u, l) = min(d(u, l), d'(u, a) + 1 + d(b, l)) over anchor
        # neighbors; iterating per-anchor with exact truncated-BFS anchor
        # distances keeps rows inside the ball exact for a single update.
        # _ensure_row may replace self.dist, so resolve rows before indexing
        anchor_row = {a: self._ensure_row(a) for a in sorted(anchors)}
        old_rows = {a: self.dist[row].astype(np.int64) for a, row in anchor_row.items()}
        # Settle the anchors against each other first: after AddEdge(a, b)
        # the fresh rows are min(old_a, 1 + old_b) and min(old_b, 1 + old_a).
        settled: dict[int, np.ndarray] = {}
        for a in sorted(anchors):
            best = old_rows[a].copy()
            for nbr in graph.entries[a].undirected_neighbors():
                if nbr in old_rows:
                    np.minimum(best, old_rows[nbr] + 1, out=best)
            settled[a] = np.minimum(best, self.sentinel)
            self.dist[self.node_row[a]] = settled[a].astype(np.int32)
        touched = {self.node_row[a] for a in anchors}
        for a in sorted(anchors):
            a_ball = bfs_distances_truncated(graph, a, hop_radius)
            for u, da in a_ball.items():
                if u in anchors or u not in ball:
                    continue
                row = self._ensure_row(u)
                candidate = np.minimum(self.dist[row].astype(np.int64), settled[a] + da)
                self.dist[row] = np.minimum(candidate, self.sentinel).astype(np.int32)
                touched.add(row)
        for row in touched:
            self._refresh_processor_row(row)
        return len(ball)

    def _refresh_processor_row(self, row: int) -> None:
        for p, group in enumerate(self._proc_cols):
            self.node_processor[row, p] = self.dist[row, group].min()

    # Binary snapshot: little-endian header, then raw arrays. Layout:
    #   magic "QRLM" | u16 version | u64 n | u64 L | u64 P
    #   u32 separation | u32 target_count | u64 sentinel
    #   n * u64 node ids | L * u64 landmark ids | L * u32 processor-of-landmark
    #   P * u64 pivot ids | n*L int32 dist (row-major) | n*P int32 d(u,p)
    def save(self, path: str | Path) -> None:
        n, L = self.dist.shape
        P = self.assignment.num_processors
        with open(path, "wb") as fh:
            fh.write(SNAPSHOT_MAGIC)
            fh.write(struct.pack("<HQQQ", SNAPSHOT_VERSION, n, L, P))
            fh.write(struct.pack("<IIQ", self.landmark_set.separation_threshold, self.landmark_set.target_count, self.sentinel))
            fh.write(np.asarray(self.node_ids, dtype=np.uint64).tobytes())
            fh.write(np.asarray(self.landmarks, dtype=np.uint64).tobytes())
            fh.write(np.asarray([self.assignment.processor_of_landmark[lm] for lm in self.landmarks], dtype=np.uint32).tobytes())
            fh.write(np.asarray(self.assignment.pivot_of_processor, dtype=np.uint64).tobytes())
            fh.write(np.ascontiguousarray(self.dist, dtype=np.int32).tobytes())
            fh.write(np.ascontiguousarray(self.node_processor, dtype=np.int32).tobytes())

    @classmethod
    def load(cls, path: str | Path) -> "LandmarkIndex":
        with open(path, "rb") as fh:
            magic = fh.read(4)
            if magic != SNAPSHOT_MAGIC:
                raise ConfigurationError(f"{path}: not a landmark snapshot")
            version, n, L, P = struct.unpack("<HQQQ", fh.read(26))
            if version != SNAPSHOT_VERSION:
                raise ConfigurationError(f"{path}: unsupported snapshot version {version}")
            separation, target, sentinel = struct.unpack("<IIQ", fh.read(16))
            node_ids = np.frombuffer(fh.read(8 * n), dtype=np.uint64).astype(np.int64).tolist()
            lm_ids = np.frombuffer(fh.read(8 * L), dtype=np.uint64).astype(np.int64).tolist()
            proc_of = np.frombuffer(fh.read(4 * L), dtype=np.uint32).tolist()
            pivots = np.frombuffer(fh.read(8 * P), dtype=np.uint64).astype(np.int64).tolist()
            dist = np.frombuffer(fh.read(4 * n * L), dtype=np.int32).reshape(n, L).copy()
            node_proc = np.frombuffer(fh.read(4 * n * P), dtype=np.int32).reshape(n, P).copy()
        assignment = PivotAssignment(
            pivot_of_processor=pivots,
            processor_of_landmark={lm: int(p) for lm, p in zip(lm_ids, proc_of)},
            num_processors=P,
        )
        index = cls.__new__(cls)
        index.landmark_set = LandmarkSet(lm_ids, separation, target)
        index.node_ids = node_ids
        index.node_row = {u: i for i, u in enumerate(node_ids)}
        index.dist = dist
        index.assignment = assignment
        index.sentinel = int(sentinel)
        index._proc_cols = index._landmark_columns_by_processor()
        index.node_processor = node_proc
        index.updates_since_build = 0
        index.rebuild_after_updates = DEFAULT_REBUILD_AFTER_UPDATES
        return index


def build_landmark_index(
    graph: Graph,
    num_processors: int,
    target_count: int = DEFAULT_LANDMARK_COUNT,
    separation_threshold: int = DEFAULT_SEPARATION_HOPS,
    landmark_set: LandmarkSet | None = None,
) -> LandmarkIndex:
    """Full preprocessing: selection, per-landmark BFS, pivots, d(u,p)."""
    lm_set = landmark_set or select_landmarks(graph, target_count, separation_threshold)
    node_ids = list(graph.entries)
    node_row = {u: i for i, u in enumerate(node_ids)}
    sentinel = graph.node_count
    dist = np.full((len(node_ids), len(lm_set.landmarks)), sentinel, dtype=np.int32)
    for col, lm in enumerate(lm_set.landmarks):
        for node, d in bfs_distances(graph, lm).items():
            dist[node_row[node], col] = d
    lm_rows = [node_row[lm] for lm in lm_set.landmarks]
    lm_dist = dist[lm_rows]  # shape (L, L): lm_dist[i, j] = d(landmark_i, landmark_j)
    assignment = assign_pivots(lm_set.landmarks, lm_dist, num_processors)
    return LandmarkIndex(lm_set, node_ids, dist, assignment, sentinel)
