"""Euclidean graph embedding driven by hop distances to landmarks.

Landmarks are placed first by minimizing the summed squared relative
error between their pairwise hop distances and Euclidean distances; every
other node is then placed independently against the fixed landmark
coordinates. Both stages run the downhill simplex optimizer.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ConfigurationError, EmbeddingError
from .rng import derive_seed
from .simplex import SimplexConfig, simplex_downhill

SNAPSHOT_MAGIC = b"QREM"
SNAPSHOT_VERSION = 1

DEFAULT_DIMENSIONS = 10
DEFAULT_RESTARTS = 3


def relative_error(d_graph: float, d_euclid: float) -> float:
    """|graph distance - Euclidean distance| / graph distance."""
    if d_graph <= 0:
        raise ValueError("relative error requires a positive graph distance")
    return abs(d_graph - d_euclid) / d_graph


@dataclass(frozen=True)
class EmbedConfig:
    dimensions: int = DEFAULT_DIMENSIONS
    restarts: int = DEFAULT_RESTARTS
    seed: int = 0
    # Sum of squared relative errors by default; plain sum as an option.
    squared_errors: bool = True
    landmark_iterations: int | None = None  # None: scaled to problem size
    node_iterations: int | None = None


def _pairwise_distances(coords: np.ndarray) -> np.ndarray:
    diff = coords[:, None, :] - coords[None, :, :]
    return np.sqrt((diff * diff).sum(axis=2))


def landmark_pair_error(coords: np.ndarray, hop_dist: np.ndarray, squared: bool = True) -> float:
    """Aggregate relative error over all usable landmark pairs.

    Pairs at hop distance 0 (same node) or at/above the unreachable
    sentinel (any value that is not a genuine hop count, encoded as
    negative or >= number of nodes by callers) are excluded before calling
    via masking in the objective builder; here every pair with hop > 0
    counts.
    """
    eu = _pairwise_distances(coords)
    iu = np.triu_indices(hop_dist.shape[0], k=1)
    hops = hop_dist[iu].astype(np.float64)
    mask = hops > 0
    errs = np.abs(hops[mask] - eu[iu][mask]) / hops[mask]
    if squared:
        return float((errs * errs).sum())
    return float(errs.sum())


def mean_landmark_pair_error(coords: np.ndarray, hop_dist: np.ndarray) -> float:
    """Mean (unsquared) relative error over usable landmark pairs."""
    eu = _pairwise_distances(coords)
    iu = np.triu_indices(hop_dist.shape[0], k=1)
    hops = hop_dist[iu].astype(np.float64)
    mask = hops > 0
    if not mask.any():
        return 0.0
    errs = np.abs(hops[mask] - eu[iu][mask]) / hops[mask]
    return float(errs.mean())


def embed_landmarks(hop_dist: np.ndarray, config: EmbedConfig, sentinel: int | None = None) -> np.ndarray:
    """Place landmarks in D dimensions; returns an (L, D) coordinate array.

    hop_dist is the symmetric landmark-to-landmark hop matrix; entries at
    or above the sentinel are treated as unreachable and excluded from the
    objective. Runs `restarts` seeded random starts of the joint downhill
    simplex and keeps the best.
    """
    L = hop_dist.shape[0]
    D = config.dimensions
    if L == 0:
        return np.zeros((0, D), dtype=np.float64)
    if L == 1:
        return np.zeros((1, D), dtype=np.float64)

    hops = hop_dist.astype(np.float64).copy()
    if sentinel is not None:
        hops[hops >= sentinel] = 0.0  # masked out by the > 0 filter
    iu = np.triu_indices(L, k=1)
    pair_hops = hops[iu]
    usable = pair_hops > 0
    if not usable.any():
        raise EmbeddingError("every landmark pair is unreachable; nothing to embed")
    scale = float(pair_hops[usable].max())

    pair_i = iu[0][usable]
    pair_j = iu[1][usable]
    targets = pair_hops[usable]

    def objective(flat: np.ndarray) -> float:
        coords = flat.reshape(L, D)
        diff = coords[pair_i] - coords[pair_j]
        eu = np.sqrt((diff * diff).sum(axis=1))
        errs = np.abs(targets - eu) / targets
        return float((errs * errs).sum()) if config.squared_errors else float(errs.sum())

    iterations = config.landmark_iterations
    if iterations is None:
        iterations = max(2000, 60 * L * D)
    simplex_cfg = SimplexConfig(diameter_tol=1e-5 * scale, max_iterations=iterations, initial_step=0.25 * scale)

    best_coords: np.ndarray | None = None
    best_value = np.inf
    for restart in range(max(1, config.restarts)):
        rng = np.random.default_rng(derive_seed(config.seed, 0xE0, restart))
        init = rng.uniform(0.0, scale, size=L * D)
        result = simplex_downhill(objective, init, simplex_cfg)
        value = objective(result)
        if value < best_value:
            best_value = value
            best_coords = result.reshape(L, D)
    assert best_coords is not None
    return best_coords


def embed_node(
    node_landmark_hops: np.ndarray,
    landmark_coords: np.ndarray,
    config: EmbedConfig,
    node_seed: int,
    sentinel: int | None = None,
) -> tuple[np.ndarray, bool]:
    """Place one node against fixed landmark coordinates.

    Returns (coords, flagged): flagged is True when the node is
    unreachable from every landmark and received seeded random
    coordinates inside the landmark bounding box. A node at hop distance
    0 from some landmark is that landmark and gets its coordinates
    directly. Pure function of its inputs, so callers may parallelize
    across nodes freely.
    """
    D = config.dimensions
    hops = node_landmark_hops.astype(np.float64)
    if sentinel is not None:
        hops = np.where(hops >= sentinel, 0.0, hops)

    zero = np.nonzero(node_landmark_hops == 0)[0]
    if zero.size and (sentinel is None or node_landmark_hops[zero[0]] < sentinel):
        return landmark_coords[zero[0]].astype(np.float64).copy(), False

    usable = hops > 0
    lo = landmark_coords.min(axis=0)
    hi = landmark_coords.max(axis=0)
    rng = np.random.default_rng(node_seed)
    if not usable.any():
        return rng.uniform(lo, hi, size=D), True

    anchors = landmark_coords[usable]
    targets = hops[usable]

    def objective(c: np.ndarray) -> float:
        diff = anchors - c
        eu = np.sqrt((diff * diff).sum(axis=1))
        errs = np.abs(targets - eu) / targets
        return float((errs * errs).sum()) if config.squared_errors else float(errs.sum())

    nearest = np.argsort(targets, kind="stable")[:3]
    centroid = anchors[nearest].mean(axis=0)
    span = float(np.max(hi - lo)) or 1.0
    init = centroid + rng.normal(0.0, 0.05 * span, size=D)

    iterations = config.node_iterations
    if iterations is None:
        iterations = max(150, 25 * D)
    simplex_cfg = SimplexConfig(diameter_tol=1e-3, max_iterations=iterations, initial_step=0.2 * span)
    return simplex_downhill(objective, init, simplex_cfg), False


class EmbeddingTable:
    """D-dimensional coordinates per node, computed lazily on first use.

    Keeps the landmark coordinates plus each node's hop distances to the
    landmarks (via the provided lookup) so that any node's coordinates can
    be derived on demand with a per-node seed. Materialized coordinates
    are cached; the table is immutable apart from that cache.
    """

    def __init__(
        self,
        landmark_ids: list[int],
        landmark_coords: np.ndarray,
        config: EmbedConfig,
        sentinel: int,
        hops_lookup=None,
    ):
        self.landmark_ids = list(landmark_ids)
        self.landmark_coords = landmark_coords
        self.config = config
        self.sentinel = sentinel
        self._hops_lookup = hops_lookup
        self.coords: dict[int, np.ndarray] = {
            lm: landmark_coords[i].copy() for i, lm in enumerate(landmark_ids)
        }
        self.flagged: set[int] = set()

    @property
    def dimensions(self) -> int:
        return self.config.dimensions

    def bounding_box(self) -> tuple[np.ndarray, np.ndarray]:
        return self.landmark_coords.min(axis=0), self.landmark_coords.max(axis=0)

    def __contains__(self, node: int) -> bool:
        return node in self.coords

    def get(self, node: int) -> np.ndarray | None:
        """Coordinates for node, computing them on demand when possible."""
        hit = self.coords.get(node)
        if hit is not None:
            return hit
        if self._hops_lookup is None:
            return None
        try:
            hops = self._hops_lookup(node)
        except Exception:
            return None
        coords, flagged = embed_node(
            np.asarray(hops),
            self.landmark_coords,
            self.config,
            node_seed=derive_seed(self.config.seed, 0xBEEF, node),
            sentinel=self.sentinel,
        )
        self.coords[node] = coords
        if flagged:
            self.flagged.add(node)
        return coords

    def materialize(self, nodes) -> None:
        for node in nodes:
            self.get(node)

    # Snapshot layout (little-endian):
    #   magic "QREM" | u16 version | u32 D | u64 L | u64 n | u64 seed
    #   u64 sentinel | L * u64 landmark ids | L*D f64 landmark coords
    #   n * u64 node ids | n*D f64 coords | u64 flagged count | flagged ids
    def save(self, path: str | Path) -> None:
        node_ids = [u for u in self.coords if u not in set(self.landmark_ids)]
        D = self.dimensions
        with open(path, "wb") as fh:
            fh.write(SNAPSHOT_MAGIC)
            fh.write(struct.pack("<HIQQQ", SNAPSHOT_VERSION, D, len(self.landmark_ids), len(node_ids), self.config.seed))
            fh.write(struct.pack("<Q", self.sentinel))
            fh.write(np.asarray(self.landmark_ids, dtype=np.uint64).tobytes())
            fh.write(np.ascontiguousarray(self.landmark_coords, dtype=np.float64).tobytes())
            fh.write(np.asarray(node_ids, dtype=np.uint64).tobytes())
            if node_ids:
                rows = np.vstack([self.coords[u] for u in node_ids])
                fh.write(np.ascontiguousarray(rows, dtype=np.float64).tobytes())
            flagged = sorted(self.flagged)
            fh.write(struct.pack("<Q", len(flagged)))
            fh.write(np.asarray(flagged, dtype=np.uint64).tobytes())

    @classmethod
    def load(cls, path: str | Path, hops_lookup=None) -> "EmbeddingTable":
        with open(path, "rb") as fh:
            magic = fh.read(4)
            if magic != SNAPSHOT_MAGIC:
                raise ConfigurationError(f"{path}: not an embedding snapshot")
            version, D, L, n, seed = struct.unpack("<HIQQQ", fh.read(30))
            if version != SNAPSHOT_VERSION:
                raise ConfigurationError(f"{path}: unsupported snapshot version {version}")
            (sentinel,) = struct.unpack("<Q", fh.read(8))
            lm_ids = np.frombuffer(fh.read(8 * L), dtype=np.uint64).astype(np.int64).tolist()
            lm_coords = np.frombuffer(fh.read(8 * L * D), dtype=np.float64).reshape(L, D).copy()
            node_ids = np.frombuffer(fh.read(8 * n), dtype=np.uint64).astype(np.int64).tolist()
            node_coords = np.frombuffer(fh.read(8 * n * D), dtype=np.float64).reshape(n, D).copy() if n else None
            (flagged_count,) = struct.unpack("<Q", fh.read(8))
            flagged = np.frombuffer(fh.read(8 * flagged_count), dtype=np.uint64).astype(np.int64).tolist()
        table = cls(lm_ids, lm_coords, EmbedConfig(dimensions=D, seed=seed), int(sentinel), hops_lookup)
        if node_coords is not None:
            for i, u in enumerate(node_ids):
                table.coords[u] = node_coords[i]
        table.flagged = set(flagged)
        return table


def build_embedding(landmark_index, config: EmbedConfig) -> EmbeddingTable:
    """Embed landmarks from an existing landmark index; nodes stay lazy."""
    hop_matrix = landmark_index.landmark_submatrix()
    coords = embed_landmarks(hop_matrix, config, sentinel=landmark_index.sentinel)
    return EmbeddingTable(
        landmark_index.landmarks,
        coords,
        config,
        landmark_index.sentinel,
        hops_lookup=landmark_index.landmark_distances,
    )
