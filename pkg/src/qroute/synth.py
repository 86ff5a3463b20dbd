"""Synthetic graph generators for desk-scale experiments.

Real datasets at the scale the routing schemes target are far too large
for tests, so experiments run on generated graphs: 2D grids, uniform
random digraphs, and preferential-attachment power-law graphs. Power-law
and grid graphs store every edge in both directions (social-network
style); the random generator can produce genuinely asymmetric digraphs.
"""

from __future__ import annotations

import random

from .errors import ConfigurationError
from .graph import Graph


def grid_graph(width: int, height: int) -> Graph:
    """4-neighbor grid with symmetric edges; node id = row * width + col."""
    graph = Graph()
    for node in range(width * height):
        graph.ensure_node(node)
    for row in range(height):
        for col in range(width):
            node = row * width + col
            if col + 1 < width:
                graph.add_edge(node, node + 1)
                graph.add_edge(node + 1, node)
            if row + 1 < height:
                graph.add_edge(node, node + width)
                graph.add_edge(node + width, node)
    return graph


def random_graph(num_nodes: int, num_edges: int, seed: int = 0, symmetric: bool = False) -> Graph:
    """Uniform random digraph with num_edges distinct directed edges."""
    if num_nodes < 2:
        raise ConfigurationError("random graph needs at least 2 nodes")
    rng = random.Random(seed)
    graph = Graph()
    for node in range(num_nodes):
        graph.ensure_node(node)
    added = 0
    while added < num_edges:
        src = rng.randrange(num_nodes)
        dst = rng.randrange(num_nodes)
        if src == dst:
            continue
        if graph.add_edge(src, dst):
            added += 1
            if symmetric:
                graph.add_edge(dst, src)
    return graph


def powerlaw_graph(num_nodes: int, edges_per_node: int = 4, seed: int = 0, symmetric: bool = True) -> Graph:
    """Preferential attachment: each new node attaches to m degree-biased targets.

    The attachment-list trick gives degree-proportional sampling without
    bookkeeping. The result is connected with a heavy-tailed degree
    distribution.
    """
    m = edges_per_node
    if num_nodes < m + 1:
        raise ConfigurationError(f"power-law graph needs more than {m} nodes")
    rng = random.Random(seed)
    graph = Graph()
    attachment: list[int] = []
    for node in range(m + 1):
        graph.ensure_node(node)
    for node in range(m + 1):
        for other in range(m + 1):
            if node < other:
                graph.add_edge(node, other)
                if symmetric:
                    graph.add_edge(other, node)
                attachment.extend((node, other))
    for node in range(m + 1, num_nodes):
        graph.ensure_node(node)
        targets: set[int] = set()
        while len(targets) < m:
            targets.add(attachment[rng.randrange(len(attachment))])
        for target in sorted(targets):
            graph.add_edge(node, target)
            if symmetric:
                graph.add_edge(target, node)
            attachment.extend((node, target))
    return graph


def spatial_powerlaw_graph(
    num_nodes: int,
    edges_per_node: int = 2,
    seed: int = 0,
    symmetric: bool = True,
    aspect: float = 1.0,
) -> Graph:
    """Spatially clustered preferential attachment on a torus.

    Every node gets a random 2D position; a new node attaches to
    degree-biased picks among its spatially nearest existing nodes. The
    result keeps the heavy-tailed degree distribution of preferential
    attachment but, like web and social graphs whose links cluster within
    sites and communities, has genuine topology locality: hop distance
    grows with spatial distance instead of collapsing to a tiny diameter.

    aspect stretches the world to aspect x 1/aspect, raising the hop
    diameter at a fixed node count (deep-crawl-like geometry); 1.0 keeps
    the unit square.
    """
    m = edges_per_node
    if num_nodes < m + 1:
        raise ConfigurationError(f"spatial power-law graph needs more than {m} nodes")
    if aspect < 1.0:
        raise ConfigurationError("aspect must be >= 1")
    rng = random.Random(seed)
    graph = Graph()
    width, height = aspect, 1.0 / aspect
    base = max(1.0, (num_nodes / 8) ** 0.5)  # ~8 nodes per cell when full
    nx = max(1, int(base * aspect))
    ny = max(1, int(base / aspect))
    cells: dict[tuple[int, int], list[int]] = {}
    min_pool = max(3 * m, 12)

    # Nodes are wired in x-sweep order so every attachment is short-range;
    # a growth order that starts sparse would lace the world with long
    # "expressway" edges and collapse the hop diameter.
    positions = sorted(((rng.random() * width, rng.random() * height) for _ in range(num_nodes)))
    degree = [0] * num_nodes

    def torus_d2(a: tuple[float, float], b: tuple[float, float]) -> float:
        dx = abs(a[0] - b[0])
        dy = abs(a[1] - b[1])
        dx = min(dx, width - dx)
        dy = min(dy, height - dy)
        return dx * dx + dy * dy

    for node in range(num_nodes):
        pos = positions[node]
        graph.ensure_node(node)
        cx, cy = min(nx - 1, int(pos[0] / width * nx)), min(ny - 1, int(pos[1] / height * ny))
        if node > 0:
            if node <= 4 * min_pool:
                candidates = list(range(node))
            else:
                # Expand rings of grid cells until enough candidates are seen.
                candidates = []
                ring = 0
                while len(candidates) < 4 * min_pool and ring <= nx + ny:
                    for dx in range(-ring, ring + 1):
                        for dy in range(-ring, ring + 1):
                            if max(abs(dx), abs(dy)) != ring:
                                continue
                            candidates.extend(cells.get(((cx + dx) % nx, (cy + dy) % ny), ()))
                    ring += 1
            candidates.sort(key=lambda u: torus_d2(pos, positions[u]))
            # Nearest nodes plus the strongest hubs of the wider vicinity:
            # regional hubs keep attracting links as they grow, which is
            # what gives the degree distribution its heavy tail.
            pool = candidates[:min_pool]
            hubs = sorted(candidates[min_pool : 4 * min_pool], key=lambda u: -degree[u])[: min_pool // 2]
            pool = pool + hubs
            weights = [degree[u] + 1 for u in pool]
            targets: set[int] = set()
            want = min(m, len(pool))
            while len(targets) < want:
                targets.add(rng.choices(pool, weights=weights)[0])
            for target in sorted(targets):
                graph.add_edge(node, target)
                if symmetric:
                    graph.add_edge(target, node)
                degree[node] += 1
                degree[target] += 1
        cells.setdefault((cx, cy), []).append(node)
    return graph


def parse_graph_spec(spec: str, seed: int = 0) -> Graph:
    """Build a graph from a spec string.

    Formats: "grid:WxH", "random:N:E[:sym]", "powerlaw:N:M",
    "spatial-powerlaw:N:M".
    """
    parts = spec.split(":")
    kind = parts[0]
    try:
        if kind == "grid":
            width, height = parts[1].split("x")
            return grid_graph(int(width), int(height))
        if kind == "random":
            symmetric = len(parts) > 3 and parts[3] == "sym"
            return random_graph(int(parts[1]), int(parts[2]), seed=seed, symmetric=symmetric)
        if kind == "powerlaw":
            m = int(parts[2]) if len(parts) > 2 else 4
            return powerlaw_graph(int(parts[1]), m, seed=seed)
        if kind == "spatial-powerlaw":
            m = int(parts[2]) if len(parts) > 2 else 2
            aspect = float(parts[3]) if len(parts) > 3 else 1.0
            return spatial_powerlaw_graph(int(parts[1]), m, seed=seed, aspect=aspect)
    except (IndexError, ValueError) as exc:
        raise ConfigurationError(f"bad graph spec {spec!r}: {exc}") from exc
    raise ConfigurationError(f"unknown graph kind {kind!r} (grid | random | powerlaw | spatial-powerlaw)")
