"""Independent reference models used as test oracles."""

from collections import deque


class ReferenceLru:
    """Dumb byte-budgeted LRU: list for recency, dict for sizes."""

    def __init__(self, capacity):
        self.capacity = capacity
        self.order = []  # LRU first
        self.sizes = {}

    def get(self, key):
        if self.capacity == 0 or key not in self.sizes:
            return False
        self.order.remove(key)
        self.order.append(key)
        return True

    def put(self, key, size):
        if self.capacity == 0 or size > self.capacity:
            return
        if key in self.sizes:
            self.order.remove(key)
            del self.sizes[key]
        while sum(self.sizes.values()) + size > self.capacity:
            evicted = self.order.pop(0)
            del self.sizes[evicted]
        self.order.append(key)
        self.sizes[key] = size

    @property
    def current(self):
        return sum(self.sizes.values())


def oracle_ball_out(graph, source, h):
    """All nodes within h hops over out-edges, including the source."""
    dist = {source: 0}
    frontier = deque([source])
    while frontier:
        u = frontier.popleft()
        if dist[u] == h:
            continue
        for v in graph.entry(u).out_neighbors:
            if v not in dist:
                dist[v] = dist[u] + 1
                frontier.append(v)
    return dist


def oracle_reachable(graph, source, target, h):
    """Forward-only BFS to depth h."""
    if source == target:
        return True
    return target in oracle_ball_out(graph, source, h)
