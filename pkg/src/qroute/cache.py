"""Byte-budgeted LRU cache for adjacency entries."""

from __future__ import annotations

from collections import OrderedDict

from .graph import AdjacencyEntry

# Per-entry accounting: fixed bookkeeping overhead, 8 bytes per neighbor id,
# plus the UTF-8 length of every stored label.
ENTRY_OVERHEAD_BYTES = 64


def entry_size(entry: AdjacencyEntry) -> int:
    size = ENTRY_OVERHEAD_BYTES
    size += 8 * (len(entry.out_neighbors) + len(entry.in_neighbors))
    if entry.label:
        size += len(entry.label.encode("utf-8"))
    for label in entry.out_neighbors.values():
        if label:
            size += len(label.encode("utf-8"))
    for label in entry.in_neighbors.values():
        if label:
            size += len(label.encode("utf-8"))
    return size


class LruCache:
    """LRU over adjacency entries with a byte capacity.

    Capacity 0 is no-cache mode: every lookup misses and nothing is ever
    stored, so there is no maintenance cost. An entry larger than the whole
    capacity is never admitted.
    """

    def __init__(self, capacity_bytes: int):
        if capacity_bytes < 0:
            raise ValueError("capacity_bytes must be >= 0")
        self.capacity_bytes = capacity_bytes
        self.current_bytes = 0
        self._entries: OrderedDict[int, tuple[AdjacencyEntry, int]] = OrderedDict()
        self.evictions = 0

    def __len__(self) -> int:
        return len(self._entries)

    def __contains__(self, node: int) -> bool:
        return node in self._entries

    def get(self, node: int) -> AdjacencyEntry | None:
        if self.capacity_bytes == 0:
            return None
        hit = self._entries.get(node)
        if hit is None:
            return None
        self._entries.move_to_end(node)
        return hit[0]

    def put(self, node: int, entry: AdjacencyEntry) -> None:
        if self.capacity_bytes == 0:
            return
        size = entry_size(entry)
        if size > self.capacity_bytes:
            return
        old = self._entries.pop(node, None)
        if old is not None:
            self.current_bytes -= old[1]
        while self.current_bytes + size > self.capacity_bytes:
            _, (_, evicted_size) = self._entries.popitem(last=False)
            self.current_bytes -= evicted_size
            self.evictions += 1
        self._entries[node] = (entry, size)
        self.current_bytes += size

    def invalidate(self, node: int) -> None:
        old = self._entries.pop(node, None)
        if old is not None:
            self.current_bytes -= old[1]

    def clear(self) -> None:
        self._entries.clear()
        self.current_bytes = 0

    def keys(self) -> list[int]:
        """Node ids in LRU-to-MRU order."""
        return list(self._entries)
