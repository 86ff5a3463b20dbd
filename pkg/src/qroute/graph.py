"""In-memory directed graph with bi-directed adjacency storage.

Every node's entry keeps both its out- and in-neighbors so that traversals
can walk edges in either direction and so that a single key-value lookup
returns everything a query engine needs about a node.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

from .errors import NotFoundError, ParseError, PreconditionError


@dataclass
class AdjacencyEntry:
    """One node's stored record: label plus neighbor lists.

    Neighbor maps are insertion-ordered and de-duplicated (parallel edges
    collapse to one); values are optional edge labels.
    """

    node: int
    label: str | None = None
    out_neighbors: dict[int, str | None] = field(default_factory=dict)
    in_neighbors: dict[int, str | None] = field(default_factory=dict)

    def copy(self) -> "AdjacencyEntry":
        return AdjacencyEntry(
            node=self.node,
            label=self.label,
            out_neighbors=dict(self.out_neighbors),
            in_neighbors=dict(self.in_neighbors),
        )

    @property
    def degree(self) -> int:
        """Total degree: out-degree plus in-degree."""
        return len(self.out_neighbors) + len(self.in_neighbors)

    def undirected_neighbors(self) -> list[int]:
        """Distinct neighbors over the bi-directed view, insertion-ordered."""
        seen = dict(self.out_neighbors)
        for v in self.in_neighbors:
            if v not in seen:
                seen[v] = None
        return list(seen)


# Structural updates. A receipt lists every node whose entry changed, so
# downstream indexes know which rows to refresh.


@dataclass(frozen=True)
class AddNode:
    node: int
    label: str | None = None


@dataclass(frozen=True)
class AddEdge:
    src: int
    dst: int
    label: str | None = None


@dataclass(frozen=True)
class RemoveEdge:
    src: int
    dst: int


@dataclass(frozen=True)
class RemoveNode:
    node: int


GraphUpdate = AddNode | AddEdge | RemoveEdge | RemoveNode


class Graph:
    """Association node id -> AdjacencyEntry with symmetric edge bookkeeping."""

    def __init__(self) -> None:
        self.entries: dict[int, AdjacencyEntry] = {}
        self.edge_count = 0

    @property
    def node_count(self) -> int:
        return len(self.entries)

    def __contains__(self, node: int) -> bool:
        return node in self.entries

    def nodes(self) -> list[int]:
        return list(self.entries)

    def entry(self, node: int) -> AdjacencyEntry:
        try:
            return self.entries[node]
        except KeyError:
            raise NotFoundError(f"node {node} not in graph") from None

    def add_node(self, node: int, label: str | None = None) -> None:
        if node in self.entries:
            raise PreconditionError(f"node {node} already exists")
        self.entries[node] = AdjacencyEntry(node=node, label=label)

    def ensure_node(self, node: int) -> AdjacencyEntry:
        if node not in self.entries:
            self.entries[node] = AdjacencyEntry(node=node)
        return self.entries[node]

    def add_edge(self, src: int, dst: int, label: str | None = None) -> bool:
        """Insert a directed edge; returns False if it already existed."""
        if src not in self.entries or dst not in self.entries:
            raise PreconditionError(f"edge ({src},{dst}) references a missing node")
        out = self.entries[src].out_neighbors
        if dst in out:
            return False
        out[dst] = label
        self.entries[dst].in_neighbors[src] = label
        self.edge_count += 1
        return True

    def remove_edge(self, src: int, dst: int) -> bool:
        """Remove a directed edge; returns False if it was absent."""
        if src not in self.entries or dst not in self.entries:
            return False
        out = self.entries[src].out_neighbors
        if dst not in out:
            return False
        del out[dst]
        del self.entries[dst].in_neighbors[src]
        self.edge_count -= 1
        return True

    def apply_update(self, update: GraphUpdate) -> set[int]:
        """Apply one structural update; returns the set of changed nodes.

        Node deletion is carried out as deletion of every incident edge
        followed by removal of the entry itself, so the receipt covers all
        former neighbors. Entries are replaced copy-on-write: references
        held by caches or snapshots never mutate underneath the holder.
        """
        if isinstance(update, AddNode):
            self.add_node(update.node, update.label)
            return {update.node}
        if isinstance(update, AddEdge):
            self._rewrite(update.src)
            self._rewrite(update.dst)
            if self.add_edge(update.src, update.dst, update.label):
                return {update.src, update.dst}
            return set()
        if isinstance(update, RemoveEdge):
            if update.src not in self.entries or update.dst not in self.entries:
                return set()
            self._rewrite(update.src)
            self._rewrite(update.dst)
            if self.remove_edge(update.src, update.dst):
                return {update.src, update.dst}
            return set()
        if isinstance(update, RemoveNode):
            if update.node not in self.entries:
                return set()
            entry = self.entries[update.node]
            affected = {update.node}
            for dst in list(entry.out_neighbors):
                self._rewrite(dst)
                self.remove_edge(update.node, dst)
                affected.add(dst)
            for src in list(entry.in_neighbors):
                self._rewrite(src)
                self.remove_edge(src, update.node)
                affected.add(src)
            del self.entries[update.node]
            return affected
        raise TypeError(f"unknown update type: {update!r}")

    def _rewrite(self, node: int) -> None:
        # Copy-on-write: future mutations of this entry must not be visible
        # through previously handed-out references.
        if node in self.entries:
            self.entries[node] = self.entries[node].copy()

    def structurally_equal(self, other: "Graph") -> bool:
        if self.node_count != other.node_count or self.edge_count != other.edge_count:
            return False
        for node, entry in self.entries.items():
            if node not in other.entries:
                return False
            oe = other.entries[node]
            if entry.label != oe.label:
                return False
            if entry.out_neighbors != oe.out_neighbors:
                return False
            if entry.in_neighbors != oe.in_neighbors:
                return False
        return True


def load_edge_list(path: str | Path, has_labels: bool = False) -> Graph:
    """Load a whitespace-separated edge list: "src dst" or "src dst label".

    Lines starting with '#' and blank lines are ignored. Duplicate edges
    collapse to one; self-loops are kept. An empty file yields an empty graph.
    """
    graph = Graph()
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if len(parts) == 2:
                src_s, dst_s = parts
                label = None
            elif len(parts) == 3 and has_labels:
                src_s, dst_s, label = parts
            else:
                raise ParseError(f"expected 'src dst{' [label]' if has_labels else ''}', got {line!r}", lineno)
            try:
                src, dst = int(src_s), int(dst_s)
            except ValueError:
                raise ParseError(f"non-integer node id in {line!r}", lineno) from None
            if src < 0 or dst < 0:
                raise ParseError(f"negative node id in {line!r}", lineno)
            graph.ensure_node(src)
            graph.ensure_node(dst)
            graph.add_edge(src, dst, label)
    return graph


def load_node_labels(path: str | Path, graph: Graph) -> int:
    """Apply a "node_id label" file to an existing graph; returns rows applied."""
    applied = 0
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split(maxsplit=1)
            if len(parts) != 2:
                raise ParseError(f"expected 'node_id label', got {line!r}", lineno)
            try:
                node = int(parts[0])
            except ValueError:
                raise ParseError(f"non-integer node id in {line!r}", lineno) from None
            if node not in graph:
                raise ParseError(f"label for unknown node {node}", lineno)
            graph.entries[node] = graph.entries[node].copy()
            graph.entries[node].label = parts[1]
            applied += 1
    return applied
