import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qroute.errors import NotFoundError, ParseError, PreconditionError
from qroute.graph import AddEdge, AddNode, Graph, RemoveEdge, RemoveNode, load_edge_list, load_node_labels


def write_edges(tmp_path, lines, name="g.edges"):
    path = tmp_path / name
    path.write_text("\n".join(lines) + ("\n" if lines else ""))
    return path


def test_load_basic_path(tmp_path):
    g = load_edge_list(write_edges(tmp_path, ["1 2", "2 3"]))
    assert g.node_count == 3
    assert g.edge_count == 2
    assert list(g.entry(2).in_neighbors) == [1]
    assert list(g.entry(2).out_neighbors) == [3]


def test_load_empty_file(tmp_path):
    g = load_edge_list(write_edges(tmp_path, []))
    assert g.node_count == 0
    assert g.edge_count == 0


def test_load_duplicate_edges_collapse(tmp_path):
    g = load_edge_list(write_edges(tmp_path, ["1 2", "1 2"]))
    # brute-force recount from the file contents as a set of pairs
    pairs = {(1, 2)}
    assert g.edge_count == len(pairs)
    assert list(g.entry(1).out_neighbors) == [2]


def test_load_comments_and_blank_lines(tmp_path):
    g = load_edge_list(write_edges(tmp_path, ["# header", "", "5 6"]))
    assert g.node_count == 2
    assert g.edge_count == 1


def test_load_self_loop_kept(tmp_path):
    g = load_edge_list(write_edges(tmp_path, ["4 4"]))
    assert g.edge_count == 1
    assert 4 in g.entry(4).out_neighbors
    assert 4 in g.entry(4).in_neighbors


def test_load_malformed_line_reports_number(tmp_path):
    path = write_edges(tmp_path, ["1 2", "oops"])
    with pytest.raises(ParseError) as err:
        load_edge_list(path)
    assert err.value.line_number == 2


def test_load_labels_flag(tmp_path):
    path = write_edges(tmp_path, ["1 2 follows"])
    g = load_edge_list(path, has_labels=True)
    assert g.entry(1).out_neighbors[2] == "follows"
    with pytest.raises(ParseError):
        load_edge_list(path, has_labels=False)


def test_node_label_file(tmp_path):
    g = load_edge_list(write_edges(tmp_path, ["1 2"]))
    labels = tmp_path / "labels.txt"
    labels.write_text("1 person\n2 company\n")
    assert load_node_labels(labels, g) == 2
    assert g.entry(1).label == "person"


def test_symmetry_invariant(tmp_path):
    g = load_edge_list(write_edges(tmp_path, ["1 2", "2 3", "3 1", "1 3"]))
    for u, entry in g.entries.items():
        for v in entry.out_neighbors:
            assert u in g.entry(v).in_neighbors
        for v in entry.in_neighbors:
            assert u in g.entry(v).out_neighbors


def test_loader_idempotent(tmp_path):
    path = write_edges(tmp_path, ["1 2", "2 3", "3 1"])
    assert load_edge_list(path).structurally_equal(load_edge_list(path))


@settings(max_examples=50)
@given(st.lists(st.tuples(st.integers(0, 30), st.integers(0, 30)), max_size=60))
def test_loader_idempotence_property(tmp_path_factory, edges):
    tmp = tmp_path_factory.mktemp("idem")
    path = tmp / "g.edges"
    path.write_text("".join(f"{a} {b}\n" for a, b in edges))
    g1, g2 = load_edge_list(path), load_edge_list(path)
    assert g1.structurally_equal(g2)
    # symmetry holds for every edge
    for u, entry in g1.entries.items():
        for v in entry.out_neighbors:
            assert u in g1.entry(v).in_neighbors


class TestApplyUpdate:
    def graph(self):
        g = Graph()
        for n in (1, 2, 3):
            g.ensure_node(n)
        g.add_edge(1, 2)
        g.add_edge(2, 3)
        return g

    def test_add_edge_receipt(self):
        g = self.graph()
        receipt = g.apply_update(AddEdge(1, 3))
        assert receipt == {1, 3}
        assert list(g.entry(3).in_neighbors) == [2, 1]

    def test_remove_node_removes_incident_edges(self):
        g = self.graph()
        receipt = g.apply_update(RemoveNode(2))
        assert receipt == {1, 2, 3}
        assert 2 not in g
        assert g.edge_count == 0
        assert 2 not in g.entry(1).out_neighbors
        assert 2 not in g.entry(3).in_neighbors

    def test_remove_absent_edge_is_noop(self):
        g = self.graph()
        assert g.apply_update(RemoveEdge(5, 6)) == set()
        assert g.apply_update(RemoveEdge(1, 3)) == set()
        assert g.edge_count == 2

    def test_add_edge_missing_endpoint(self):
        g = self.graph()
        with pytest.raises(PreconditionError):
            g.apply_update(AddEdge(1, 99))

    def test_add_node_taken_id(self):
        g = self.graph()
        with pytest.raises(PreconditionError):
            g.apply_update(AddNode(1))

    def test_add_node(self):
        g = self.graph()
        assert g.apply_update(AddNode(9, label="x")) == {9}
        assert g.entry(9).label == "x"

    def test_copy_on_write_preserves_held_entries(self):
        g = self.graph()
        held = g.entry(1)
        g.apply_update(AddEdge(1, 3))
        assert 3 not in held.out_neighbors
        assert 3 in g.entry(1).out_neighbors

    def test_missing_node_lookup(self):
        with pytest.raises(NotFoundError):
            self.graph().entry(999)
