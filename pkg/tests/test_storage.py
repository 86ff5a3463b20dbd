import pytest

from qroute.errors import NotFoundError
from qroute.graph import AddEdge, Graph, RemoveNode
from qroute.storage import StoragePartitionMap, StorageTier
from qroute.synth import random_graph


def small_tier(num_servers=4):
    g = Graph()
    for n in range(10):
        g.ensure_node(n)
    g.add_edge(1, 2)
    g.add_edge(2, 3)
    return StorageTier(g, StoragePartitionMap(num_servers))


def test_get_returns_owning_partition_entry():
    tier = small_tier()
    entry = tier.get(2)
    assert list(entry.in_neighbors) == [1]
    assert list(entry.out_neighbors) == [3]


def test_unknown_node_not_found():
    tier = small_tier()
    with pytest.raises(NotFoundError):
        tier.get(999)


def test_modulo_partition_placement():
    tier = small_tier(num_servers=4)
    # node 8 -> server 0 under modulo partitioning
    assert tier.partition_map.server_of(8) == 0
    assert 8 in tier.partitions[0].entries


def test_request_counter_increments():
    tier = small_tier()
    owner = tier.partition_map.server_of(5)
    before = tier.partitions[owner].request_count
    tier.get(5)
    assert tier.partitions[owner].request_count == before + 1
    assert tier.total_requests >= 1


def test_partition_totality_and_counts():
    g = random_graph(200, 600, seed=3)
    tier = StorageTier(g, StoragePartitionMap(5))
    for node in g.entries:
        served = tier.get(node)
        assert served.node == node
    assert sum(tier.stored_counts()) == g.node_count


def test_update_reshards_changed_entries():
    tier = small_tier()
    receipt = tier.apply_update(AddEdge(1, 3))
    assert receipt == {1, 3}
    assert 3 in tier.get(1).out_neighbors

    receipt = tier.apply_update(RemoveNode(2))
    assert receipt == {1, 2, 3}
    with pytest.raises(NotFoundError):
        tier.get(2)
    assert sum(tier.stored_counts()) == 9


def test_custom_partition_fn():
    g = Graph()
    for n in range(6):
        g.ensure_node(n)
    tier = StorageTier(g, StoragePartitionMap(2, partition_fn=lambda node: 1 if node >= 3 else 0))
    assert tier.stored_counts() == [3, 3]
    assert tier.get(5).node == 5
