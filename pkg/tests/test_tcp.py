import pytest

from qroute.errors import NotFoundError, PreconditionError
from qroute.graph import AddEdge, RemoveNode
from qroute.processor import CostModel
from qroute.queries import Query, QueryKind
from qroute.storage import StoragePartitionMap, StorageTier
from qroute.synth import random_graph
from qroute.tcp import StorageClient, StorageServerTCP, TcpCluster


@pytest.fixture
def tier():
    graph = random_graph(60, 240, seed=6)
    return StorageTier(graph, StoragePartitionMap(2))


@pytest.fixture
def storage_cluster(tier):
    servers = [StorageServerTCP(tier, i) for i in range(2)]
    for s in servers:
        s.start()
    client = StorageClient([s.port for s in servers], tier.partition_map)
    yield tier, client
    client.close()
    for s in servers:
        s.stop()


def test_get_adjacency_over_tcp(storage_cluster):
    tier, client = storage_cluster
    for node in (0, 1, 17, 42):
        remote = client.get(node)
        local = tier.get(node)
        assert remote.node == local.node
        assert remote.out_neighbors == local.out_neighbors
        assert remote.in_neighbors == local.in_neighbors


def test_get_missing_node_raises_not_found(storage_cluster):
    _, client = storage_cluster
    with pytest.raises(NotFoundError):
        client.get(999_999)


def test_wrong_partition_rejected(storage_cluster):
    tier, client = storage_cluster
    # ask server 0 for a node owned by server 1
    node = next(n for n in tier.graph.entries if tier.partition_map.server_of(n) == 1)
    from qroute import wire

    sock = client._socks[0]
    wire.send_frame(sock, wire.OP_GET_ADJ, node.to_bytes(8, "big"))
    opcode, payload = wire.recv_frame(sock)
    assert opcode == wire.OP_ERROR
    with pytest.raises(PreconditionError):
        wire.raise_for_error(payload)


def test_update_over_tcp(storage_cluster):
    tier, client = storage_cluster
    src = 0
    dst = next(n for n in tier.graph.entries if n not in tier.graph.entry(src).out_neighbors and n != src)
    receipt = client.apply_update(AddEdge(src, dst))
    assert receipt == {src, dst}
    assert dst in client.get(src).out_neighbors

    receipt = client.apply_update(RemoveNode(dst))
    assert dst in receipt
    with pytest.raises(NotFoundError):
        client.get(dst)


def test_processor_cluster_runs_queries(tier):
    cluster = TcpCluster(tier, num_processors=2, cache_bytes=1 << 20, cost_model=CostModel())
    try:
        result = cluster.executors[0].execute(Query(QueryKind.AGGREGATION, source=0, h=2, query_id=1))
        again = cluster.executors[0].execute(Query(QueryKind.AGGREGATION, source=0, h=2, query_id=2))
        assert result.payload == again.payload
        assert result.cache_misses == result.fetches  # cold
        assert again.cache_hits == again.fetches  # warm
        assert result.elapsed_us > again.elapsed_us
    finally:
        cluster.close()


def test_processor_cluster_propagates_not_found(tier):
    cluster = TcpCluster(tier, num_processors=1, cache_bytes=0, cost_model=CostModel())
    try:
        with pytest.raises(NotFoundError):
            cluster.executors[0].execute(Query(QueryKind.AGGREGATION, source=777_777, h=1, query_id=1))
    finally:
        cluster.close()
