import io

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qroute import wire
from qroute.errors import NotFoundError, PreconditionError, TransportError
from qroute.graph import AddEdge, AddNode, AdjacencyEntry, RemoveEdge, RemoveNode
from qroute.queries import (
    AggregationResult,
    Query,
    QueryKind,
    QueryResult,
    RandomWalkResult,
    ReachabilityResult,
)


def test_varint_round_trip_values():
    for value in (0, 1, 127, 128, 300, 2**32, 2**63 - 1):
        buf = io.BytesIO()
        wire.write_varint(buf, value)
        buf.seek(0)
        assert wire.read_varint(buf) == value


@given(st.integers(0, 2**63 - 1))
def test_varint_round_trip_property(value):
    buf = io.BytesIO()
    wire.write_varint(buf, value)
    buf.seek(0)
    assert wire.read_varint(buf) == value


def test_varint_rejects_negative():
    with pytest.raises(ValueError):
        wire.write_varint(io.BytesIO(), -1)


def test_varint_truncated():
    with pytest.raises(TransportError):
        wire.read_varint(io.BytesIO(b"\x80"))


labels = st.one_of(st.none(), st.text(min_size=0, max_size=8))


@settings(max_examples=100)
@given(
    st.integers(0, 2**40),
    labels,
    st.dictionaries(st.integers(0, 2**40), labels, max_size=12),
    st.dictionaries(st.integers(0, 2**40), labels, max_size=12),
)
def test_adjacency_round_trip(node, label, out_n, in_n):
    entry = AdjacencyEntry(node=node, label=label, out_neighbors=out_n, in_neighbors=in_n)
    payload = wire.encode_adjacency(entry)
    decoded = wire.decode_adjacency(payload, node)
    assert decoded.node == node
    assert decoded.label == label
    assert decoded.out_neighbors == out_n
    assert decoded.in_neighbors == in_n
    # bit-exact re-encoding
    assert wire.encode_adjacency(decoded) == payload


def test_adjacency_empty_label_distinct_from_none():
    entry = AdjacencyEntry(node=1, label="", out_neighbors={2: ""})
    decoded = wire.decode_adjacency(wire.encode_adjacency(entry), 1)
    assert decoded.label == ""
    assert decoded.out_neighbors[2] == ""


@pytest.mark.parametrize(
    "update",
    [
        AddNode(5),
        AddNode(5, label="entity"),
        AddEdge(1, 2),
        AddEdge(1, 2, label="follows"),
        RemoveEdge(3, 4),
        RemoveNode(9),
    ],
)
def test_update_round_trip(update):
    payload = wire.encode_update(update)
    assert wire.decode_update(payload) == update
    assert wire.encode_update(wire.decode_update(payload)) == payload


def test_receipt_round_trip():
    receipt = {5, 1, 300}
    assert wire.decode_receipt(wire.encode_receipt(receipt)) == receipt


def query_cases():
    return [
        Query(QueryKind.AGGREGATION, source=7, h=2, query_id=1),
        Query(QueryKind.AGGREGATION, source=7, h=2, label_filter="blue", query_id=2),
        Query(QueryKind.RANDOM_WALK, source=3, h=9, restart_prob=0.25, seed=99, query_id=3),
        Query(QueryKind.REACHABILITY, source=3, h=4, target=11, query_id=4),
    ]


@pytest.mark.parametrize("query", query_cases())
def test_query_round_trip(query):
    payload = wire.encode_query(query)
    decoded = wire.decode_query(payload)
    assert decoded == query
    assert wire.encode_query(decoded) == payload


@pytest.mark.parametrize(
    "result",
    [
        QueryResult(QueryKind.AGGREGATION, AggregationResult(42), 10, 3, 123.5),
        QueryResult(QueryKind.RANDOM_WALK, RandomWalkResult(7, ((5, 2), (7, 1))), 2, 1, 50.0),
        QueryResult(QueryKind.REACHABILITY, ReachabilityResult(True), 0, 2, 25.25),
        QueryResult(QueryKind.REACHABILITY, ReachabilityResult(False), 1, 1, 0.0),
    ],
)
def test_result_round_trip(result):
    payload = wire.encode_query_result(result)
    decoded = wire.decode_query_result(payload)
    assert decoded == result
    assert wire.encode_query_result(decoded) == payload


def test_error_round_trip_and_raise():
    payload = wire.encode_error(wire.ERR_NOT_FOUND, "node 9 missing")
    assert wire.decode_error(payload) == (wire.ERR_NOT_FOUND, "node 9 missing")
    with pytest.raises(NotFoundError):
        wire.raise_for_error(payload)
    with pytest.raises(PreconditionError):
        wire.raise_for_error(wire.encode_error(wire.ERR_PRECONDITION, "bad"))
    with pytest.raises(TransportError):
        wire.raise_for_error(wire.encode_error(wire.ERR_MALFORMED, "junk"))


def test_frame_layout_exact_bytes():
    frame = wire.pack_frame(wire.OP_GET_ADJ, (258).to_bytes(8, "big"))
    # 4-byte big-endian payload length, 1-byte opcode, payload
    assert frame[:4] == (8).to_bytes(4, "big")
    assert frame[4] == 0x01
    assert frame[5:] == (258).to_bytes(8, "big")


def test_frame_size_limit():
    with pytest.raises(TransportError):
        wire.pack_frame(wire.OP_QUERY, b"x" * (wire.MAX_FRAME_BYTES + 1))
