"""Length-prefixed binary wire protocol.

Frame layout (all multi-byte integers big-endian):

    +----------------+--------+-------------------------+
    | payload length | opcode | payload                 |
    | u32            | u8     | `payload length` bytes  |
    +----------------+--------+-------------------------+

The length counts only the payload, not the opcode byte.

Opcodes:
    0x01 GET_ADJ      payload: u64 node id
    0x81 ADJ_RESP     payload: adjacency entry (below)
    0x02 UPDATE       payload: graph update (below)
    0x82 UPDATE_ACK   payload: varint count, count * u64 affected node ids
    0x10 QUERY        payload: query (below)
    0x90 QUERY_ACK    payload: query result (below)
    0x7F ERROR        payload: u8 error code, varint length, UTF-8 message
                      codes: 1 not-found, 2 precondition, 3 malformed frame

Varints are unsigned LEB128: 7 value bits per byte, high bit set on all
but the last byte.

ADJ_RESP payload:
    varint n_out, varint n_in,
    n_out * u64 out-neighbor ids, n_in * u64 in-neighbor ids,
    label block: node label, then one label per out-neighbor, then one per
    in-neighbor, each encoded as varint (byte length + 1) followed by the
    UTF-8 bytes; length 0 means "no label".

UPDATE payload:
    u8 kind (1 add-node, 2 add-edge, 3 remove-edge, 4 remove-node), then
    1: u64 node, label
    2: u64 src, u64 dst, label
    3: u64 src, u64 dst
    4: u64 node
    (labels use the same varint encoding as above)

QUERY payload:
    u8 kind (1 aggregation, 2 random-walk, 3 reachability),
    u64 query id, u64 source, varint h, u64 seed,
    u8 flags (bit0: label filter follows, bit1: restart prob follows,
    bit2: target follows), then in that order: label, f64 restart
    probability, u64 target.

QUERY_ACK payload:
    u8 kind, result body, varint hits, varint misses, f64 elapsed micros.
    Bodies: aggregation = varint count; random walk = u64 terminal,
    varint n, n * (u64 node, varint count) visit multiset in ascending
    node order; reachability = u8 bool.
"""

from __future__ import annotations

import io
import socket
import struct

from .errors import NotFoundError, PreconditionError, TransportError
from .graph import AddEdge, AddNode, AdjacencyEntry, GraphUpdate, RemoveEdge, RemoveNode
from .queries import (
    AggregationResult,
    Query,
    QueryKind,
    QueryResult,
    RandomWalkResult,
    ReachabilityResult,
)

OP_GET_ADJ = 0x01
OP_ADJ_RESP = 0x81
OP_UPDATE = 0x02
OP_UPDATE_ACK = 0x82
OP_QUERY = 0x10
OP_QUERY_ACK = 0x90
OP_ERROR = 0x7F

ERR_NOT_FOUND = 1
ERR_PRECONDITION = 2
ERR_MALFORMED = 3

MAX_FRAME_BYTES = 64 * 1024 * 1024

_QUERY_KIND_CODE = {QueryKind.AGGREGATION: 1, QueryKind.RANDOM_WALK: 2, QueryKind.REACHABILITY: 3}
_QUERY_KIND_FROM = {v: k for k, v in _QUERY_KIND_CODE.items()}


# -- primitives -------------------------------------------------------------


def write_varint(buf: io.BytesIO, value: int) -> None:
    if value < 0:
        raise ValueError("varints are unsigned")
    while True:
        byte = value & 0x7F
        value >>= 7
        if value:
            buf.write(bytes((byte | 0x80,)))
        else:
            buf.write(bytes((byte,)))
            return


def read_varint(buf: io.BytesIO) -> int:
    shift = 0
    value = 0
    while True:
        raw = buf.read(1)
        if not raw:
            raise TransportError("truncated varint")
        byte = raw[0]
        value |= (byte & 0x7F) << shift
        if not byte & 0x80:
            return value
        shift += 7
        if shift > 63:
            raise TransportError("varint too long")


def _write_label(buf: io.BytesIO, label: str | None) -> None:
    if label is None:
        write_varint(buf, 0)
    else:
        data = label.encode("utf-8")
        write_varint(buf, len(data) + 1)
        buf.write(data)


def _read_label(buf: io.BytesIO) -> str | None:
    n = read_varint(buf)
    if n == 0:
        return None
    data = buf.read(n - 1)
    if len(data) != n - 1:
        raise TransportError("truncated label")
    return data.decode("utf-8")


def _write_u64(buf: io.BytesIO, value: int) -> None:
    buf.write(struct.pack(">Q", value))


def _read_u64(buf: io.BytesIO) -> int:
    data = buf.read(8)
    if len(data) != 8:
        raise TransportError("truncated u64")
    return struct.unpack(">Q", data)[0]


# -- payload codecs ----------------------------------------------------------


def encode_adjacency(entry: AdjacencyEntry) -> bytes:
    buf = io.BytesIO()
    write_varint(buf, len(entry.out_neighbors))
    write_varint(buf, len(entry.in_neighbors))
    for node in entry.out_neighbors:
        _write_u64(buf, node)
    for node in entry.in_neighbors:
        _write_u64(buf, node)
    _write_label(buf, entry.label)
    for label in entry.out_neighbors.values():
        _write_label(buf, label)
    for label in entry.in_neighbors.values():
        _write_label(buf, label)
    return buf.getvalue()


def decode_adjacency(payload: bytes, node: int) -> AdjacencyEntry:
    buf = io.BytesIO(payload)
    n_out = read_varint(buf)
    n_in = read_varint(buf)
    out_ids = [_read_u64(buf) for _ in range(n_out)]
    in_ids = [_read_u64(buf) for _ in range(n_in)]
    label = _read_label(buf)
    out_labels = [_read_label(buf) for _ in range(n_out)]
    in_labels = [_read_label(buf) for _ in range(n_in)]
    return AdjacencyEntry(
        node=node,
        label=label,
        out_neighbors=dict(zip(out_ids, out_labels)),
        in_neighbors=dict(zip(in_ids, in_labels)),
    )


def encode_update(update: GraphUpdate) -> bytes:
    buf = io.BytesIO()
    if isinstance(update, AddNode):
        buf.write(bytes((1,)))
        _write_u64(buf, update.node)
        _write_label(buf, update.label)
    elif isinstance(update, AddEdge):
        buf.write(bytes((2,)))
        _write_u64(buf, update.src)
        _write_u64(buf, update.dst)
        _write_label(buf, update.label)
    elif isinstance(update, RemoveEdge):
        buf.write(bytes((3,)))
        _write_u64(buf, update.src)
        _write_u64(buf, update.dst)
    elif isinstance(update, RemoveNode):
        buf.write(bytes((4,)))
        _write_u64(buf, update.node)
    else:
        raise ValueError(f"unknown update {update!r}")
    return buf.getvalue()


def decode_update(payload: bytes) -> GraphUpdate:
    buf = io.BytesIO(payload)
    kind = buf.read(1)
    if not kind:
        raise TransportError("empty update payload")
    code = kind[0]
    if code == 1:
        return AddNode(_read_u64(buf), _read_label(buf))
    if code == 2:
        return AddEdge(_read_u64(buf), _read_u64(buf), _read_label(buf))
    if code == 3:
        return RemoveEdge(_read_u64(buf), _read_u64(buf))
    if code == 4:
        return RemoveNode(_read_u64(buf))
    raise TransportError(f"unknown update kind {code}")


def encode_receipt(receipt: set[int]) -> bytes:
    buf = io.BytesIO()
    nodes = sorted(receipt)
    write_varint(buf, len(nodes))
    for node in nodes:
        _write_u64(buf, node)
    return buf.getvalue()


def decode_receipt(payload: bytes) -> set[int]:
    buf = io.BytesIO(payload)
    count = read_varint(buf)
    return {_read_u64(buf) for _ in range(count)}


FLAG_LABEL_FILTER = 0x01
FLAG_RESTART_PROB = 0x02
FLAG_TARGET = 0x04


def encode_query(query: Query) -> bytes:
    buf = io.BytesIO()
    buf.write(bytes((_QUERY_KIND_CODE[query.kind],)))
    _write_u64(buf, query.query_id)
    _write_u64(buf, query.source)
    write_varint(buf, query.h)
    _write_u64(buf, query.seed)
    flags = 0
    if query.label_filter is not None:
        flags |= FLAG_LABEL_FILTER
    if query.kind is QueryKind.RANDOM_WALK:
        flags |= FLAG_RESTART_PROB
    if query.target is not None:
        flags |= FLAG_TARGET
    buf.write(bytes((flags,)))
    if flags & FLAG_LABEL_FILTER:
        _write_label(buf, query.label_filter)
    if flags & FLAG_RESTART_PROB:
        buf.write(struct.pack(">d", query.restart_prob))
    if flags & FLAG_TARGET:
        _write_u64(buf, query.target)
    return buf.getvalue()


def decode_query(payload: bytes) -> Query:
    buf = io.BytesIO(payload)
    head = buf.read(1)
    if not head:
        raise TransportError("empty query payload")
    kind = _QUERY_KIND_FROM.get(head[0])
    if kind is None:
        raise TransportError(f"unknown query kind {head[0]}")
    query_id = _read_u64(buf)
    source = _read_u64(buf)
    h = read_varint(buf)
    seed = _read_u64(buf)
    flag_raw = buf.read(1)
    if not flag_raw:
        raise TransportError("truncated query flags")
    flags = flag_raw[0]
    label_filter = _read_label(buf) if flags & FLAG_LABEL_FILTER else None
    restart_prob = struct.unpack(">d", buf.read(8))[0] if flags & FLAG_RESTART_PROB else 0.15
    target = _read_u64(buf) if flags & FLAG_TARGET else None
    return Query(
        kind=kind,
        source=source,
        h=h,
        target=target,
        label_filter=label_filter,
        restart_prob=restart_prob,
        seed=seed,
        query_id=query_id,
    )


def encode_query_result(result: QueryResult) -> bytes:
    buf = io.BytesIO()
    buf.write(bytes((_QUERY_KIND_CODE[result.kind],)))
    payload = result.payload
    if isinstance(payload, AggregationResult):
        write_varint(buf, payload.count)
    elif isinstance(payload, RandomWalkResult):
        _write_u64(buf, payload.terminal)
        write_varint(buf, len(payload.visits))
        for node, count in payload.visits:
            _write_u64(buf, node)
            write_varint(buf, count)
    elif isinstance(payload, ReachabilityResult):
        buf.write(bytes((1 if payload.reachable else 0,)))
    else:
        raise ValueError(f"unknown payload {payload!r}")
    write_varint(buf, result.cache_hits)
    write_varint(buf, result.cache_misses)
    buf.write(struct.pack(">d", result.elapsed_us))
    return buf.getvalue()


def decode_query_result(payload: bytes) -> QueryResult:
    buf = io.BytesIO(payload)
    head = buf.read(1)
    if not head:
        raise TransportError("empty result payload")
    kind = _QUERY_KIND_FROM.get(head[0])
    if kind is None:
        raise TransportError(f"unknown result kind {head[0]}")
    body: AggregationResult | RandomWalkResult | ReachabilityResult
    if kind is QueryKind.AGGREGATION:
        body = AggregationResult(count=read_varint(buf))
    elif kind is QueryKind.RANDOM_WALK:
        terminal = _read_u64(buf)
        n = read_varint(buf)
        visits = tuple((_read_u64(buf), read_varint(buf)) for _ in range(n))
        body = RandomWalkResult(terminal=terminal, visits=visits)
    else:
        flag = buf.read(1)
        if not flag:
            raise TransportError("truncated reachability result")
        body = ReachabilityResult(reachable=bool(flag[0]))
    hits = read_varint(buf)
    misses = read_varint(buf)
    elapsed_raw = buf.read(8)
    if len(elapsed_raw) != 8:
        raise TransportError("truncated elapsed time")
    elapsed = struct.unpack(">d", elapsed_raw)[0]
    return QueryResult(kind=kind, payload=body, cache_hits=hits, cache_misses=misses, elapsed_us=elapsed)


def encode_error(code: int, message: str) -> bytes:
    buf = io.BytesIO()
    buf.write(bytes((code,)))
    data = message.encode("utf-8")
    write_varint(buf, len(data))
    buf.write(data)
    return buf.getvalue()


def decode_error(payload: bytes) -> tuple[int, str]:
    buf = io.BytesIO(payload)
    head = buf.read(1)
    if not head:
        raise TransportError("empty error payload")
    n = read_varint(buf)
    return head[0], buf.read(n).decode("utf-8")


def raise_for_error(payload: bytes) -> None:
    code, message = decode_error(payload)
    if code == ERR_NOT_FOUND:
        raise NotFoundError(message)
    if code == ERR_PRECONDITION:
        raise PreconditionError(message)
    raise TransportError(f"remote error {code}: {message}")


# -- frame I/O ---------------------------------------------------------------


def pack_frame(opcode: int, payload: bytes) -> bytes:
    if len(payload) > MAX_FRAME_BYTES:
        raise TransportError(f"payload of {len(payload)} bytes exceeds frame limit")
    return struct.pack(">IB", len(payload), opcode) + payload


def send_frame(sock: socket.socket, opcode: int, payload: bytes) -> None:
    try:
        sock.sendall(pack_frame(opcode, payload))
    except OSError as exc:
        raise TransportError(f"send failed: {exc}") from exc


def _recv_exact(sock: socket.socket, n: int) -> bytes:
    chunks = []
    remaining = n
    while remaining:
        try:
            chunk = sock.recv(remaining)
        except OSError as exc:
            raise TransportError(f"recv failed: {exc}") from exc
        if not chunk:
            raise TransportError("connection closed mid-frame")
        chunks.append(chunk)
        remaining -= len(chunk)
    return b"".join(chunks)


def recv_frame(sock: socket.socket) -> tuple[int, bytes]:
    header = _recv_exact(sock, 5)
    length, opcode = struct.unpack(">IB", header)
    if length > MAX_FRAME_BYTES:
        raise TransportError(f"incoming frame of {length} bytes exceeds limit")
    payload = _recv_exact(sock, length) if length else b""
    return opcode, payload
