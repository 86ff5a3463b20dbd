"""TCP endpoints for the storage and processing tiers.

Each storage server listens on its own port and serves only the keys its
partition owns; processors connect to every storage server and pick the
port by the partition map. Processor servers accept QUERY frames from the
router and answer with QUERY_ACK frames carrying the result, hit/miss
counts, and the simulated elapsed time.

Connections are synchronous request/response; the router's event loop
drives them one acknowledgment at a time.
"""

from __future__ import annotations

import socket
import threading

from . import wire
from .errors import NotFoundError, PreconditionError, TransportError
from .graph import AdjacencyEntry, GraphUpdate
from .processor import CostModel, Processor
from .queries import Query, QueryResult
from .storage import StoragePartitionMap, StorageTier


class _FrameServer(threading.Thread):
    """Accept loop; one handler thread per connection."""

    def __init__(self, name: str):
        super().__init__(name=name, daemon=True)
        self._sock = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
        self._sock.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
        self._sock.bind(("127.0.0.1", 0))
        self._sock.listen(32)
        self.port = self._sock.getsockname()[1]
        self._stop = threading.Event()

    def run(self) -> None:
        self._sock.settimeout(0.2)
        handlers = []
        while not self._stop.is_set():
            try:
                conn, _ = self._sock.accept()
            except socket.timeout:
                continue
            except OSError:
                break
            t = threading.Thread(target=self._serve_connection, args=(conn,), daemon=True)
            t.start()
            handlers.append(t)
        self._sock.close()

    def stop(self) -> None:
        self._stop.set()

    def _serve_connection(self, conn: socket.socket) -> None:
        with conn:
            while True:
                try:
                    opcode, payload = wire.recv_frame(conn)
                except TransportError:
                    return
                try:
                    reply_op, reply_payload = self.handle(opcode, payload)
                except NotFoundError as exc:
                    reply_op, reply_payload = wire.OP_ERROR, wire.encode_error(wire.ERR_NOT_FOUND, str(exc))
                except PreconditionError as exc:
                    reply_op, reply_payload = wire.OP_ERROR, wire.encode_error(wire.ERR_PRECONDITION, str(exc))
                except Exception as exc:  # malformed frame, codec failure
                    reply_op, reply_payload = wire.OP_ERROR, wire.encode_error(wire.ERR_MALFORMED, str(exc))
                try:
                    wire.send_frame(conn, reply_op, reply_payload)
                except TransportError:
                    return

    def handle(self, opcode: int, payload: bytes) -> tuple[int, bytes]:
        raise NotImplementedError


class StorageServerTCP(_FrameServer):
    """Serves one partition's adjacency entries plus the update path."""

    def __init__(self, tier: StorageTier, server_index: int):
        super().__init__(name=f"storage-{server_index}")
        self.tier = tier
        self.server_index = server_index

    def handle(self, opcode: int, payload: bytes) -> tuple[int, bytes]:
        if opcode == wire.OP_GET_ADJ:
            if len(payload) != 8:
                raise TransportError("GET_ADJ payload must be 8 bytes")
            node = int.from_bytes(payload, "big")
            owner = self.tier.partition_map.server_of(node)
            if owner != self.server_index:
                raise PreconditionError(f"node {node} belongs to server {owner}, not {self.server_index}")
            entry = self.tier.partitions[self.server_index].get(node)
            return wire.OP_ADJ_RESP, wire.encode_adjacency(entry)
        if opcode == wire.OP_UPDATE:
            update = wire.decode_update(payload)
            receipt = self.tier.apply_update(update)
            return wire.OP_UPDATE_ACK, wire.encode_receipt(receipt)
        raise TransportError(f"storage server got unexpected opcode {opcode:#x}")


class StorageClient:
    """Processor-side view of the storage tier over TCP."""

    def __init__(self, ports: list[int], partition_map: StoragePartitionMap):
        self.partition_map = partition_map
        self._socks: list[socket.socket] = []
        for port in ports:
            sock = socket.create_connection(("127.0.0.1", port))
            sock.setsockopt(socket.IPPROTO_TCP, socket.TCP_NODELAY, 1)
            self._socks.append(sock)

    def get(self, node: int) -> AdjacencyEntry:
        sock = self._socks[self.partition_map.server_of(node)]
        wire.send_frame(sock, wire.OP_GET_ADJ, node.to_bytes(8, "big"))
        opcode, payload = wire.recv_frame(sock)
        if opcode == wire.OP_ERROR:
            wire.raise_for_error(payload)
        if opcode != wire.OP_ADJ_RESP:
            raise TransportError(f"expected ADJ_RESP, got {opcode:#x}")
        return wire.decode_adjacency(payload, node)

    def apply_update(self, update: GraphUpdate, server: int = 0) -> set[int]:
        sock = self._socks[server]
        wire.send_frame(sock, wire.OP_UPDATE, wire.encode_update(update))
        opcode, payload = wire.recv_frame(sock)
        if opcode == wire.OP_ERROR:
            wire.raise_for_error(payload)
        if opcode != wire.OP_UPDATE_ACK:
            raise TransportError(f"expected UPDATE_ACK, got {opcode:#x}")
        return wire.decode_receipt(payload)

    def close(self) -> None:
        for sock in self._socks:
            sock.close()


class ProcessorServerTCP(_FrameServer):
    """Runs a Processor behind QUERY/QUERY_ACK frames."""

    def __init__(self, processor: Processor, index: int):
        super().__init__(name=f"processor-{index}")
        self.processor = processor

    def handle(self, opcode: int, payload: bytes) -> tuple[int, bytes]:
        if opcode != wire.OP_QUERY:
            raise TransportError(f"processor server got unexpected opcode {opcode:#x}")
        query = wire.decode_query(payload)
        result = self.processor.execute(query)
        return wire.OP_QUERY_ACK, wire.encode_query_result(result)


class ProcessorClient:
    """Router-side handle to one remote processor."""

    def __init__(self, port: int):
        self._sock = socket.create_connection(("127.0.0.1", port))
        self._sock.setsockopt(socket.IPPROTO_TCP, socket.TCP_NODELAY, 1)

    def execute(self, query: Query) -> QueryResult:
        wire.send_frame(self._sock, wire.OP_QUERY, wire.encode_query(query))
        opcode, payload = wire.recv_frame(self._sock)
        if opcode == wire.OP_ERROR:
            wire.raise_for_error(payload)
        if opcode != wire.OP_QUERY_ACK:
            raise TransportError(f"expected QUERY_ACK, got {opcode:#x}")
        return wire.decode_query_result(payload)

    def close(self) -> None:
        self._sock.close()


class TcpCluster:
    """Local storage + processor servers and the clients wired to them."""

    def __init__(self, tier: StorageTier, num_processors: int, cache_bytes: int, cost_model: CostModel):
        self.storage_servers = [
            StorageServerTCP(tier, i) for i in range(tier.partition_map.num_servers)
        ]
        for server in self.storage_servers:
            server.start()
        ports = [s.port for s in self.storage_servers]
        self.storage_clients = [StorageClient(ports, tier.partition_map) for _ in range(num_processors)]
        self.processors = [
            Processor(i, self.storage_clients[i], cache_bytes, cost_model) for i in range(num_processors)
        ]
        self.processor_servers = [ProcessorServerTCP(p, i) for i, p in enumerate(self.processors)]
        for server in self.processor_servers:
            server.start()
        self.executors = [ProcessorClient(s.port) for s in self.processor_servers]

    def close(self) -> None:
        for client in self.executors:
            client.close()
        for client in self.storage_clients:
            client.close()
        for server in self.processor_servers:
            server.stop()
        for server in self.storage_servers:
            server.stop()
