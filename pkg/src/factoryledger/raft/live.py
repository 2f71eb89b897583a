"""Live ordering-service driver: real clocks, TCP transport, durable state.

Frames are length-prefixed (4-byte big-endian) canonical JSON. Between
orderer nodes the payloads are the four consensus messages; clients
(the API server) speak a tiny extra protocol on the same framing:

    {"kind": "SubmitTx", "tx": {...}}
        -> {"kind": "SubmitResponse", "status": "accepted"|"not_leader",
            "hint": node_id|null}
    {"kind": "FetchCommitted", "from_index": n}
        -> {"kind": "CommittedBatch", "entries": [...], "commit_index": m}

Durable state ((current_term, voted_for, log)) is an append-only ndjson
event file, written and fsynced before outbound messages go on the wire,
and replayed on boot.
"""

from __future__ import annotations

import asyncio
import json
import logging
import os
import random
import struct
import time
from pathlib import Path
from typing import Optional

from ..canonical import canonical_bytes
from .messages import LogEntry, message_from_dict, message_to_dict
from .node import NotLeader, RaftConfig, RaftNode

log = logging.getLogger(__name__)

_LEN = struct.Struct(">I")
TICK_SECONDS = 0.01  # 100 protocol ticks per wall second


async def read_frame(reader: asyncio.StreamReader) -> Optional[dict]:
    try:
        header = await reader.readexactly(_LEN.size)
        (length,) = _LEN.unpack(header)
        body = await reader.readexactly(length)
    except (asyncio.IncompleteReadError, ConnectionError):
        return None
    return json.loads(body)


def frame_bytes(payload: dict) -> bytes:
    body = canonical_bytes(payload)
    return _LEN.pack(len(body)) + body


class DurableLog:
    """Append-only persistence for (current_term, voted_for, log)."""

    def __init__(self, path: Path, fsync: bool = True) -> None:
        self.path = path
        self.fsync = fsync
        self._fp = None

    def replay_into(self, node: RaftNode) -> None:
        if not self.path.exists():
            return
        for line in self.path.read_text(encoding="utf-8").splitlines():
            if not line.strip():
                continue
            event = json.loads(line)
            if event["type"] == "state":
                node.current_term = event["term"]
                node.voted_for = event["voted_for"]
            elif event["type"] == "append":
                node.log.append(LogEntry.from_dict(event["entry"]))
            elif event["type"] == "truncate":
                del node.log[event["from_index"] - 1 :]
        node._tx_ids = {e.tx.tx_id for e in node.log if e.tx is not None}

    def _write(self, event: dict) -> None:
        if self._fp is None:
            self._fp = open(self.path, "ab")
        self._fp.write(canonical_bytes(event) + b"\n")
        self._fp.flush()
        if self.fsync:
            os.fsync(self._fp.fileno())

    def sync(self, node: RaftNode, prev: tuple) -> tuple:
        """Persist whatever changed since `prev`; returns the new snapshot."""
        term, voted, log_len, last = prev
        if node.current_term != term or node.voted_for != voted:
            self._write(
                {"type": "state", "term": node.current_term,
                 "voted_for": node.voted_for}
            )
        if len(node.log) < log_len or (
            node.log and log_len and len(node.log) >= log_len
            and last is not None
            and (node.log[log_len - 1].term, node.log[log_len - 1].index) != last
        ):
            # a suffix was truncated: rewrite (rare, desk-scale logs are small)
            self._write({"type": "truncate", "from_index": 1})
            for entry in node.log:
                self._write({"type": "append", "entry": entry.to_dict()})
        else:
            for entry in node.log[log_len:]:
                self._write({"type": "append", "entry": entry.to_dict()})
        return (node.current_term, node.voted_for, len(node.log),
                (node.log[-1].term, node.log[-1].index) if node.log else None)


class LiveOrdererNode:
    def __init__(
        self,
        node_id: str,
        listen: tuple[str, int],
        peers: dict[str, tuple[str, int]],
        data_dir: str | Path,
        raft_config: RaftConfig = RaftConfig(),
        seed: Optional[int] = None,
        fsync: bool = True,
    ) -> None:
        self.node_id = node_id
        self.listen = listen
        self.peers = peers
        self.raft_config = raft_config
        self.node = RaftNode(
            node_id,
            sorted(peers),
            config=raft_config,
            rng=random.Random(seed if seed is not None else os.urandom(8).hex()),
        )
        data_dir = Path(data_dir)
        data_dir.mkdir(parents=True, exist_ok=True)
        self.durable = DurableLog(data_dir / f"{node_id}.raftlog", fsync=fsync)
        self.durable.replay_into(self.node)
        self.node.recover(0)
        self._durable_snapshot = (
            self.node.current_term,
            self.node.voted_for,
            len(self.node.log),
            (self.node.log[-1].term, self.node.log[-1].index)
            if self.node.log
            else None,
        )
        self._writers: dict[str, asyncio.StreamWriter] = {}
        self._t0 = time.monotonic()
        self.server: Optional[asyncio.base_events.Server] = None

    def now_ticks(self) -> int:
        return int((time.monotonic() - self._t0) / TICK_SECONDS)

    def _persist(self) -> None:
        self._durable_snapshot = self.durable.sync(self.node, self._durable_snapshot)

    async def _send(self, msgs) -> None:
        self._persist()  # durable before anything leaves this process
        for msg in msgs:
            writer = await self._writer_for(msg.recipient)
            if writer is None:
                continue
            try:
                writer.write(frame_bytes(message_to_dict(msg)))
                await writer.drain()
            except ConnectionError:
                self._writers.pop(msg.recipient, None)

    async def _writer_for(self, peer: str) -> Optional[asyncio.StreamWriter]:
        writer = self._writers.get(peer)
        if writer is not None and not writer.is_closing():
            return writer
        host, port = self.peers[peer]
        try:
            _, writer = await asyncio.open_connection(host, port)
        except OSError:
            return None
        self._writers[peer] = writer
        return writer

    async def _client_loop(self, reader, writer) -> None:
        while True:
            data = await read_frame(reader)
            if data is None:
                break
            kind = data.get("kind")
            if kind == "SubmitTx":
                from ..ledger.tx import Transaction

                tx = Transaction.from_dict(data["tx"])
                result = self.node.submit(tx, self.now_ticks())
                if isinstance(result, NotLeader):
                    reply = {"kind": "SubmitResponse", "status": "not_leader",
                             "hint": result.hint}
                else:
                    await self._send(result)
                    reply = {"kind": "SubmitResponse", "status": "accepted",
                             "hint": self.node_id}
                writer.write(frame_bytes(reply))
                await writer.drain()
            elif kind == "FetchCommitted":
                start = max(1, int(data["from_index"]))
                entries = [
                    e.to_dict()
                    for e in self.node.log[start - 1 : self.node.commit_index]
                ]
                writer.write(
                    frame_bytes(
                        {
                            "kind": "CommittedBatch",
                            "entries": entries,
                            "commit_index": self.node.commit_index,
                        }
                    )
                )
                await writer.drain()
            else:
                msg = message_from_dict(data)
                await self._send(self.node.handle(msg, self.now_ticks()))
        writer.close()

    async def _timer_loop(self) -> None:
        while True:
            await asyncio.sleep(TICK_SECONDS)
            await self._send(self.node.tick(self.now_ticks()))
            self.node.take_applied()

    async def run(self) -> None:
        self.server = await asyncio.start_server(
            self._client_loop, self.listen[0], self.listen[1]
        )
        port = self.server.sockets[0].getsockname()[1]
        print(f"READY {self.node_id} {self.listen[0]}:{port}", flush=True)
        async with self.server:
            await self._timer_loop()


class TcpOrdererClient:
    """Synchronous client the API server uses to reach a live cluster.

    Implements the same surface as InProcessOrderer (submit / pump /
    take_committed / now), but pump means wall-clock waiting.
    """

    def __init__(self, nodes: dict[str, tuple[str, int]], timeout: float = 5.0) -> None:
        self.nodes = dict(nodes)
        self.timeout = timeout
        self.cursor = 0
        self._hint: Optional[str] = None
        self._t0 = time.monotonic()
        import socket

        self._socket_mod = socket
        self._conns: dict[str, object] = {}

    @property
    def now(self) -> int:
        return int((time.monotonic() - self._t0) / TICK_SECONDS)

    def _conn(self, node_id: str):
        conn = self._conns.get(node_id)
        if conn is not None:
            return conn
        host, port = self.nodes[node_id]
        try:
            conn = self._socket_mod.create_connection((host, port), self.timeout)
            conn.settimeout(self.timeout)
        except OSError:
            return None
        self._conns[node_id] = conn
        return conn

    def _roundtrip(self, node_id: str, payload: dict) -> Optional[dict]:
        conn = self._conn(node_id)
        if conn is None:
            return None
        try:
            conn.sendall(frame_bytes(payload))
            header = b""
            while len(header) < _LEN.size:
                chunk = conn.recv(_LEN.size - len(header))
                if not chunk:
                    raise ConnectionError()
                header += chunk
            (length,) = _LEN.unpack(header)
            body = b""
            while len(body) < length:
                chunk = conn.recv(length - len(body))
                if not chunk:
                    raise ConnectionError()
                body += chunk
            return json.loads(body)
        except (OSError, ConnectionError):
            self._conns.pop(node_id, None)
            try:
                conn.close()
            except OSError:
                pass
            return None

    def submit(self, tx, budget: int = 200) -> None:
        from ..api.service import NoLeaderAvailable

        order = list(self.nodes)
        attempt = 0
        while attempt < budget:
            target = self._hint or order[attempt % len(order)]
            reply = self._roundtrip(target, {"kind": "SubmitTx", "tx": tx.to_dict()})
            attempt += 1
            if reply is None:
                self._hint = None
                time.sleep(0.02)
                continue
            if reply["status"] == "accepted":
                self._hint = target
                return
            self._hint = reply.get("hint")
            if self._hint is None:
                time.sleep(0.05)
        raise NoLeaderAvailable()

    def pump(self, ticks: int = 1) -> None:
        time.sleep(ticks * TICK_SECONDS)

    def take_committed(self) -> list:
        best_entries: list = []
        best_commit = self.cursor
        for node_id in self.nodes:
            reply = self._roundtrip(
                node_id, {"kind": "FetchCommitted", "from_index": self.cursor + 1}
            )
            if reply and reply["commit_index"] > best_commit:
                best_commit = reply["commit_index"]
                best_entries = reply["entries"]
        out = []
        for raw in best_entries:
            entry = LogEntry.from_dict(raw)
            if entry.index <= self.cursor:
                continue
            self.cursor = entry.index
            if entry.tx is not None:
                out.append(entry.tx)
        return out

    def close(self) -> None:
        for conn in self._conns.values():
            try:
                conn.close()
            except OSError:
                pass
        self._conns.clear()


def main(argv: Optional[list[str]] = None) -> None:
    """Entry point for one orderer-node child process."""
    import argparse

    parser = argparse.ArgumentParser(prog="factoryledger-orderer")
    parser.add_argument("--node-id", required=True)
    parser.add_argument("--listen", required=True, help="host:port")
    parser.add_argument(
        "--peer", action="append", default=[], help="node_id=host:port"
    )
    parser.add_argument("--data-dir", required=True)
    parser.add_argument("--seed", type=int, default=None)
    parser.add_argument("--no-fsync", action="store_true")
    args = parser.parse_args(argv)

    host, port = args.listen.rsplit(":", 1)
    peers = {}
    for item in args.peer:
        peer_id, addr = item.split("=", 1)
        peer_host, peer_port = addr.rsplit(":", 1)
        peers[peer_id] = (peer_host, int(peer_port))

    node = LiveOrdererNode(
        node_id=args.node_id,
        listen=(host, int(port)),
        peers=peers,
        data_dir=args.data_dir,
        seed=args.seed,
        fsync=not args.no_fsync,
    )
    asyncio.run(node.run())


if __name__ == "__main__":
    main()
