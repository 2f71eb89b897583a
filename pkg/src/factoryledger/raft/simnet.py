"""Deterministic cluster simulation for the ordering service.

Everything — node election timers, link delays, drops — derives from
NetConfig.seed, so identical inputs produce identical traces. Partitions
isolate a node set for a tick range; crashes take a node down (volatile
state lost, durable state kept) and bring it back later.

The trace is an ordered list of {tick, node, event_kind, detail} events
plus periodic log snapshots, which is what the safety checkers consume.
"""

from __future__ import annotations

import heapq
import json
import random
from dataclasses import dataclass, field
from typing import IO, Optional

from ..canonical import canonical_bytes
from .node import NotLeader, RaftConfig, RaftNode, Role


@dataclass(frozen=True)
class Partition:
    start: int
    end: int
    isolated: frozenset

    def blocks(self, tick: int, a: str, b: str) -> bool:
        if not (self.start <= tick < self.end):
            return False
        return (a in self.isolated) != (b in self.isolated)


@dataclass(frozen=True)
class Crash:
    node: str
    at: int
    down_ticks: int


@dataclass(frozen=True)
class NetConfig:
    seed: int = 0
    min_delay: int = 1
    max_delay: int = 5
    drop_prob: float = 0.0
    partitions: tuple[Partition, ...] = ()
    crashes: tuple[Crash, ...] = ()


@dataclass
class SimTrace:
    events: list = field(default_factory=list)  # (tick, node, kind, detail)
    log_snapshots: list = field(default_factory=list)  # (tick, {node: [(i,t,tx)]})
    final_nodes: dict = field(default_factory=dict)
    client: Optional["SimClient"] = None

    def add(self, tick: int, node: str, kind: str, detail: dict) -> None:
        self.events.append((tick, node, kind, detail))

    def leaders_by_term(self) -> dict[int, set[str]]:
        out: dict[int, set[str]] = {}
        for _, node, kind, detail in self.events:
            if kind == "role_change" and detail.get("role") == "Leader":
                out.setdefault(detail["term"], set()).add(node)
        return out

    def applied_by_node(self) -> dict[str, list[tuple[int, int, str]]]:
        out: dict[str, list[tuple[int, int, str]]] = {}
        for _, node, kind, detail in self.events:
            if kind == "apply":
                out.setdefault(node, []).append(
                    (detail["index"], detail["term"], detail["tx_id"])
                )
        return out

    def write_ndjson(self, fp: IO[str]) -> None:
        for tick, node, kind, detail in self.events:
            fp.write(
                canonical_bytes(
                    {"tick": tick, "node": node, "event_kind": kind, "detail": detail}
                ).decode("utf-8")
            )
            fp.write("\n")

    def canonical(self) -> bytes:
        return canonical_bytes(
            [
                {"tick": t, "node": n, "event_kind": k, "detail": d}
                for t, n, k, d in self.events
            ]
        )


def _mix_seed(seed: int, salt: str) -> int:
    h = 0xCBF29CE484222325 ^ (seed & (2**64 - 1))
    for b in salt.encode():
        h = ((h ^ b) * 0x100000001B3) & (2**64 - 1)
    return h


class Cluster:
    """One tick at a time; drives nodes, links, crashes and partitions."""

    def __init__(
        self,
        node_ids: list[str],
        net: NetConfig,
        raft_config: RaftConfig = RaftConfig(),
        trace: Optional[SimTrace] = None,
    ) -> None:
        self.net = net
        self.trace = trace if trace is not None else SimTrace()
        self.now = 0
        self.node_ids = sorted(node_ids)
        self.nodes: dict[str, RaftNode] = {}
        for nid in self.node_ids:
            node = RaftNode(
                nid,
                [p for p in self.node_ids if p != nid],
                config=raft_config,
                rng=random.Random(_mix_seed(net.seed, f"node:{nid}")),
                trace=self._tracer(nid),
            )
            node.start(0)
            self.nodes[nid] = node
        self.net_rng = random.Random(_mix_seed(net.seed, "net"))
        self.queue: list = []  # (deliver_tick, seq, msg)
        self._seq = 0
        self.down: dict[str, int] = {}  # node -> recover tick
        self._crashes = sorted(net.crashes, key=lambda c: c.at)

    def _tracer(self, nid: str):
        def emit(kind: str, detail: dict) -> None:
            self.trace.add(self.now, nid, kind, detail)

        return emit

    def is_up(self, nid: str) -> bool:
        return nid not in self.down

    def leader_id(self) -> Optional[str]:
        for nid in self.node_ids:
            if self.is_up(nid) and self.nodes[nid].role == Role.LEADER:
                return nid
        return None

    def _blocked(self, tick: int, a: str, b: str) -> bool:
        return any(p.blocks(tick, a, b) for p in self.net.partitions)

    def send(self, msgs) -> None:
        for msg in msgs:
            if self._blocked(self.now, msg.sender, msg.recipient):
                self.trace.add(self.now, msg.sender, "partition_drop",
                               {"to": msg.recipient})
                continue
            if self.net.drop_prob > 0 and self.net_rng.random() < self.net.drop_prob:
                self.trace.add(self.now, msg.sender, "drop", {"to": msg.recipient})
                continue
            delay = self.net_rng.randint(self.net.min_delay, self.net.max_delay)
            self._seq += 1
            heapq.heappush(self.queue, (self.now + delay, self._seq, msg))

    def submit(self, target: str, tx):
        """Client-facing: returns ("accepted"|"not_leader"|"down", hint)."""
        if not self.is_up(target):
            return "down", None
        result = self.nodes[target].submit(tx, self.now)
        if isinstance(result, NotLeader):
            return "not_leader", result.hint
        self.send(result)
        return "accepted", target

    def step(self) -> None:
        """Advance one tick: crashes/recoveries, deliveries, then timers."""
        self.now += 1
        now = self.now

        for crash in self._crashes:
            if crash.at == now and self.is_up(crash.node):
                self.down[crash.node] = now + crash.down_ticks
                self.trace.add(now, crash.node, "crash", {"until": now + crash.down_ticks})
        for nid, until in list(self.down.items()):
            if now >= until:
                del self.down[nid]
                self.nodes[nid].recover(now)
                self.trace.add(now, nid, "recover", {})

        while self.queue and self.queue[0][0] <= now:
            _, _, msg = heapq.heappop(self.queue)
            if not self.is_up(msg.recipient):
                self.trace.add(now, msg.recipient, "drop_down", {"from": msg.sender})
                continue
            if self._blocked(now, msg.sender, msg.recipient):
                self.trace.add(now, msg.recipient, "partition_drop_rx",
                               {"from": msg.sender})
                continue
            self.send(self.nodes[msg.recipient].handle(msg, now))

        for nid in self.node_ids:
            if self.is_up(nid):
                self.send(self.nodes[nid].tick(now))

        for nid in self.node_ids:
            if self.is_up(nid):
                self.nodes[nid].take_applied()

    def snapshot_logs(self) -> None:
        self.trace.log_snapshots.append(
            (
                self.now,
                {
                    nid: [
                        (e.index, e.term, e.tx.tx_id if e.tx else None)
                        for e in node.log
                    ]
                    for nid, node in self.nodes.items()
                },
            )
        )


class SimClient:
    """Retries submissions until every transaction is committed somewhere.

    Duplicate-suppression lives in the leader (in-log tx_id dedup), so
    blind resubmission after a timeout is safe.
    """

    def __init__(
        self, cluster: Cluster, workload: list, retry_after: int = 120, backoff: int = 15
    ) -> None:
        self.cluster = cluster
        self.schedule = sorted(workload, key=lambda item: item[0])  # (tick, tx)
        self.retry_after = retry_after
        self.backoff = backoff
        self.pending: dict[str, dict] = {}
        self.target_hint: Optional[str] = None
        self._round_robin = 0

    def _next_target(self) -> str:
        ids = self.cluster.node_ids
        self._round_robin = (self._round_robin + 1) % len(ids)
        return ids[self._round_robin]

    def committed_ids(self) -> set[str]:
        out = set()
        for node in self.cluster.nodes.values():
            for entry in node.log[: node.commit_index]:
                if entry.tx is not None:
                    out.add(entry.tx.tx_id)
        return out

    def step(self) -> None:
        now = self.cluster.now
        while self.schedule and self.schedule[0][0] <= now:
            _, tx = self.schedule.pop(0)
            self.pending[tx.tx_id] = {"tx": tx, "next_attempt": now}
        if not self.pending:
            return
        committed = self.committed_ids()
        for tx_id in list(self.pending):
            if tx_id in committed:
                del self.pending[tx_id]
                continue
            state = self.pending[tx_id]
            if now < state["next_attempt"]:
                continue
            target = self.target_hint or self._next_target()
            status, hint = self.cluster.submit(target, state["tx"])
            if status == "accepted":
                self.target_hint = target
                state["next_attempt"] = now + self.retry_after
            else:
                self.target_hint = hint if hint and self.cluster.is_up(hint) else None
                state["next_attempt"] = now + self.backoff

    @property
    def done(self) -> bool:
        return not self.schedule and not self.pending


def run_simulation(
    cluster_size: int,
    net: NetConfig,
    workload: list,
    duration: int,
    raft_config: RaftConfig = RaftConfig(),
    snapshot_every: int = 200,
) -> SimTrace:
    """Run a full scripted simulation and return its trace."""
    if cluster_size < 1:
        raise ValueError("cluster_size must be >= 1")
    node_ids = [f"orderer{i}" for i in range(1, cluster_size + 1)]
    cluster = Cluster(node_ids, net, raft_config=raft_config)
    client = SimClient(cluster, workload)
    for _ in range(duration):
        cluster.step()
        client.step()
        if snapshot_every and cluster.now % snapshot_every == 0:
            cluster.snapshot_logs()
    cluster.snapshot_logs()
    cluster.trace.final_nodes = cluster.nodes
    cluster.trace.client = client
    return cluster.trace
