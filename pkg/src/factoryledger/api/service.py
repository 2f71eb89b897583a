"""The write/read facade between HTTP handlers and the ledger machinery.

Writes funnel through one serialized path: sign on behalf of the
authenticated org, hand the transaction to the ordering service, wait
(bounded) for it to come back inside a committed block, then answer with
the block number. Reads hit the immutable committed state directly.
"""

from __future__ import annotations

import logging
import threading
from dataclasses import dataclass
from typing import Callable, Optional

from ..canonical import sha256_hex
from ..ledger.block import Block
from ..ledger.channel import (
    Channel,
    ValidationVerdict,
    commit_block,
    query_by_sensor,
    query_by_shipment,
    verify_chain,
)
from ..ledger.tx import OrgRegistry, Transaction, build_transaction
from ..records import validate_record_dict
from ..raft.cutter import BatchPolicy, BlockCutter
from ..raft.node import RaftConfig
from ..raft.simnet import Cluster, NetConfig
from .stream import EventBus

log = logging.getLogger(__name__)


class NoLeaderAvailable(Exception):
    pass


@dataclass
class SubmitOutcome:
    status: str  # COMMITTED | PENDING | DUPLICATE
    tx_id: str
    block_number: Optional[int]


class InProcessOrderer:
    """A seeded simulated orderer cluster pumped on demand.

    Deterministic: the number of ticks pumped depends only on the call
    sequence, so identical scenario runs produce identical chains.
    """

    def __init__(
        self,
        cluster_size: int = 3,
        seed: int = 0,
        raft_config: RaftConfig = RaftConfig(),
        net: Optional[NetConfig] = None,
    ) -> None:
        node_ids = [f"orderer{i}" for i in range(1, cluster_size + 1)]
        self.cluster = Cluster(
            node_ids,
            net or NetConfig(seed=seed, min_delay=1, max_delay=2),
            raft_config=raft_config,
        )
        self.cursor = 0  # last raft log index delivered downstream

    def ensure_leader(self, budget: int = 5000) -> str:
        for _ in range(budget):
            leader = self.cluster.leader_id()
            if leader is not None:
                return leader
            self.cluster.step()
        raise NoLeaderAvailable()

    def submit(self, tx: Transaction, budget: int = 5000) -> None:
        """Hand the tx to the current leader, following redirect hints."""
        target = self.ensure_leader()
        for _ in range(budget):
            status, hint = self.cluster.submit(target, tx)
            if status == "accepted":
                return
            target = hint or self.ensure_leader()
            self.cluster.step()
        raise NoLeaderAvailable()

    def pump(self, ticks: int = 1) -> None:
        for _ in range(ticks):
            self.cluster.step()

    def take_committed(self) -> list[Transaction]:
        """Newly committed transactions in log order, no-ops skipped."""
        node = max(self.cluster.nodes.values(), key=lambda n: n.commit_index)
        out = []
        while self.cursor < node.commit_index:
            self.cursor += 1
            entry = node.log[self.cursor - 1]
            if entry.tx is not None:
                out.append(entry.tx)
        return out

    @property
    def now(self) -> int:
        return self.cluster.now


class LedgerService:
    def __init__(
        self,
        channel: Channel,
        registry: OrgRegistry,
        orderer: InProcessOrderer,
        clock_ms: Callable[[], int],
        policy: BatchPolicy = BatchPolicy(),
        bus: Optional[EventBus] = None,
        commit_budget_ticks: int = 2000,
        on_block: Optional[Callable[[Block], None]] = None,
    ) -> None:
        self.channel = channel
        self.registry = registry
        self.orderer = orderer
        self.clock_ms = clock_ms
        self.bus = bus
        self.commit_budget_ticks = commit_budget_ticks
        self.on_block = on_block
        self.cutter = BlockCutter(
            policy,
            channel.channel_id,
            tip_number=channel.tip.number,
            tip_hash=channel.tip_hash(),
        )
        # writes are serialized: HTTP handlers and background drains share
        # one path through the orderer, cutter and channel
        self._write_lock = threading.RLock()

    # --- delivery ---------------------------------------------------------

    def _commit(self, block: Block) -> None:
        commit_block(block, self.channel)
        if self.on_block is not None:
            self.on_block(block)
        if self.bus is not None:
            verdicts = self.channel.verdicts[block.number]
            for tx, verdict in zip(block.transactions, verdicts):
                if verdict == ValidationVerdict.VALID:
                    record = self.channel.world_state[tx.payload["record_id"]]
                    self.bus.publish_defect(record, block.number)

    def deliver(self) -> None:
        """Move raft-committed txs through the cutter into the channel."""
        with self._write_lock:
            self._deliver_locked()

    def _deliver_locked(self) -> None:
        for tx in self.orderer.take_committed():
            block = self.cutter.offer(tx, now=self.orderer.now, now_ms=self.clock_ms())
            if block is not None:
                self._commit(block)
        block = self.cutter.poll(now=self.orderer.now, now_ms=self.clock_ms())
        if block is not None:
            self._commit(block)

    def pump(self, ticks: int = 1) -> None:
        with self._write_lock:
            self.orderer.pump(ticks)
            self._deliver_locked()

    def flush(self, budget: int = 5000) -> None:
        """Drain: pump until nothing is left in flight (end of scenario)."""
        idle = 0
        for _ in range(budget):
            before = (self.orderer.cursor, self.channel.height, len(self.cutter.pending))
            self.pump(1)
            if (self.orderer.cursor, self.channel.height, len(self.cutter.pending)) == before:
                idle += 1
                if idle > self.cutter.policy.max_wait + 50:
                    break
            else:
                idle = 0

    # --- writes ---------------------------------------------------------

    def submit_record(self, payload: dict, org: str) -> SubmitOutcome:
        """Validate, sign as `org`, order, and wait for block inclusion.

        Raises RecordValidationError on bad payloads and NoLeaderAvailable
        when the ordering service has no reachable leader.
        """
        record = validate_record_dict(payload)
        tx_id = sha256_hex(record.canonical())
        self._write_lock.acquire()
        try:
            return self._submit_locked(record, tx_id, org)
        finally:
            self._write_lock.release()

    def _submit_locked(self, record, tx_id: str, org: str) -> SubmitOutcome:
        if record.record_id in self.channel.world_state:
            return SubmitOutcome(status="DUPLICATE", tx_id=tx_id, block_number=None)

        secret = self.registry.secret_for(org)
        if secret is None:
            # tokens are only issued against the registry, so this means the
            # registry changed underneath us; refuse loudly
            raise PermissionError(f"no signing secret for org {org}")
        tx = build_transaction(record, self.channel.channel_id, org, secret)
        self.orderer.submit(tx)
        for _ in range(self.commit_budget_ticks):
            self.pump(1)
            if record.record_id in self.channel.world_state:
                block_number = self._block_of(record.record_id)
                return SubmitOutcome(
                    status="COMMITTED", tx_id=tx.tx_id, block_number=block_number
                )
        return SubmitOutcome(status="PENDING", tx_id=tx.tx_id, block_number=None)

    def _block_of(self, record_id: str) -> Optional[int]:
        for block in reversed(self.channel.chain):
            for tx in block.transactions:
                if tx.payload.get("record_id") == record_id:
                    return block.number
        return None

    # --- reads ---------------------------------------------------------

    def query_shipment(self, shipment_id: str, org: str):
        return query_by_shipment(self.channel, shipment_id, org)

    def query_sensor(self, sensor_id: str, org: str):
        return query_by_sensor(self.channel, sensor_id, org)

    def get_block(self, number: int) -> Optional[Block]:
        if 0 <= number < self.channel.height:
            return self.channel.chain[number]
        return None

    def verify(self):
        return verify_chain(self.channel)
