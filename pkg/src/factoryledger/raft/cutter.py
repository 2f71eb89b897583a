"""Block cutting: group ordered transactions into blocks.

A block is cut when the pending queue reaches max_tx, or when the oldest
pending transaction has waited max_wait ticks. Input order (the ordering
service's commit order) is exactly preserved: the concatenation of all
cut blocks is the input sequence.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Optional

from ..ledger.block import Block, make_block
from ..ledger.tx import Transaction


@dataclass(frozen=True)
class BatchPolicy:
    max_tx: int = 10
    max_wait: int = 20  # ticks

    def __post_init__(self) -> None:
        if self.max_tx < 1 or self.max_wait < 0:
            raise ValueError("max_tx must be >= 1 and max_wait >= 0")


class BlockCutter:
    """Chains cut blocks off the given tip; one cutter per channel."""

    def __init__(
        self,
        policy: BatchPolicy,
        channel_id: str,
        tip_number: int,
        tip_hash: bytes,
    ) -> None:
        self.policy = policy
        self.channel_id = channel_id
        self.next_number = tip_number + 1
        self.prev_hash = tip_hash
        self.pending: deque[tuple[Transaction, int]] = deque()

    def _cut(self, count: int, now_ms: int) -> Block:
        txs = tuple(self.pending.popleft()[0] for _ in range(count))
        block = make_block(
            number=self.next_number,
            previous_hash=self.prev_hash,
            transactions=txs,
            channel_id=self.channel_id,
            timestamp=now_ms,
        )
        self.next_number += 1
        self.prev_hash = block.block_hash
        return block

    def offer(self, tx: Transaction, now: int, now_ms: int) -> Optional[Block]:
        """Enqueue one transaction; returns a block when the size trigger fires."""
        self.pending.append((tx, now))
        if len(self.pending) >= self.policy.max_tx:
            return self._cut(self.policy.max_tx, now_ms)
        return None

    def poll(self, now: int, now_ms: int) -> Optional[Block]:
        """Timeout trigger: cut whatever is pending once the oldest tx has
        waited max_wait ticks."""
        if not self.pending:
            return None
        oldest = self.pending[0][1]
        if now - oldest >= self.policy.max_wait:
            return self._cut(len(self.pending), now_ms)
        return None

    def flush(self, now_ms: int) -> Optional[Block]:
        if not self.pending:
            return None
        return self._cut(len(self.pending), now_ms)
