"""Hash-chained blocks.

data_hash commits to the member transactions (concatenation of their raw
32-byte digests, in block order); block_hash commits to the header; each
header carries the previous block's hash. The genesis block carries the
channel configuration instead of transactions.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from ..canonical import ZERO_HASH, canonical_bytes, sha256
from .tx import Transaction


class EmptyMembership(ValueError):
    pass


@dataclass(frozen=True)
class BlockHeader:
    number: int
    previous_hash: bytes  # 32 bytes
    data_hash: bytes  # 32 bytes
    channel_id: str
    timestamp: int  # epoch ms

    def canonical(self) -> bytes:
        return canonical_bytes(
            {
                "number": self.number,
                "previous_hash": self.previous_hash.hex(),
                "data_hash": self.data_hash.hex(),
                "channel_id": self.channel_id,
                "timestamp": self.timestamp,
            }
        )

    def compute_hash(self) -> bytes:
        return sha256(self.canonical())


@dataclass(frozen=True)
class Block:
    header: BlockHeader
    transactions: tuple[Transaction, ...]
    block_hash: bytes
    config: Optional[dict] = field(default=None)  # genesis only

    @property
    def number(self) -> int:
        return self.header.number

    def to_dict(self) -> dict:
        return {
            "header": {
                "number": self.header.number,
                "previous_hash": self.header.previous_hash.hex(),
                "data_hash": self.header.data_hash.hex(),
                "channel_id": self.header.channel_id,
                "timestamp": self.header.timestamp,
            },
            "transactions": [tx.to_dict() for tx in self.transactions],
            "config": self.config,
            "block_hash": self.block_hash.hex(),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Block":
        h = data["header"]
        return cls(
            header=BlockHeader(
                number=h["number"],
                previous_hash=bytes.fromhex(h["previous_hash"]),
                data_hash=bytes.fromhex(h["data_hash"]),
                channel_id=h["channel_id"],
                timestamp=h["timestamp"],
            ),
            transactions=tuple(
                Transaction.from_dict(t) for t in data["transactions"]
            ),
            config=data.get("config"),
            block_hash=bytes.fromhex(data["block_hash"]),
        )

    def canonical(self) -> bytes:
        return canonical_bytes(self.to_dict())


def compute_data_hash(transactions: tuple[Transaction, ...]) -> bytes:
    return sha256(b"".join(tx.digest() for tx in transactions))


def config_document(channel_id: str, member_orgs: set[str]) -> dict:
    return {"channel_id": channel_id, "member_orgs": sorted(member_orgs)}


def create_genesis(channel_id: str, member_orgs: set[str], timestamp: int = 0) -> Block:
    """Block 0: all-zero previous hash, channel config as the payload."""
    if not member_orgs:
        raise EmptyMembership(channel_id)
    config = config_document(channel_id, member_orgs)
    header = BlockHeader(
        number=0,
        previous_hash=ZERO_HASH,
        data_hash=sha256(canonical_bytes(config)),
        channel_id=channel_id,
        timestamp=timestamp,
    )
    return Block(
        header=header,
        transactions=(),
        config=config,
        block_hash=header.compute_hash(),
    )


def make_block(
    number: int,
    previous_hash: bytes,
    transactions: tuple[Transaction, ...],
    channel_id: str,
    timestamp: int,
) -> Block:
    if not transactions:
        raise ValueError("non-genesis blocks must carry transactions")
    header = BlockHeader(
        number=number,
        previous_hash=previous_hash,
        data_hash=compute_data_hash(transactions),
        channel_id=channel_id,
        timestamp=timestamp,
    )
    return Block(
        header=header,
        transactions=tuple(transactions),
        block_hash=header.compute_hash(),
    )
