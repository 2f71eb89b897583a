"""Channels: membership, chaincode-style validation, world state, queries.

A channel is an isolated ledger plus its member organizations. Commits
are append-only: invalid transactions inside an ordered block are stored
with their verdicts but never applied (nothing committed is ever removed
or rewritten). The world state and the query indexes are pure functions
of the chain; verify_chain recomputes everything from genesis.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

from ..canonical import ZERO_HASH, canonical_bytes, sha256, sha256_hex
from ..records import DefectRecord, RecordValidationError, validate_record_dict
from .block import Block, compute_data_hash, create_genesis
from .tx import OP_RECORD_DEFECT, OrgRegistry, Transaction, verify_payload


class ValidationVerdict(str, Enum):
    VALID = "Valid"
    NOT_A_MEMBER = "NotAMember"
    BAD_SIGNATURE = "BadSignature"
    MALFORMED_PAYLOAD = "MalformedPayload"
    DUPLICATE_NOOP = "DuplicateNoop"


class BrokenChain(ValueError):
    pass


class NotAMember(PermissionError):
    """Raised with a constant message shape: no data-dependent detail."""

    def __init__(self) -> None:
        super().__init__("org is not a member of this channel")


@dataclass
class VerifyReport:
    ok: bool
    first_bad_block: Optional[int]
    reason: str = ""

    def to_dict(self) -> dict:
        return {
            "ok": self.ok,
            "first_bad_block": self.first_bad_block,
            "reason": self.reason,
        }


@dataclass
class Channel:
    channel_id: str
    member_orgs: set[str]
    registry: OrgRegistry
    chain: list[Block] = field(default_factory=list)
    world_state: dict[str, DefectRecord] = field(default_factory=dict)
    shipment_index: dict[str, list[str]] = field(default_factory=dict)
    sensor_index: dict[str, list[str]] = field(default_factory=dict)
    verdicts: list[list[ValidationVerdict]] = field(default_factory=list)

    @property
    def height(self) -> int:
        return len(self.chain)

    @property
    def tip(self) -> Block:
        return self.chain[-1]

    def tip_hash(self) -> bytes:
        return self.chain[-1].block_hash if self.chain else ZERO_HASH

    def require_member(self, org: str) -> None:
        if org not in self.member_orgs:
            raise NotAMember()


def create_channel(
    channel_id: str,
    member_orgs: set[str],
    registry: OrgRegistry,
    genesis_timestamp: int = 0,
) -> Channel:
    channel = Channel(
        channel_id=channel_id, member_orgs=set(member_orgs), registry=registry
    )
    genesis = create_genesis(channel_id, member_orgs, genesis_timestamp)
    channel.chain.append(genesis)
    channel.verdicts.append([])
    return channel


def validate_tx(
    tx: Transaction, channel: Channel, registry: Optional[OrgRegistry] = None
) -> ValidationVerdict:
    """Chaincode-equivalent validation; never raises, always a verdict."""
    registry = registry or channel.registry
    if tx.submitter_org not in channel.member_orgs:
        return ValidationVerdict.NOT_A_MEMBER
    secret = registry.secret_for(tx.submitter_org)
    if secret is None:
        # member without a registered secret: fail closed
        return ValidationVerdict.BAD_SIGNATURE
    payload_bytes = tx.payload_bytes()
    if not verify_payload(payload_bytes, tx.signature, secret):
        return ValidationVerdict.BAD_SIGNATURE
    if tx.channel_id != channel.channel_id or tx.op != OP_RECORD_DEFECT:
        return ValidationVerdict.MALFORMED_PAYLOAD
    if tx.tx_id != sha256_hex(payload_bytes):
        return ValidationVerdict.MALFORMED_PAYLOAD
    try:
        record = validate_record_dict(tx.payload)
    except RecordValidationError:
        return ValidationVerdict.MALFORMED_PAYLOAD
    if record.record_id in channel.world_state:
        return ValidationVerdict.DUPLICATE_NOOP
    return ValidationVerdict.VALID


def apply_record(channel: Channel, record: DefectRecord) -> None:
    channel.world_state[record.record_id] = record
    if record.shipment_id is not None:
        channel.shipment_index.setdefault(record.shipment_id, []).append(
            record.record_id
        )
    channel.sensor_index.setdefault(record.sensor_id, []).append(record.record_id)


def commit_block(block: Block, channel: Channel) -> Channel:
    """Append one ordered block; valid txs mutate world state, bad txs are
    stored marked-invalid (immutability: nothing is dropped)."""
    if block.header.number != channel.height:
        raise BrokenChain(
            f"expected block {channel.height}, got {block.header.number}"
        )
    if block.header.previous_hash != channel.tip_hash():
        raise BrokenChain("previous_hash does not match chain tip")
    if block.header.number == 0:
        raise BrokenChain("genesis is created with the channel, not committed")
    if block.header.data_hash != compute_data_hash(block.transactions):
        raise BrokenChain("data_hash does not match transactions")
    if block.block_hash != block.header.compute_hash():
        raise BrokenChain("block_hash does not match header")
    if not block.transactions:
        raise BrokenChain("non-genesis block without transactions")

    block_verdicts = []
    for tx in block.transactions:
        verdict = validate_tx(tx, channel)
        block_verdicts.append(verdict)
        if verdict == ValidationVerdict.VALID:
            apply_record(channel, validate_record_dict(tx.payload))
    channel.chain.append(block)
    channel.verdicts.append(block_verdicts)
    return channel


def replay(channel: Channel) -> Channel:
    """Rebuild a channel from its chain alone (genesis config + blocks)."""
    genesis = channel.chain[0]
    fresh = create_channel(
        genesis.config["channel_id"],
        set(genesis.config["member_orgs"]),
        channel.registry,
        genesis_timestamp=genesis.header.timestamp,
    )
    for block in channel.chain[1:]:
        commit_block(block, fresh)
    return fresh


def verify_chain(channel: Channel) -> VerifyReport:
    """Recompute every hash and link from genesis, then replay the state."""
    prev_hash = ZERO_HASH
    for i, block in enumerate(channel.chain):
        h = block.header
        if h.number != i:
            return VerifyReport(False, i, "block number mismatch")
        if h.previous_hash != prev_hash:
            return VerifyReport(False, i, "previous_hash link broken")
        if i == 0:
            if block.config is None or block.transactions:
                return VerifyReport(False, 0, "genesis must carry channel config")
            expected_data = sha256(canonical_bytes(block.config))
        else:
            if not block.transactions:
                return VerifyReport(False, i, "empty non-genesis block")
            for tx in block.transactions:
                if tx.tx_id != sha256_hex(tx.payload_bytes()):
                    return VerifyReport(False, i, "tx_id does not match payload")
            expected_data = compute_data_hash(block.transactions)
        if h.data_hash != expected_data:
            return VerifyReport(False, i, "data_hash mismatch")
        if block.block_hash != h.compute_hash():
            return VerifyReport(False, i, "block_hash mismatch")
        prev_hash = block.block_hash

    if channel.chain:
        replayed = replay(channel)
        if replayed.world_state != channel.world_state:
            return VerifyReport(False, None, "world state replay mismatch")
        if (
            replayed.shipment_index != channel.shipment_index
            or replayed.sensor_index != channel.sensor_index
        ):
            return VerifyReport(False, None, "index replay mismatch")
    return VerifyReport(True, None)


def _sorted_records(channel: Channel, record_ids: list[str]) -> list[DefectRecord]:
    records = [channel.world_state[rid] for rid in record_ids]
    records.sort(key=lambda r: (r.timestamp, r.record_id))
    return records


def query_by_shipment(
    channel: Channel, shipment_id: str, org: str
) -> list[DefectRecord]:
    channel.require_member(org)
    return _sorted_records(channel, channel.shipment_index.get(shipment_id, []))


def query_by_sensor(channel: Channel, sensor_id: str, org: str) -> list[DefectRecord]:
    channel.require_member(org)
    return _sorted_records(channel, channel.sensor_index.get(sensor_id, []))
