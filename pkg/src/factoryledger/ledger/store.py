"""On-disk persistence: append-only chain file plus a state snapshot.

Chain file: one length-prefixed (4-byte big-endian) canonical block
record per block, append-only. Snapshot: canonical JSON of the world
state, indexes and the chain tip hash. On load the snapshot is checked
against a replay of the chain and discarded if inconsistent — the chain
is the authority.
"""

from __future__ import annotations

import json
import logging
import struct
from pathlib import Path
from typing import Optional

from ..canonical import canonical_bytes
from ..records import validate_record_dict
from .block import Block
from .channel import Channel, ValidationVerdict, apply_record, validate_tx
from .tx import OrgRegistry

log = logging.getLogger(__name__)

_LEN = struct.Struct(">I")


def append_block(path: str | Path, block: Block) -> None:
    data = block.canonical()
    with open(path, "ab") as fp:
        fp.write(_LEN.pack(len(data)))
        fp.write(data)


def load_blocks(path: str | Path) -> list[Block]:
    blocks = []
    raw = Path(path).read_bytes()
    offset = 0
    while offset < len(raw):
        if offset + _LEN.size > len(raw):
            raise ValueError(f"{path}: truncated length prefix at {offset}")
        (length,) = _LEN.unpack_from(raw, offset)
        offset += _LEN.size
        if offset + length > len(raw):
            raise ValueError(f"{path}: truncated block at {offset}")
        blocks.append(Block.from_dict(json.loads(raw[offset : offset + length])))
        offset += length
    return blocks


def write_chain(path: str | Path, channel: Channel) -> None:
    tmp = Path(path).with_suffix(".tmp")
    with open(tmp, "wb") as fp:
        for block in channel.chain:
            data = block.canonical()
            fp.write(_LEN.pack(len(data)))
            fp.write(data)
    tmp.replace(path)


def snapshot_dict(channel: Channel) -> dict:
    return {
        "channel_id": channel.channel_id,
        "member_orgs": sorted(channel.member_orgs),
        "height": channel.height,
        "tip_hash": channel.tip_hash().hex(),
        "world_state": {
            rid: record.to_dict() for rid, record in channel.world_state.items()
        },
        "shipment_index": channel.shipment_index,
        "sensor_index": channel.sensor_index,
    }


def save_snapshot(path: str | Path, channel: Channel) -> None:
    tmp = Path(path).with_suffix(".tmp")
    tmp.write_bytes(canonical_bytes(snapshot_dict(channel)))
    tmp.replace(path)


def channel_from_blocks(blocks: list[Block], registry: OrgRegistry) -> Channel:
    """Build a channel from raw blocks, leniently.

    The chain is taken verbatim and the state rebuilt by applying valid
    transactions; linkage and hash errors are NOT raised here so that
    verify_chain can report tampering with a block index. Callers that
    serve data must run verify_chain before trusting the result.
    """
    if not blocks:
        raise ValueError("empty chain")
    genesis = blocks[0]
    config = genesis.config or {}
    channel = Channel(
        channel_id=config.get("channel_id", genesis.header.channel_id),
        member_orgs=set(config.get("member_orgs", ())),
        registry=registry,
    )
    channel.chain = list(blocks)
    channel.verdicts.append([])
    for block in blocks[1:]:
        block_verdicts = []
        for tx in block.transactions:
            verdict = validate_tx(tx, channel)
            block_verdicts.append(verdict)
            if verdict == ValidationVerdict.VALID:
                apply_record(channel, validate_record_dict(tx.payload))
        channel.verdicts.append(block_verdicts)
    return channel


def load_channel(
    chain_path: str | Path,
    registry: OrgRegistry,
    snapshot_path: Optional[str | Path] = None,
) -> tuple[Channel, bool]:
    """Rebuild a channel from disk via channel_from_blocks.

    Returns (channel, snapshot_ok): snapshot_ok is False when the
    snapshot file existed but disagreed with the chain replay (it is
    then ignored — the chain is the authority).
    """
    channel = channel_from_blocks(load_blocks(chain_path), registry)

    snapshot_ok = True
    if snapshot_path is not None and Path(snapshot_path).exists():
        try:
            stored = json.loads(Path(snapshot_path).read_bytes())
            expected = {
                rid: validate_record_dict(data)
                for rid, data in stored.get("world_state", {}).items()
            }
            snapshot_ok = (
                stored.get("tip_hash") == channel.tip_hash().hex()
                and expected == channel.world_state
                and stored.get("shipment_index") == channel.shipment_index
                and stored.get("sensor_index") == channel.sensor_index
            )
        except (ValueError, KeyError):
            snapshot_ok = False
        if not snapshot_ok:
            log.warning(
                "snapshot %s inconsistent with chain replay; discarding",
                snapshot_path,
            )
    return channel, snapshot_ok
