from .block import Block, BlockHeader, EmptyMembership, create_genesis, make_block
from .channel import (
    BrokenChain,
    Channel,
    NotAMember,
    ValidationVerdict,
    VerifyReport,
    commit_block,
    create_channel,
    query_by_sensor,
    query_by_shipment,
    validate_tx,
    verify_chain,
)
from .tx import OrgRegistry, Transaction, build_transaction, sign_payload, verify_payload

__all__ = [
    "Block",
    "BlockHeader",
    "BrokenChain",
    "Channel",
    "EmptyMembership",
    "NotAMember",
    "OrgRegistry",
    "Transaction",
    "ValidationVerdict",
    "VerifyReport",
    "build_transaction",
    "commit_block",
    "create_channel",
    "create_genesis",
    "make_block",
    "query_by_sensor",
    "query_by_shipment",
    "sign_payload",
    "validate_tx",
    "verify_chain",
]
