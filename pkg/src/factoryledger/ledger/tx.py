"""Signed defect transactions.

Identity is (org_id, shared secret): signatures are HMAC-SHA256 MACs over
the canonical payload bytes, and tx_id is the SHA-256 of those same
bytes — so the same record always yields the same transaction id, which
is what makes retried submissions idempotent.
"""

from __future__ import annotations

import hmac
import json
from dataclasses import dataclass
from pathlib import Path

from ..canonical import canonical_bytes, sha256_hex
from ..records import DefectRecord

OP_RECORD_DEFECT = "RecordDefect"


def sign_payload(payload: bytes, secret: str) -> str:
    return hmac.new(secret.encode("utf-8"), payload, "sha256").hexdigest()


def verify_payload(payload: bytes, signature: str, secret: str) -> bool:
    return hmac.compare_digest(sign_payload(payload, secret), signature)


class OrgRegistry:
    """org_id -> shared secret. Fail-closed: unknown orgs verify nothing."""

    def __init__(self, secrets: dict[str, str]) -> None:
        self._secrets = dict(secrets)

    @classmethod
    def load(cls, path: str | Path) -> "OrgRegistry":
        with open(path, "r", encoding="utf-8") as fp:
            data = json.load(fp)
        if not isinstance(data, dict) or not all(
            isinstance(v, str) for v in data.values()
        ):
            raise ValueError("org registry must map org_id to secret string")
        return cls(data)

    def secret_for(self, org_id: str) -> str | None:
        return self._secrets.get(org_id)

    def orgs(self) -> set[str]:
        return set(self._secrets)

    def check(self, org_id: str, secret: str) -> bool:
        known = self._secrets.get(org_id)
        if known is None:
            # constant-shape rejection: compare against a dummy so timing
            # does not reveal whether the org exists
            hmac.compare_digest(secret, secret)
            return False
        return hmac.compare_digest(known, secret)


@dataclass(frozen=True)
class Transaction:
    tx_id: str  # lowercase hex sha256 of canonical payload bytes
    channel_id: str
    op: str
    payload: dict
    submitter_org: str
    signature: str  # hex HMAC-SHA256 over canonical payload bytes

    def payload_bytes(self) -> bytes:
        return canonical_bytes(self.payload)

    def digest(self) -> bytes:
        return bytes.fromhex(self.tx_id)

    def to_dict(self) -> dict:
        return {
            "tx_id": self.tx_id,
            "channel_id": self.channel_id,
            "op": self.op,
            "payload": self.payload,
            "submitter_org": self.submitter_org,
            "signature": self.signature,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Transaction":
        return cls(
            tx_id=data["tx_id"],
            channel_id=data["channel_id"],
            op=data["op"],
            payload=data["payload"],
            submitter_org=data["submitter_org"],
            signature=data["signature"],
        )


def build_transaction(
    record: DefectRecord, channel_id: str, org_id: str, secret: str
) -> Transaction:
    payload = record.to_dict()
    payload_bytes = canonical_bytes(payload)
    return Transaction(
        tx_id=sha256_hex(payload_bytes),
        channel_id=channel_id,
        op=OP_RECORD_DEFECT,
        payload=payload,
        submitter_org=org_id,
        signature=sign_payload(payload_bytes, secret),
    )
