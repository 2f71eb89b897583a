"""Submission outbox: at-least-once delivery with crash recovery.

Records that cannot reach the API stay queued (and spilled to disk when a
spill path is configured) and are redelivered in order with the same
record_id; the server deduplicates, so retries never double-commit.
Rejected records are surfaced to the caller, never silently dropped.
"""

from __future__ import annotations

import json
import logging
from collections import deque
from pathlib import Path
from typing import Optional

from ..canonical import canonical_bytes
from ..records import DefectRecord, validate_record_dict
from ..api.client import ClientRejected, ClientUnreachable, SubmitReceipt

log = logging.getLogger(__name__)


class Unreachable(Exception):
    """Retry budget exhausted; the records remain queued."""


class Rejected(Exception):
    def __init__(self, record: DefectRecord, reason: str) -> None:
        self.record = record
        self.reason = reason
        super().__init__(f"{record.record_id}: {reason}")


class Outbox:
    def __init__(self, client, spill_path: Optional[str | Path] = None) -> None:
        self.client = client
        self.spill_path = Path(spill_path) if spill_path else None
        self.pending: deque[DefectRecord] = deque()
        if self.spill_path and self.spill_path.exists():
            self._load_spill()

    def _load_spill(self) -> None:
        for line in self.spill_path.read_text(encoding="utf-8").splitlines():
            line = line.strip()
            if line:
                self.pending.append(validate_record_dict(json.loads(line)))
        log.info("recovered %d pending records from %s", len(self.pending),
                 self.spill_path)

    def _write_spill(self) -> None:
        if self.spill_path is None:
            return
        tmp = self.spill_path.with_suffix(".tmp")
        with open(tmp, "w", encoding="utf-8") as fp:
            for record in self.pending:
                fp.write(canonical_bytes(record.to_dict()).decode("utf-8"))
                fp.write("\n")
        tmp.replace(self.spill_path)

    def submit(self, record: DefectRecord) -> Optional[SubmitReceipt]:
        """Try to deliver now; on network failure queue and return None."""
        self.pending.append(record)
        self._write_spill()
        receipts = self.drain(max_rounds=1)
        return receipts[-1] if receipts and not self.pending else None

    def drain(self, max_rounds: int = 3) -> list[SubmitReceipt]:
        """Deliver queued records in order; stops at the first network
        failure, keeping per-sensor submission order intact."""
        receipts: list[SubmitReceipt] = []
        for _ in range(max_rounds):
            if not self.pending:
                break
            progressed = False
            while self.pending:
                record = self.pending[0]
                try:
                    receipt = self.client.post_defect(record.to_dict())
                except ClientUnreachable:
                    break
                except ClientRejected as exc:
                    self.pending.popleft()
                    self._write_spill()
                    raise Rejected(record, str(exc)) from exc
                self.pending.popleft()
                self._write_spill()
                receipts.append(receipt)
                progressed = True
            if not self.pending or not progressed:
                break
        return receipts

    def require_empty(self) -> None:
        if self.pending:
            raise Unreachable(f"{len(self.pending)} records still queued")
