"""Ordering-service protocol messages.

Every message carries the sender's term at send time. Entries hold whole
ledger transactions; the log index is the global transaction order.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from ..ledger.tx import Transaction


@dataclass(frozen=True)
class LogEntry:
    term: int
    index: int  # contiguous from 1
    tx: Optional[Transaction]  # None: leader no-op appended on election

    def to_dict(self) -> dict:
        return {
            "term": self.term,
            "index": self.index,
            "tx": self.tx.to_dict() if self.tx is not None else None,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "LogEntry":
        return cls(
            term=data["term"],
            index=data["index"],
            tx=Transaction.from_dict(data["tx"]) if data["tx"] is not None else None,
        )


@dataclass(frozen=True)
class RequestVote:
    term: int
    sender: str
    recipient: str
    last_log_index: int
    last_log_term: int


@dataclass(frozen=True)
class VoteResponse:
    term: int
    sender: str
    recipient: str
    granted: bool


@dataclass(frozen=True)
class AppendEntries:
    term: int
    sender: str
    recipient: str
    prev_log_index: int
    prev_log_term: int
    entries: tuple[LogEntry, ...]
    leader_commit: int


@dataclass(frozen=True)
class AppendResponse:
    term: int
    sender: str
    recipient: str
    success: bool
    match_index: int  # highest index known replicated on sender when success


_KINDS = {
    "RequestVote": RequestVote,
    "VoteResponse": VoteResponse,
    "AppendEntries": AppendEntries,
    "AppendResponse": AppendResponse,
}


def message_to_dict(msg) -> dict:
    data = {"kind": type(msg).__name__}
    data.update({f: getattr(msg, f) for f in msg.__dataclass_fields__})
    if isinstance(msg, AppendEntries):
        data["entries"] = [e.to_dict() for e in msg.entries]
    return data


def message_from_dict(data: dict):
    kind = data.pop("kind")
    cls = _KINDS[kind]
    if cls is AppendEntries:
        data["entries"] = tuple(LogEntry.from_dict(e) for e in data["entries"])
    return cls(**data)
