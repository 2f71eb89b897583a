"""The consensus core: a pure state machine over ticks and messages.

Standard single-decree-log replication with randomized election
timeouts: followers/candidates past their deadline start an election;
votes are granted once per term and only to candidates with up-to-date
logs; the leader replicates entries and advances the commit index only
for entries of its own term acknowledged by a majority.

The node never does I/O. Drivers send the returned messages and own
durability: persist (current_term, voted_for, log) after calling into
the node and before putting its messages on the wire.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Optional

from .messages import (
    AppendEntries,
    AppendResponse,
    LogEntry,
    RequestVote,
    VoteResponse,
)


class Role(str, Enum):
    FOLLOWER = "Follower"
    CANDIDATE = "Candidate"
    LEADER = "Leader"


@dataclass(frozen=True)
class RaftConfig:
    election_timeout_min: int = 150  # ticks
    election_timeout_max: int = 300
    heartbeat_period: int = 50
    max_entries_per_message: int = 50


@dataclass(frozen=True)
class NotLeader:
    hint: Optional[str]  # last known leader, when any


class RaftNode:
    def __init__(
        self,
        node_id: str,
        peers: list[str],
        config: RaftConfig = RaftConfig(),
        rng: Optional[random.Random] = None,
        trace: Optional[Callable[[str, dict], None]] = None,
    ) -> None:
        self.node_id = node_id
        self.peers = sorted(peers)
        self.config = config
        self.rng = rng or random.Random()
        self.trace = trace or (lambda kind, detail: None)

        # durable
        self.current_term = 0
        self.voted_for: Optional[str] = None
        self.log: list[LogEntry] = []

        # volatile
        self.role = Role.FOLLOWER
        self.commit_index = 0
        self.last_applied = 0
        self.leader_hint: Optional[str] = None
        self.votes: set[str] = set()
        self.next_index: dict[str, int] = {}
        self.match_index: dict[str, int] = {}
        self.election_deadline = 0
        self.next_heartbeat = 0
        self._tx_ids: set[str] = set()

    # --- helpers ---------------------------------------------------------

    @property
    def cluster_size(self) -> int:
        return len(self.peers) + 1

    @property
    def quorum(self) -> int:
        return self.cluster_size // 2 + 1

    def last_log_index(self) -> int:
        return self.log[-1].index if self.log else 0

    def last_log_term(self) -> int:
        return self.log[-1].term if self.log else 0

    def entry(self, index: int) -> Optional[LogEntry]:
        if 1 <= index <= len(self.log):
            return self.log[index - 1]
        return None

    def reset_election_deadline(self, now: int) -> None:
        self.election_deadline = now + self.rng.randint(
            self.config.election_timeout_min, self.config.election_timeout_max
        )

    def start(self, now: int) -> None:
        self.reset_election_deadline(now)

    def recover(self, now: int) -> None:
        """Restart after a crash: durable state kept, volatile state reset."""
        self.role = Role.FOLLOWER
        self.commit_index = 0
        self.last_applied = 0
        self.leader_hint = None
        self.votes = set()
        self.next_index = {}
        self.match_index = {}
        self.reset_election_deadline(now)
        self._tx_ids = {e.tx.tx_id for e in self.log if e.tx is not None}

    def _set_term(self, term: int) -> None:
        if term > self.current_term:
            self.current_term = term
            self.voted_for = None
            self.trace("term_change", {"term": term})

    def _become_follower(self, term: int) -> None:
        self._set_term(term)
        if self.role != Role.FOLLOWER:
            self.role = Role.FOLLOWER
            self.trace("role_change", {"role": "Follower", "term": self.current_term})
        self.votes = set()

    # --- elections ---------------------------------------------------------

    def _become_leader(self, now: int) -> list:
        self.role = Role.LEADER
        self.leader_hint = self.node_id
        # a no-op of the new term lets older-term entries commit promptly
        # (the leader may only count replicas of entries from its own term)
        noop = LogEntry(term=self.current_term, index=self.last_log_index() + 1,
                        tx=None)
        self.log.append(noop)
        self.next_index = {p: noop.index for p in self.peers}
        self.match_index = {p: 0 for p in self.peers}
        self.next_heartbeat = now  # heartbeat immediately
        self.trace(
            "role_change",
            {
                "role": "Leader",
                "term": self.current_term,
                "log": [(e.index, e.term, e.tx.tx_id if e.tx else None)
                        for e in self.log],
            },
        )
        if self.cluster_size == 1:
            self._advance_commit()
        return self._broadcast_appends(now, force=True)

    def _start_election(self, now: int) -> list:
        self._set_term(self.current_term + 1)
        self.role = Role.CANDIDATE
        self.voted_for = self.node_id
        self.votes = {self.node_id}
        self.reset_election_deadline(now)
        self.trace("role_change", {"role": "Candidate", "term": self.current_term})
        if len(self.votes) >= self.quorum:  # single-node cluster
            return self._become_leader(now)
        return [
            RequestVote(
                term=self.current_term,
                sender=self.node_id,
                recipient=peer,
                last_log_index=self.last_log_index(),
                last_log_term=self.last_log_term(),
            )
            for peer in self.peers
        ]

    # --- replication ---------------------------------------------------------

    def _append_for(self, peer: str) -> AppendEntries:
        nxt = self.next_index[peer]
        prev = self.entry(nxt - 1)
        entries = tuple(
            self.log[nxt - 1 : nxt - 1 + self.config.max_entries_per_message]
        )
        return AppendEntries(
            term=self.current_term,
            sender=self.node_id,
            recipient=peer,
            prev_log_index=nxt - 1,
            prev_log_term=prev.term if prev else 0,
            entries=entries,
            leader_commit=self.commit_index,
        )

    def _broadcast_appends(self, now: int, force: bool = False) -> list:
        if not force and now < self.next_heartbeat:
            return []
        self.next_heartbeat = now + self.config.heartbeat_period
        return [self._append_for(peer) for peer in self.peers]

    def _advance_commit(self) -> None:
        for n in range(self.commit_index + 1, self.last_log_index() + 1):
            if self.log[n - 1].term != self.current_term:
                continue
            acks = 1 + sum(1 for p in self.peers if self.match_index.get(p, 0) >= n)
            if acks >= self.quorum:
                self.commit_index = n
        # entries of older terms below the new commit point are committed too
        # (covered automatically because commit_index is a watermark)

    # --- public hooks ---------------------------------------------------------

    def tick(self, now: int) -> list:
        """Drive timeouts: elections for followers/candidates, heartbeats for
        the leader."""
        if self.role == Role.LEADER:
            return self._broadcast_appends(now)
        if now >= self.election_deadline:
            return self._start_election(now)
        return []

    def submit(self, tx, now: int):
        """Append a client transaction. Returns messages, or NotLeader."""
        if self.role != Role.LEADER:
            hint = self.leader_hint if self.leader_hint != self.node_id else None
            return NotLeader(hint=hint)
        if tx.tx_id in self._tx_ids:
            # idempotent accept: the entry is already in the log
            return []
        entry = LogEntry(
            term=self.current_term, index=self.last_log_index() + 1, tx=tx
        )
        self.log.append(entry)
        self._tx_ids.add(tx.tx_id)
        self.trace("accept_tx", {"index": entry.index, "term": entry.term,
                                 "tx_id": tx.tx_id})
        if self.cluster_size == 1:
            self._advance_commit()
            return []
        return self._broadcast_appends(now, force=True)

    def handle(self, msg, now: int) -> list:
        if msg.term > self.current_term:
            self._become_follower(msg.term)
        if isinstance(msg, RequestVote):
            return self._on_request_vote(msg, now)
        if isinstance(msg, VoteResponse):
            return self._on_vote_response(msg, now)
        if isinstance(msg, AppendEntries):
            return self._on_append_entries(msg, now)
        if isinstance(msg, AppendResponse):
            return self._on_append_response(msg, now)
        raise TypeError(f"unknown message {msg!r}")

    # --- handlers ---------------------------------------------------------

    def _on_request_vote(self, msg: RequestVote, now: int) -> list:
        granted = False
        if msg.term == self.current_term and self.role == Role.FOLLOWER:
            up_to_date = msg.last_log_term > self.last_log_term() or (
                msg.last_log_term == self.last_log_term()
                and msg.last_log_index >= self.last_log_index()
            )
            if self.voted_for in (None, msg.sender) and up_to_date:
                granted = True
                self.voted_for = msg.sender
                self.reset_election_deadline(now)
        return [
            VoteResponse(
                term=self.current_term,
                sender=self.node_id,
                recipient=msg.sender,
                granted=granted,
            )
        ]

    def _on_vote_response(self, msg: VoteResponse, now: int) -> list:
        if self.role != Role.CANDIDATE or msg.term != self.current_term:
            return []
        if msg.granted:
            self.votes.add(msg.sender)
            if len(self.votes) >= self.quorum:
                return self._become_leader(now)
        return []

    def _on_append_entries(self, msg: AppendEntries, now: int) -> list:
        if msg.term < self.current_term:
            return [
                AppendResponse(
                    term=self.current_term,
                    sender=self.node_id,
                    recipient=msg.sender,
                    success=False,
                    match_index=0,
                )
            ]
        # valid leader for this term
        self._become_follower(msg.term)
        self.leader_hint = msg.sender
        self.reset_election_deadline(now)

        prev = self.entry(msg.prev_log_index)
        if msg.prev_log_index > 0 and (prev is None or prev.term != msg.prev_log_term):
            return [
                AppendResponse(
                    term=self.current_term,
                    sender=self.node_id,
                    recipient=msg.sender,
                    success=False,
                    match_index=0,
                )
            ]
        # drop conflicting suffix, append what is new
        for entry in msg.entries:
            existing = self.entry(entry.index)
            if existing is not None and existing.term != entry.term:
                del self.log[entry.index - 1 :]
                self._tx_ids = {
                    e.tx.tx_id for e in self.log if e.tx is not None
                }
                existing = None
            if existing is None:
                if entry.index != self.last_log_index() + 1:
                    break  # gap: refuse silently, leader will resend
                self.log.append(entry)
                if entry.tx is not None:
                    self._tx_ids.add(entry.tx.tx_id)
        match = msg.prev_log_index + len(msg.entries)
        match = min(match, self.last_log_index())
        if msg.leader_commit > self.commit_index:
            self.commit_index = min(msg.leader_commit, self.last_log_index())
        return [
            AppendResponse(
                term=self.current_term,
                sender=self.node_id,
                recipient=msg.sender,
                success=True,
                match_index=match,
            )
        ]

    def _on_append_response(self, msg: AppendResponse, now: int) -> list:
        if self.role != Role.LEADER or msg.term != self.current_term:
            return []
        peer = msg.sender
        if msg.success:
            self.match_index[peer] = max(self.match_index.get(peer, 0), msg.match_index)
            self.next_index[peer] = self.match_index[peer] + 1
            self._advance_commit()
            if self.next_index[peer] <= self.last_log_index():
                return [self._append_for(peer)]  # keep streaming the backlog
            return []
        # consistency check failed: back off one step and retry
        self.next_index[peer] = max(1, self.next_index[peer] - 1)
        return [self._append_for(peer)]

    # --- applying ---------------------------------------------------------

    def take_applied(self) -> list[LogEntry]:
        """Entries newly committed since the last call, in log order."""
        out = []
        while self.last_applied < self.commit_index:
            self.last_applied += 1
            entry = self.log[self.last_applied - 1]
            out.append(entry)
            self.trace(
                "apply",
                {
                    "index": entry.index,
                    "term": entry.term,
                    "tx_id": entry.tx.tx_id if entry.tx else None,
                },
            )
        return out

    def durable_state(self) -> dict:
        return {
            "current_term": self.current_term,
            "voted_for": self.voted_for,
            "log": [e.to_dict() for e in self.log],
        }
