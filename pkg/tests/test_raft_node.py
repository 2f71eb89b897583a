"""Scripted protocol exchanges, hand-checked against the consensus rules."""

import random

from factoryledger.ledger import build_transaction
from factoryledger.raft import (
    AppendEntries,
    AppendResponse,
    LogEntry,
    NotLeader,
    RaftConfig,
    RaftNode,
    RequestVote,
    Role,
    VoteResponse,
)
from factoryledger.records import DefectRecord, Importance

CFG = RaftConfig(election_timeout_min=10, election_timeout_max=20, heartbeat_period=5)


def mk_tx(n):
    rec = DefectRecord(
        record_id=f"00000000-0000-5000-8000-{n:012d}",
        sensor_id="R02_LoadCell",
        fault_type="OverPressure",
        value=900.0 + n,
        unit="N",
        importance=Importance.WARNING,
        timestamp=1700000000000 + n,
    )
    return build_transaction(rec, "cell-defects", "Org2", "secret-two")


def fresh(node_id="a", peers=("b", "c"), seed=1):
    node = RaftNode(node_id, list(peers), config=CFG, rng=random.Random(seed))
    node.start(0)
    return node


def make_leader(node):
    msgs = node.tick(node.election_deadline)  # timeout -> candidate
    assert node.role == Role.CANDIDATE
    out = node.handle(
        VoteResponse(term=node.current_term, sender="b", recipient=node.node_id,
                     granted=True),
        now=node.election_deadline + 1,
    )
    assert node.role == Role.LEADER
    return msgs, out


def test_single_node_becomes_leader_immediately():
    node = fresh(peers=())
    node.tick(node.election_deadline)
    assert node.role == Role.LEADER
    assert node.current_term == 1


def test_follower_with_fresh_heartbeat_stays_quiet():
    node = fresh()
    assert node.tick(node.election_deadline - 1) == []
    assert node.role == Role.FOLLOWER


def test_election_broadcasts_request_vote():
    node = fresh()
    msgs = node.tick(node.election_deadline)
    assert node.role == Role.CANDIDATE
    assert node.voted_for == node.node_id
    assert {m.recipient for m in msgs} == {"b", "c"}
    assert all(isinstance(m, RequestVote) and m.term == 1 for m in msgs)


def test_majority_votes_win_election():
    node = fresh()
    make_leader(node)
    assert node.role == Role.LEADER


def test_stale_term_message_is_refused_and_node_unchanged():
    node = fresh()
    node.current_term = 5
    before = (node.role, node.current_term, list(node.log))
    out = node.handle(
        AppendEntries(term=3, sender="b", recipient="a", prev_log_index=0,
                      prev_log_term=0, entries=(), leader_commit=0),
        now=1,
    )
    assert len(out) == 1 and isinstance(out[0], AppendResponse)
    assert out[0].success is False and out[0].term == 5
    assert (node.role, node.current_term, list(node.log)) == before


def test_higher_term_forces_step_down():
    node = fresh()
    make_leader(node)
    node.handle(
        RequestVote(term=node.current_term + 5, sender="c", recipient="a",
                    last_log_index=0, last_log_term=0),
        now=50,
    )
    assert node.role == Role.FOLLOWER
    assert node.voted_for in (None, "c")


def test_vote_granted_once_per_term_and_log_currency_checked():
    node = fresh()
    node.log = [LogEntry(term=2, index=1, tx=mk_tx(1))]
    node.current_term = 2
    # stale candidate log -> refuse
    out = node.handle(
        RequestVote(term=3, sender="b", recipient="a", last_log_index=0,
                    last_log_term=0),
        now=1,
    )
    assert out[0].granted is False
    # up-to-date candidate -> grant
    out = node.handle(
        RequestVote(term=3, sender="c", recipient="a", last_log_index=1,
                    last_log_term=2),
        now=1,
    )
    assert out[0].granted is True
    # second candidate same term -> already voted
    out = node.handle(
        RequestVote(term=3, sender="b", recipient="a", last_log_index=9,
                    last_log_term=3),
        now=1,
    )
    assert out[0].granted is False


def test_append_entries_consistency_check():
    node = fresh()
    node.log = [LogEntry(term=1, index=1, tx=mk_tx(1))]
    node.current_term = 1
    out = node.handle(
        AppendEntries(term=1, sender="b", recipient="a", prev_log_index=1,
                      prev_log_term=9, entries=(LogEntry(1, 2, mk_tx(2)),),
                      leader_commit=0),
        now=1,
    )
    assert out[0].success is False
    assert [e.index for e in node.log] == [1]  # unchanged


def test_append_entries_truncates_conflicts_and_appends():
    node = fresh()
    node.current_term = 2
    node.log = [
        LogEntry(term=1, index=1, tx=mk_tx(1)),
        LogEntry(term=1, index=2, tx=mk_tx(2)),
        LogEntry(term=1, index=3, tx=mk_tx(3)),
    ]
    new = (
        LogEntry(term=2, index=2, tx=mk_tx(4)),
        LogEntry(term=2, index=3, tx=mk_tx(5)),
    )
    out = node.handle(
        AppendEntries(term=2, sender="b", recipient="a", prev_log_index=1,
                      prev_log_term=1, entries=new, leader_commit=2),
        now=1,
    )
    assert out[0].success is True and out[0].match_index == 3
    assert [(e.index, e.term) for e in node.log] == [(1, 1), (2, 2), (3, 2)]
    assert node.commit_index == 2


def test_leader_commit_rule_majority_of_own_term():
    # 3 nodes: entry replicated on leader + one follower = majority of 3.
    # the leader's log is [no-op, tx] after the submit
    node = fresh()
    make_leader(node)
    term = node.current_term
    node.submit(mk_tx(7), now=30)
    assert node.commit_index == 0
    node.handle(
        AppendResponse(term=term, sender="b", recipient="a", success=True,
                       match_index=2),
        now=31,
    )
    assert node.commit_index == 2


def test_leader_does_not_commit_previous_term_entries_directly():
    node = fresh()
    make_leader(node)
    old_term = node.current_term
    node.submit(mk_tx(8), now=30)  # log: [no-op@1, tx@2], both old term soon
    # step down, then win a new election
    node.handle(
        RequestVote(term=old_term + 1, sender="b", recipient="a",
                    last_log_index=0, last_log_term=0),
        now=40,
    )
    assert node.role == Role.FOLLOWER
    node.tick(node.election_deadline)
    node.handle(
        VoteResponse(term=node.current_term, sender="c", recipient="a",
                     granted=True),
        now=node.election_deadline + 1,
    )
    assert node.role == Role.LEADER  # appends its own no-op at index 3
    new_term = node.current_term
    # follower acks only the old-term entries: not committable by count alone
    node.handle(
        AppendResponse(term=new_term, sender="b", recipient="a", success=True,
                       match_index=2),
        now=60,
    )
    assert node.commit_index == 0
    # replicating the new-term no-op commits everything below it too
    node.handle(
        AppendResponse(term=new_term, sender="b", recipient="a", success=True,
                       match_index=3),
        now=62,
    )
    assert node.commit_index == 3


def test_submit_to_follower_returns_redirect_hint():
    node = fresh()
    node.leader_hint = "b"
    result = node.submit(mk_tx(10), now=1)
    assert isinstance(result, NotLeader) and result.hint == "b"


def test_submit_without_leader_returns_null_hint():
    node = fresh()
    result = node.submit(mk_tx(11), now=1)
    assert isinstance(result, NotLeader) and result.hint is None


def test_submit_appends_and_broadcasts():
    node = fresh()
    make_leader(node)
    msgs = node.submit(mk_tx(12), now=30)
    assert node.last_log_index() == 2  # election no-op + the new tx
    assert {m.recipient for m in msgs} == {"b", "c"}
    for m in msgs:
        assert isinstance(m, AppendEntries)
        assert m.entries[-1].tx is not None and m.entries[-1].index == 2


def test_submit_duplicate_tx_is_idempotent():
    node = fresh()
    make_leader(node)
    tx = mk_tx(13)
    node.submit(tx, now=30)
    out = node.submit(tx, now=31)
    assert out == []
    assert node.last_log_index() == 2  # no-op + tx, appended once


def test_failed_append_response_backs_off_next_index():
    node = fresh()
    make_leader(node)
    node.submit(mk_tx(14), now=30)
    node.submit(mk_tx(15), now=31)
    node.next_index["b"] = 3
    out = node.handle(
        AppendResponse(term=node.current_term, sender="b", recipient="a",
                       success=False, match_index=0),
        now=32,
    )
    assert node.next_index["b"] == 2
    assert len(out) == 1 and out[0].prev_log_index == 1
    assert [e.index for e in out[0].entries][0] == 2
