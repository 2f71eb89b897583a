"""Trace assertions: the safety properties every simulation must satisfy.

Checkers raise SafetyViolation with the offending evidence; the caller
decides whether that fails a test or aborts a sweep.
"""

from __future__ import annotations

from .simnet import SimTrace


class SafetyViolation(AssertionError):
    pass


def check_election_safety(trace: SimTrace) -> None:
    """At most one leader per term, ever."""
    for term, leaders in trace.leaders_by_term().items():
        if len(leaders) > 1:
            raise SafetyViolation(f"term {term} had leaders {sorted(leaders)}")


def check_log_matching(trace: SimTrace) -> None:
    """Same (index, term) implies identical prefixes, at every snapshot."""
    for tick, logs in trace.log_snapshots:
        items = sorted(logs.items())
        for i in range(len(items)):
            for j in range(i + 1, len(items)):
                (na, la), (nb, lb) = items[i], items[j]
                common = min(len(la), len(lb))
                for k in range(common - 1, -1, -1):
                    if la[k][1] == lb[k][1]:  # same term at same index
                        if la[: k + 1] != lb[: k + 1]:
                            raise SafetyViolation(
                                f"tick {tick}: {na} and {nb} share (index,term)"
                                f" at {k + 1} but prefixes differ"
                            )
                        break


def check_leader_completeness(trace: SimTrace) -> None:
    """Entries committed in earlier terms appear in every later leader's log."""
    committed: dict[int, tuple[int, str]] = {}  # index -> (term, tx_id)
    for tick, node, kind, detail in trace.events:
        if kind == "apply":
            idx = detail["index"]
            entry = (detail["term"], detail["tx_id"])
            if idx in committed and committed[idx] != entry:
                raise SafetyViolation(
                    f"index {idx} applied as {committed[idx]} and {entry}"
                )
            committed[idx] = entry
        elif kind == "role_change" and detail.get("role") == "Leader":
            log_entries = {(i, t, x) for i, t, x in detail.get("log", [])}
            for idx, (term, tx_id) in committed.items():
                if (idx, term, tx_id) not in log_entries:
                    raise SafetyViolation(
                        f"tick {tick}: new leader {node} (term {detail['term']})"
                        f" lacks committed entry {idx}"
                    )


def check_state_machine_safety(trace: SimTrace) -> None:
    """Applied sequences are gapless from 1 and prefix-compatible."""
    by_index: dict[int, tuple[int, str]] = {}
    for node, applied in trace.applied_by_node().items():
        expected = None
        for index, term, tx_id in applied:
            if expected is not None and index != expected:
                # re-application after crash recovery restarts from 1
                if index != 1:
                    raise SafetyViolation(
                        f"{node} applied index {index} after {expected - 1}"
                    )
            expected = index + 1
            seen = by_index.get(index)
            if seen is None:
                by_index[index] = (term, tx_id)
            elif seen != (term, tx_id):
                raise SafetyViolation(
                    f"index {index} applied as {seen} on one node and"
                    f" ({term}, {tx_id}) on {node}"
                )


def check_terms_monotonic(trace: SimTrace) -> None:
    last: dict[str, int] = {}
    for _, node, kind, detail in trace.events:
        if kind == "term_change":
            if detail["term"] < last.get(node, 0):
                raise SafetyViolation(
                    f"{node} term went backwards: {last[node]} -> {detail['term']}"
                )
            last[node] = detail["term"]


def check_exactly_once_commit(trace: SimTrace, expected_tx_ids: set[str]) -> None:
    """Liveness + uniqueness: every submitted tx committed exactly once."""
    for node, applied in trace.applied_by_node().items():
        # ignore crash-induced re-application: keep the latest full pass
        per_index: dict[int, str] = {}
        for index, _, tx_id in applied:
            per_index[index] = tx_id
        tx_ids = [t for t in per_index.values() if t is not None]
        if len(set(tx_ids)) != len(tx_ids):
            raise SafetyViolation(f"{node} committed a tx at two indexes")
    final = {}
    for node in trace.final_nodes.values():
        for entry in node.log[: node.commit_index]:
            tx_id = entry.tx.tx_id if entry.tx is not None else None
            if entry.index in final and final[entry.index] != tx_id:
                raise SafetyViolation("divergent committed entries across nodes")
            final[entry.index] = tx_id
    committed_ids = [t for t in final.values() if t is not None]
    if len(set(committed_ids)) != len(committed_ids):
        raise SafetyViolation("a tx_id occupies two committed log indexes")
    missing = expected_tx_ids - set(committed_ids)
    if missing:
        raise SafetyViolation(f"{len(missing)} submitted txs never committed")
    extra = set(committed_ids) - expected_tx_ids
    if extra:
        raise SafetyViolation(f"unexpected committed txs: {sorted(extra)[:3]}")


def check_all_safety(trace: SimTrace) -> None:
    check_election_safety(trace)
    check_log_matching(trace)
    check_leader_completeness(trace)
    check_state_machine_safety(trace)
    check_terms_monotonic(trace)
