"""Scenario reports: expected-vs-actual matching and stable rendering.

A scenario's expectations are unordered record skeletons; a run matches
when skeletons and committed records form a perfect one-to-one pairing.
The JSON rendering is canonical (sorted keys, no volatile fields) so a
matching run produces a byte-identical golden file on any platform.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from ..canonical import canonical_bytes
from ..records import DefectRecord


def skeleton_matches(skeleton: dict, record: DefectRecord) -> bool:
    data = record.to_dict()
    for key, want in skeleton.items():
        if key == "location" and want == "present":
            if data.get("location") is None:
                return False
            continue
        if data.get(key) != want:
            return False
    return True


def _perfect_matching(skeletons: list[dict], records: list[DefectRecord]) -> bool:
    """Backtracking bipartite matching; inputs are desk-scale."""
    if len(skeletons) != len(records):
        return False
    candidates = [
        [i for i, r in enumerate(records) if skeleton_matches(s, r)]
        for s in skeletons
    ]
    taken: set[int] = set()

    def assign(k: int) -> bool:
        if k == len(candidates):
            return True
        for i in candidates[k]:
            if i not in taken:
                taken.add(i)
                if assign(k + 1):
                    return True
                taken.remove(i)
        return False

    return assign(0)


def diff_expected(
    skeletons: list[dict], records: list[DefectRecord]
) -> list[str]:
    diffs = []
    if len(skeletons) != len(records):
        diffs.append(
            f"expected {len(skeletons)} records, got {len(records)}"
        )
    for s in skeletons:
        hits = sum(1 for r in records if skeleton_matches(s, r))
        if hits == 0:
            diffs.append(f"no committed record matches skeleton {s}")
    matched_any = [
        r for r in records if not any(skeleton_matches(s, r) for s in skeletons)
    ]
    for r in matched_any:
        diffs.append(
            f"unexpected record {r.sensor_id}/{r.fault_type}@{r.timestamp}"
        )
    if not diffs and not _perfect_matching(skeletons, records):
        diffs.append("skeletons and records do not pair up one-to-one")
    return diffs


@dataclass
class ScenarioReport:
    scenario: str
    mode: str
    committed: list[DefectRecord]
    chain_ok: bool
    first_bad_block: Optional[int]
    chain_height: int
    tip_hash: str
    matched: bool
    diffs: list[str] = field(default_factory=list)

    def to_dict(self, include_volatile: bool = True) -> dict:
        records = sorted(
            self.committed, key=lambda r: (r.timestamp, r.record_id)
        )
        data = {
            "scenario": self.scenario,
            "committed": [r.to_dict() for r in records],
            "chain": {
                "ok": self.chain_ok,
                "first_bad_block": self.first_bad_block,
                "height": self.chain_height,
                "tip_hash": self.tip_hash,
            },
            "matched": self.matched,
            "diffs": sorted(self.diffs),
        }
        if include_volatile:
            data["mode"] = self.mode
        return data

    def golden_bytes(self) -> bytes:
        """Canonical JSON without run-mode metadata, for golden files."""
        return canonical_bytes(self.to_dict(include_volatile=False)) + b"\n"


def render_report(report: ScenarioReport, fmt: str = "text") -> str:
    if fmt == "json":
        return report.golden_bytes().decode("utf-8")
    lines = [
        f"scenario: {report.scenario} ({report.mode})",
        f"chain:    height={report.chain_height} ok={report.chain_ok}"
        f" tip={report.tip_hash[:16]}…",
        f"records:  {len(report.committed)} committed",
    ]
    for r in sorted(report.committed, key=lambda r: (r.timestamp, r.record_id)):
        extra = ""
        if r.shipment_id:
            extra = f" shipment={r.shipment_id} tilt={r.tilt_status}"
        lines.append(
            f"  - [{r.importance.value:7}] {r.sensor_id} {r.fault_type}"
            f" value={r.value:g} t={r.timestamp}{extra}"
        )
    lines.append(f"matched:  {report.matched}")
    for d in sorted(report.diffs):
        lines.append(f"  ! {d}")
    return "\n".join(lines) + "\n"
