"""Scenario execution: simulate, detect, order, commit, verify, compare.

InProcess mode wires the whole pipeline in one deterministic thread
(simulated clocks everywhere). MultiProcess mode spawns the orderer
cluster and the API server as child processes and drives them through
their public interfaces only: the record sets must come out identical.
"""

from __future__ import annotations

import json
import socket
import subprocess
import sys
import tempfile
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from ..api.client import ApiClient
from ..api.service import InProcessOrderer, LedgerService
from ..gateway.detector import Gateway
from ..gateway.outbox import Outbox
from ..gateway.rules import ThresholdRule, load_rules
from ..ledger.channel import create_channel
from ..ledger.tx import OrgRegistry
from ..raft.cutter import BatchPolicy
from ..records import DefectRecord, validate_record_dict
from ..sim.scenario import WorldScenario
from ..sim.world import step
from .report import ScenarioReport, diff_expected, _perfect_matching

# demo credentials for the desk deployment; override with an orgs file
DEFAULT_ORGS = {
    "Org1": "org1-demo-secret",
    "Org2": "org2-demo-secret",
    "Org3": "org3-demo-secret",
}
DEFAULT_CHANNEL = "cell-defects"

STEP_CHUNK_TICKS = 10


class PipelineFailure(RuntimeError):
    pass


class ScenarioParseError(ValueError):
    pass


@dataclass
class Scenario:
    name: str
    world: WorldScenario
    rules: list[ThresholdRule]
    expected: list[dict]
    channel_id: str = DEFAULT_CHANNEL
    submit_org: str = "Org2"
    orgs: dict = field(default_factory=lambda: dict(DEFAULT_ORGS))
    orderer_seed: int = 1
    cluster_size: int = 3
    batch_policy: BatchPolicy = field(default_factory=BatchPolicy)
    tilt_threshold: float = 10.0

    @classmethod
    def load(cls, path: str | Path) -> "Scenario":
        path = Path(path)
        try:
            data = json.loads(path.read_text(encoding="utf-8"))
            world = WorldScenario.from_dict(data["world"])
            rules_path = Path(data["rules"])
            if not rules_path.is_absolute():
                rules_path = path.parent / rules_path
            rules = load_rules(rules_path)
            orderer = data.get("orderer", {})
            return cls(
                name=data["name"],
                world=world,
                rules=rules,
                expected=data.get("expected", []),
                channel_id=data.get("channel_id", DEFAULT_CHANNEL),
                submit_org=data.get("submit_org", "Org2"),
                orgs=data.get("orgs", dict(DEFAULT_ORGS)),
                orderer_seed=orderer.get("seed", 1),
                cluster_size=orderer.get("cluster_size", 3),
                batch_policy=BatchPolicy(
                    max_tx=orderer.get("max_tx", 10),
                    max_wait=orderer.get("max_wait", 20),
                ),
                tilt_threshold=data.get("tilt_threshold", 10.0),
            )
        except (KeyError, ValueError, OSError) as exc:
            raise ScenarioParseError(f"{path}: {exc}") from exc

    def build_gateway(self) -> Gateway:
        constants = self.world.constants
        waypoints = sorted(constants.waypoints)
        return Gateway(
            self.rules,
            shipment_id=constants.shipment_id,
            initial_location=(waypoints[0][1], waypoints[0][2]),
            tilt_threshold=self.tilt_threshold,
        )


def _finish_report(
    scenario: Scenario,
    mode: str,
    committed: list[DefectRecord],
    chain_ok: bool,
    first_bad: Optional[int],
    height: int,
    tip_hash: str,
) -> ScenarioReport:
    matched = (
        len(scenario.expected) == len(committed)
        and _perfect_matching(scenario.expected, committed)
        and chain_ok
    )
    diffs = [] if matched else diff_expected(scenario.expected, committed)
    if not chain_ok:
        diffs.append("chain verification failed")
    return ScenarioReport(
        scenario=scenario.name,
        mode=mode,
        committed=committed,
        chain_ok=chain_ok,
        first_bad_block=first_bad,
        chain_height=height,
        tip_hash=tip_hash,
        matched=matched,
        diffs=diffs,
    )


def run_in_process(scenario: Scenario) -> ScenarioReport:
    world = scenario.world.build_world()
    gateway = scenario.build_gateway()
    registry = OrgRegistry(scenario.orgs)
    channel = create_channel(
        scenario.channel_id,
        set(scenario.orgs),
        registry,
        genesis_timestamp=world.start_epoch_ms,
    )
    orderer = InProcessOrderer(
        cluster_size=scenario.cluster_size, seed=scenario.orderer_seed
    )
    service = LedgerService(
        channel,
        registry,
        orderer,
        clock_ms=lambda: world.timestamp_ms(world.tick),
        policy=scenario.batch_policy,
    )

    remaining = scenario.world.duration_ticks
    while remaining > 0:
        chunk = min(STEP_CHUNK_TICKS, remaining)
        remaining -= chunk
        _, readings = step(world, chunk)
        for reading in readings:
            record = gateway.process(reading)
            if record is None:
                continue
            outcome = service.submit_record(record.to_dict(), scenario.submit_org)
            if outcome.status == "PENDING":
                raise PipelineFailure(
                    f"record {record.record_id} did not commit in time"
                )
    service.flush()

    verdict = service.verify()
    return _finish_report(
        scenario,
        "InProcess",
        list(channel.world_state.values()),
        verdict.ok,
        verdict.first_bad_block,
        channel.height,
        channel.tip_hash().hex(),
    )


def _free_ports(n: int) -> list[int]:
    socks = [socket.socket() for _ in range(n)]
    for s in socks:
        s.bind(("127.0.0.1", 0))
    ports = [s.getsockname()[1] for s in socks]
    for s in socks:
        s.close()
    return ports


def run_multi_process(scenario: Scenario) -> ScenarioReport:
    """Same pipeline, but orderers and API run as child processes."""
    n = scenario.cluster_size
    ports = _free_ports(n + 1)
    orderer_ports, api_port = ports[:n], ports[n]
    node_ids = [f"orderer{i}" for i in range(1, n + 1)]
    addrs = {nid: f"127.0.0.1:{port}" for nid, port in zip(node_ids, orderer_ports)}
    procs: list[subprocess.Popen] = []
    tmp = tempfile.TemporaryDirectory(prefix="factoryledger-mp-")
    try:
        orgs_file = Path(tmp.name) / "orgs.json"
        orgs_file.write_text(json.dumps(scenario.orgs))
        for i, nid in enumerate(node_ids):
            cmd = [
                sys.executable, "-m", "factoryledger.raft.live",
                "--node-id", nid,
                "--listen", addrs[nid],
                "--data-dir", tmp.name,
                "--seed", str(scenario.orderer_seed + i),
                "--no-fsync",
            ]
            for other in node_ids:
                if other != nid:
                    cmd += ["--peer", f"{other}={addrs[other]}"]
            procs.append(
                subprocess.Popen(
                    cmd, stdout=subprocess.PIPE, stderr=subprocess.DEVNULL,
                    text=True,
                )
            )
        for p in procs:
            line = p.stdout.readline()
            if not line.startswith("READY"):
                raise PipelineFailure(f"orderer failed to start: {line!r}")

        api_cmd = [
            sys.executable, "-m", "factoryledger.harness.api_main",
            "--port", str(api_port),
            "--channel", scenario.channel_id,
            "--orgs-file", str(orgs_file),
            "--genesis-timestamp", str(scenario.world.constants.start_epoch_ms),
            "--max-tx", str(scenario.batch_policy.max_tx),
            "--max-wait", str(scenario.batch_policy.max_wait),
        ]
        for nid in node_ids:
            api_cmd += ["--orderer", f"{nid}={addrs[nid]}"]
        api = subprocess.Popen(
            api_cmd, stdout=subprocess.PIPE, stderr=subprocess.DEVNULL, text=True
        )
        procs.append(api)
        line = api.stdout.readline()
        if not line.startswith("LISTENING"):
            raise PipelineFailure(f"api failed to start: {line!r}")
        base_url = line.split()[1]

        world = scenario.world.build_world()
        gateway = scenario.build_gateway()
        client = ApiClient(
            base_url, scenario.submit_org, scenario.orgs[scenario.submit_org]
        )
        outbox = Outbox(client)
        remaining = scenario.world.duration_ticks
        while remaining > 0:
            chunk = min(STEP_CHUNK_TICKS, remaining)
            remaining -= chunk
            _, readings = step(world, chunk)
            for reading in readings:
                record = gateway.process(reading)
                if record is not None:
                    outbox.submit(record)
        for _ in range(20):
            outbox.drain()
            if not outbox.pending:
                break
            time.sleep(0.2)
        outbox.require_empty()

        verify = client.verify_chain()
        committed: list[DefectRecord] = []
        tip_hash = ""
        number = 1
        while True:
            block = client.get_block(number)
            if block is None:
                break
            committed.extend(
                validate_record_dict(tx["payload"]) for tx in block["transactions"]
            )
            tip_hash = block["block_hash"]
            number += 1
        client.close()
        return _finish_report(
            scenario,
            "MultiProcess",
            committed,
            verify["ok"],
            verify["first_bad_block"],
            number,
            tip_hash,
        )
    finally:
        for p in procs:
            p.terminate()
        for p in procs:
            try:
                p.wait(timeout=5)
            except subprocess.TimeoutExpired:
                p.kill()
        tmp.cleanup()


def run_scenario(scenario: Scenario, mode: str = "InProcess") -> ScenarioReport:
    if mode == "InProcess":
        return run_in_process(scenario)
    if mode == "MultiProcess":
        return run_multi_process(scenario)
    raise ValueError(f"unknown mode {mode}")
