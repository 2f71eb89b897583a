"""Command line: run scenarios, query the ledger, verify chains, demo.

Exit codes for `run`: 0 expectations matched, 1 mismatch, 2 pipeline
failure.
"""

from __future__ import annotations

import json
import sys
import time
from pathlib import Path

import click

from ..api.app import create_app
from ..api.auth import TokenTable
from ..api.client import ApiClient, ClientRejected, ClientUnreachable
from ..api.server import ServerHandle, serve
from ..api.service import InProcessOrderer, LedgerService
from ..api.stream import EventBus
from ..gateway.outbox import Outbox
from ..gateway.rules import load_rules
from ..gateway.detector import Gateway
from ..ledger.channel import create_channel, verify_chain
from ..ledger.store import load_channel
from ..ledger.tx import OrgRegistry
from ..sim.world import build_default_world, read_readings_ndjson
from .demo import SimControl
from .runner import DEFAULT_CHANNEL, DEFAULT_ORGS, PipelineFailure, Scenario, run_scenario
from .report import render_report


@click.group()
def main() -> None:
    """Desk-scale factory-to-ledger pipeline."""


def _registry(orgs_file: str | None) -> OrgRegistry:
    if orgs_file:
        return OrgRegistry.load(orgs_file)
    return OrgRegistry(DEFAULT_ORGS)


def _build_stack(channel_id: str, registry: OrgRegistry, with_world: bool,
                 seed: int = 0):
    bus = EventBus()
    channel = create_channel(
        channel_id, registry.orgs(), registry, genesis_timestamp=0
    )
    orderer = InProcessOrderer(cluster_size=3, seed=seed)
    service = LedgerService(
        channel, registry, orderer,
        clock_ms=lambda: int(time.time() * 1000), bus=bus,
    )
    tokens = TokenTable(registry, clock_ms=lambda: int(time.time() * 1000))
    sim_control = None
    if with_world:
        world = build_default_world(seed)
        from ..gateway.rules import default_rules

        constants = world.constants
        waypoints = sorted(constants.waypoints)
        gateway = Gateway(
            default_rules(),
            shipment_id=constants.shipment_id,
            initial_location=(waypoints[0][1], waypoints[0][2]),
        )
        sim_control = SimControl(world, gateway, service, bus, submit_org="Org2")
    app = create_app(service, tokens, bus, sim_control=sim_control)
    return app, sim_control


@main.command()
@click.option("--port", default=8000, show_default=True)
@click.option("--channel", "channel_id", default=DEFAULT_CHANNEL, show_default=True)
@click.option("--orgs-file", default=None, help="JSON: org_id -> secret")
def up(port: int, channel_id: str, orgs_file: str | None) -> None:
    """Serve the API over an in-process orderer (no simulation running)."""
    app, _ = _build_stack(channel_id, _registry(orgs_file), with_world=False)
    serve(app, port=port)


@main.command()
@click.argument("scenario_path", type=click.Path(exists=True))
@click.option("--mode", type=click.Choice(["InProcess", "MultiProcess"]),
              default="InProcess", show_default=True)
@click.option("--format", "fmt", type=click.Choice(["text", "json"]),
              default="text", show_default=True)
@click.option("--out", type=click.Path(), default=None,
              help="also write the canonical JSON report here")
@click.option("--golden", type=click.Path(exists=True), default=None,
              help="compare the canonical report against this golden file")
def run(scenario_path: str, mode: str, fmt: str, out: str | None,
        golden: str | None) -> None:
    """Run a scenario end to end and check its expectations."""
    try:
        scenario = Scenario.load(scenario_path)
        report = run_scenario(scenario, mode=mode)
    except PipelineFailure as exc:
        click.echo(f"pipeline failure: {exc}", err=True)
        sys.exit(2)
    except Exception as exc:  # scenario parse errors and child failures
        click.echo(f"error: {exc}", err=True)
        sys.exit(2)
    click.echo(render_report(report, fmt), nl=False)
    if out:
        Path(out).write_bytes(report.golden_bytes())
    if golden:
        expected = Path(golden).read_bytes()
        if report.golden_bytes() != expected:
            click.echo("golden mismatch", err=True)
            sys.exit(1)
    sys.exit(0 if report.matched else 1)


@main.command()
@click.argument("kind", type=click.Choice(["shipment", "sensor"]))
@click.argument("target_id")
@click.option("--api-url", default="http://127.0.0.1:8000", show_default=True)
@click.option("--org", default="Org2", show_default=True)
@click.option("--secret", default=DEFAULT_ORGS["Org2"])
def query(kind: str, target_id: str, api_url: str, org: str, secret: str) -> None:
    """Fetch committed defect records for a shipment or a sensor."""
    client = ApiClient(api_url, org, secret)
    try:
        if kind == "shipment":
            rows = client.shipment_defects(target_id)
        else:
            rows = client.sensor_defects(target_id)
    except (ClientUnreachable, ClientRejected) as exc:
        click.echo(f"query failed: {exc}", err=True)
        sys.exit(2)
    click.echo(json.dumps(rows, indent=2, sort_keys=True))
    client.close()


@main.command()
@click.option("--api-url", default=None, help="verify a running node over HTTP")
@click.option("--chain-file", type=click.Path(exists=True), default=None,
              help="verify an on-disk chain file")
@click.option("--orgs-file", default=None)
@click.option("--org", default="Org2", show_default=True)
@click.option("--secret", default=DEFAULT_ORGS["Org2"])
def verify(api_url: str | None, chain_file: str | None, orgs_file: str | None,
           org: str, secret: str) -> None:
    """Re-check every hash, link and state replay of a chain."""
    if chain_file:
        channel, _ = load_channel(chain_file, _registry(orgs_file))
        report = verify_chain(channel).to_dict()
    elif api_url:
        client = ApiClient(api_url, org, secret)
        report = client.verify_chain()
        client.close()
    else:
        raise click.UsageError("need --api-url or --chain-file")
    click.echo(json.dumps(report, indent=2, sort_keys=True))
    sys.exit(0 if report["ok"] else 1)


@main.command()
@click.option("--rules", "rules_path", type=click.Path(exists=True), required=True)
@click.option("--api-url", required=True)
@click.option("--org", required=True)
@click.option("--secret", required=True)
@click.option("--spill", type=click.Path(), default=None,
              help="outbox spill file for crash recovery")
@click.option("--shipment-id", default="SHIP-001", show_default=True)
def gateway(rules_path: str, api_url: str, org: str, secret: str,
            spill: str | None, shipment_id: str) -> None:
    """Run the edge gateway over an NDJSON reading stream on stdin."""
    rules = load_rules(rules_path)
    gw = Gateway(rules, shipment_id=shipment_id)
    client = ApiClient(api_url, org, secret)
    outbox = Outbox(client, spill_path=spill)
    submitted = 0
    for reading in read_readings_ndjson(sys.stdin):
        record = gw.process(reading)
        if record is not None:
            outbox.submit(record)
            submitted += 1
    outbox.drain()
    click.echo(f"gateway done: {submitted} records submitted,"
               f" {len(outbox.pending)} still queued", err=True)
    client.close()
    sys.exit(0 if not outbox.pending else 1)


@main.command()
@click.option("--port", default=8000, show_default=True)
@click.option("--seed", default=0, show_default=True)
def demo(port: int, seed: int) -> None:
    """Start the full live stack and run the cell in real time."""
    app, sim_control = _build_stack(
        DEFAULT_CHANNEL, OrgRegistry(DEFAULT_ORGS), with_world=True, seed=seed
    )
    dist = Path(__file__).resolve().parents[3] / "frontend" / "dist"
    if dist.exists():
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=dist, html=True), name="dashboard")
    handle = ServerHandle(app, port=port)
    url = handle.start()
    sim_control.start()
    click.echo(f"api:       {url}/api")
    if dist.exists():
        click.echo(f"dashboard: {url}/")
    else:
        click.echo("dashboard: frontend/dist not built; API only")
    click.echo(f"login:     Org2 / {DEFAULT_ORGS['Org2']}")
    click.echo("cell is RUNNING; Ctrl-C to stop")
    try:
        while True:
            time.sleep(1)
    except KeyboardInterrupt:
        sim_control.shutdown()
        handle.stop()


if __name__ == "__main__":
    main()
