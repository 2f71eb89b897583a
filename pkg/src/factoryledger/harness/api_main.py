"""API server child process for multi-process deployments.

Hosts the channel, the block cutter and the HTTP facade; reaches the
orderer cluster over its TCP client protocol. Prints "LISTENING <url>"
once the socket is bound so the parent can connect.
"""

from __future__ import annotations

import argparse
import json
import time
from pathlib import Path

from ..api.app import create_app
from ..api.auth import TokenTable
from ..api.server import ServerHandle
from ..api.service import LedgerService
from ..api.stream import EventBus
from ..ledger.channel import create_channel
from ..ledger.tx import OrgRegistry
from ..raft.cutter import BatchPolicy
from ..raft.live import TcpOrdererClient


def wall_ms() -> int:
    return int(time.time() * 1000)


def main(argv=None) -> None:
    parser = argparse.ArgumentParser(prog="factoryledger-api")
    parser.add_argument("--port", type=int, default=0)
    parser.add_argument("--channel", default="cell-defects")
    parser.add_argument("--orgs-file", required=True)
    parser.add_argument("--orderer", action="append", required=True,
                        help="node_id=host:port")
    parser.add_argument("--genesis-timestamp", type=int, default=0)
    parser.add_argument("--max-tx", type=int, default=10)
    parser.add_argument("--max-wait", type=int, default=20)
    # 500 live ticks at 10 ms = the 5 s synchronous commit wait
    parser.add_argument("--commit-budget", type=int, default=500)
    args = parser.parse_args(argv)

    registry = OrgRegistry(json.loads(Path(args.orgs_file).read_text()))
    channel = create_channel(
        args.channel, registry.orgs(), registry,
        genesis_timestamp=args.genesis_timestamp,
    )
    nodes = {}
    for item in args.orderer:
        node_id, addr = item.split("=", 1)
        host, port = addr.rsplit(":", 1)
        nodes[node_id] = (host, int(port))
    orderer = TcpOrdererClient(nodes)
    bus = EventBus()
    service = LedgerService(
        channel,
        registry,
        orderer,
        clock_ms=wall_ms,
        policy=BatchPolicy(max_tx=args.max_tx, max_wait=args.max_wait),
        bus=bus,
        commit_budget_ticks=args.commit_budget,
    )
    tokens = TokenTable(registry, clock_ms=wall_ms)
    app = create_app(service, tokens, bus)
    handle = ServerHandle(app, port=args.port)
    url = handle.start()
    print(f"LISTENING {url}", flush=True)
    try:
        while handle.thread.is_alive():
            service.deliver()  # drain txs that commit between write requests
            time.sleep(0.05)
    except KeyboardInterrupt:
        pass
    finally:
        handle.stop()


if __name__ == "__main__":
    main()
