"""Demo mode: the whole stack in one process, driven in real time.

A background thread advances the simulated cell at one tick per 100 ms
wall time, feeds readings to the gateway, submits defects through the
in-process orderer, and publishes telemetry and commits onto the event
bus. Operators steer it through the /api/sim/* endpoints: start, stop,
and fault injection.
"""

from __future__ import annotations

import threading
import time
from typing import Optional

from ..api.service import LedgerService
from ..api.stream import EventBus
from ..gateway.detector import Gateway
from ..sim.specs import FaultInjection, InjectionMode
from ..sim.world import SimWorld, inject, step

TICK_WALL_SECONDS = 0.1


class SimControl:
    """Start/stop/inject surface the dashboard talks to."""

    def __init__(
        self,
        world: SimWorld,
        gateway: Gateway,
        service: LedgerService,
        bus: EventBus,
        submit_org: str,
    ) -> None:
        self.world = world
        self.gateway = gateway
        self.service = service
        self.bus = bus
        self.submit_org = submit_org
        self.running = False
        self._lock = threading.Lock()
        self._thread: Optional[threading.Thread] = None
        self._stop_flag = False

    def start(self) -> None:
        with self._lock:
            if self.running:
                return  # idempotent
            self.running = True
            self.bus.publish_status(self.status())
            if self._thread is None or not self._thread.is_alive():
                self._stop_flag = False
                self._thread = threading.Thread(target=self._loop, daemon=True)
                self._thread.start()

    def stop(self) -> None:
        with self._lock:
            if not self.running:
                return
            self.running = False
            self.bus.publish_status(self.status())

    def shutdown(self) -> None:
        self._stop_flag = True
        self.running = False

    def status(self) -> dict:
        return {
            "running": self.running,
            "tick": self.world.tick,
            "sim_time_ms": self.world.timestamp_ms(self.world.tick),
            "sensors": len(self.world.roster),
            "chain_height": self.service.channel.height,
        }

    def inject(self, body: dict) -> dict:
        injection = FaultInjection(
            at_tick=int(body.get("at_tick", self.world.tick + 1)),
            sensor_id=body["sensor_id"],
            mode=InjectionMode(body["mode"]),
            magnitude=float(body.get("magnitude", 0.0)),
            duration_ticks=int(body.get("duration_ticks", 10)),
        )
        with self._lock:
            if injection.at_tick <= self.world.tick:
                injection = FaultInjection(
                    at_tick=self.world.tick + 1,
                    sensor_id=injection.sensor_id,
                    mode=injection.mode,
                    magnitude=injection.magnitude,
                    duration_ticks=injection.duration_ticks,
                )
            inject(self.world, injection)
        return {"scheduled": injection.to_dict()}

    def _loop(self) -> None:
        while not self._stop_flag:
            time.sleep(TICK_WALL_SECONDS)
            if not self.running:
                continue
            with self._lock:
                _, readings = step(self.world, 1)
            for reading in readings:
                self.bus.publish_telemetry(reading)
                record = self.gateway.process(reading)
                if record is not None:
                    self.service.submit_record(record.to_dict(), self.submit_org)
            self.service.deliver()
