"""Defect detection: debounced, edge-triggered rule evaluation.

Only rule-violating readings produce output, and only one record per
violation episode: a rule "opens" when its violation has persisted for
the debounce window and emits a single record; it closes (re-arming)
when a compliant reading arrives. When several rules become ready on the
same reading, the lowest rule_id emits and the rest emit on their next
violating reading, so every episode is still reported exactly once.
"""

from __future__ import annotations

import uuid
from dataclasses import dataclass, field
from typing import Optional

from ..records import DefectRecord, is_container_sensor
from ..sim.specs import TICK_MS, SensorReading
from .rules import ThresholdRule

# namespace for deriving stable record ids (v5 UUIDs), so a retried
# submission of the same detection carries the same record_id
RECORD_NS = uuid.UUID("6ba7b810-9dad-11d1-80b4-00c04fd430c8")


class NotAContainerSensor(ValueError):
    pass


def make_record_id(rule_id: str, sensor_id: str, timestamp: int) -> str:
    return str(uuid.uuid5(RECORD_NS, f"{rule_id}|{sensor_id}|{timestamp}"))


@dataclass
class _RuleTracker:
    violating_since: Optional[int] = None  # timestamp ms of first violation
    open: bool = False


@dataclass
class DebounceState:
    trackers: dict[str, _RuleTracker] = field(default_factory=dict)

    def tracker(self, rule_id: str) -> _RuleTracker:
        t = self.trackers.get(rule_id)
        if t is None:
            t = _RuleTracker()
            self.trackers[rule_id] = t
        return t


@dataclass
class ContainerSnapshot:
    """Latest container telemetry, used to enrich shipment records."""

    shipment_id: str
    lat: float
    lon: float
    gyro: float = 0.0
    tilt_threshold: float = 10.0

    def observe(self, reading: SensorReading) -> None:
        if reading.sensor_id.endswith("_GpsLat"):
            self.lat = reading.value
        elif reading.sensor_id.endswith("_GpsLon"):
            self.lon = reading.value
        elif reading.sensor_id.endswith("_Gyroscope"):
            self.gyro = reading.value

    @property
    def tilt_status(self) -> str:
        return "TILTED" if abs(self.gyro) > self.tilt_threshold else "UPRIGHT"


def enrich_shipment(record: DefectRecord, snapshot: ContainerSnapshot) -> DefectRecord:
    """Fill shipment id, latest location and tilt status on a container record."""
    if not is_container_sensor(record.sensor_id):
        raise NotAContainerSensor(record.sensor_id)
    record.shipment_id = snapshot.shipment_id
    record.location = {"lat": snapshot.lat, "lon": snapshot.lon}
    record.tilt_status = snapshot.tilt_status
    return record


def evaluate(
    reading: SensorReading,
    rules: list[ThresholdRule],
    state: DebounceState,
) -> tuple[Optional[DefectRecord], DebounceState]:
    """Apply every rule for this sensor; readings violating none produce nothing.

    Unknown sensors pass through silently by design: the gateway filters,
    it does not inventory.
    """
    emitted: Optional[DefectRecord] = None
    for rule in sorted(
        (r for r in rules if r.sensor_id == reading.sensor_id),
        key=lambda r: r.rule_id,
    ):
        tracker = state.tracker(rule.rule_id)
        if not rule.violated_by(reading.value):
            tracker.violating_since = None
            tracker.open = False
            continue
        if tracker.violating_since is None:
            tracker.violating_since = reading.timestamp
        persisted = reading.timestamp - tracker.violating_since
        if tracker.open or persisted < rule.debounce_ticks * TICK_MS:
            continue
        if emitted is None:
            emitted = DefectRecord(
                record_id=make_record_id(
                    rule.rule_id, reading.sensor_id, reading.timestamp
                ),
                sensor_id=reading.sensor_id,
                fault_type=rule.fault_type,
                value=reading.value,
                unit=reading.unit,
                importance=rule.importance,
                timestamp=reading.timestamp,
            )
            tracker.open = True
        # else: ready but another rule took this reading; emits next time
    return emitted, state


class Gateway:
    """Folds the reading stream into defect records.

    Pure with respect to the stream: same readings + same rules produce
    the same records. Container records are enriched with shipment
    context tracked from the stream itself.
    """

    def __init__(
        self,
        rules: list[ThresholdRule],
        shipment_id: str = "SHIP-001",
        initial_location: tuple[float, float] = (34.0, -81.0),
        tilt_threshold: float = 10.0,
    ) -> None:
        self.rules_by_sensor: dict[str, list[ThresholdRule]] = {}
        for rule in sorted(rules, key=lambda r: r.rule_id):
            self.rules_by_sensor.setdefault(rule.sensor_id, []).append(rule)
        self.state = DebounceState()
        self.snapshot = ContainerSnapshot(
            shipment_id=shipment_id,
            lat=initial_location[0],
            lon=initial_location[1],
            tilt_threshold=tilt_threshold,
        )

    def process(self, reading: SensorReading) -> Optional[DefectRecord]:
        if is_container_sensor(reading.sensor_id):
            self.snapshot.observe(reading)
        rules = self.rules_by_sensor.get(reading.sensor_id)
        if not rules:
            return None
        record, _ = evaluate(reading, rules, self.state)
        if record is not None and is_container_sensor(record.sensor_id):
            record = enrich_shipment(record, self.snapshot)
        return record

    def process_stream(self, readings) -> list[DefectRecord]:
        records = []
        for reading in readings:
            record = self.process(reading)
            if record is not None:
                records.append(record)
        return records
