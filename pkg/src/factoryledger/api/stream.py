"""Event fan-out for the server-push stream.

Two event kinds ride one sequence: `telemetry` (sensor readings,
downsampled to at most one per sensor per 100 ms of stream time) and
`defect_committed` (record + block number). Events are kept in a ring
buffer so reconnecting clients can resume from their last-seen sequence
number without re-delivery.
"""

from __future__ import annotations

from collections import deque
from typing import Optional

from ..records import DefectRecord
from ..sim.specs import SensorReading

TELEMETRY_MIN_GAP_MS = 100  # at most 10 telemetry events/s per sensor


class EventBus:
    def __init__(self, buffer_size: int = 100_000) -> None:
        self.seq = 0
        self.buffer: deque[tuple[int, str, dict]] = deque(maxlen=buffer_size)
        self._last_telemetry_ms: dict[str, int] = {}

    def _push(self, kind: str, data: dict) -> int:
        self.seq += 1
        self.buffer.append((self.seq, kind, data))
        return self.seq

    def publish_telemetry(self, reading: SensorReading) -> Optional[int]:
        last = self._last_telemetry_ms.get(reading.sensor_id)
        if last is not None and reading.timestamp - last < TELEMETRY_MIN_GAP_MS:
            return None
        self._last_telemetry_ms[reading.sensor_id] = reading.timestamp
        return self._push("telemetry", reading.to_dict())

    def publish_defect(self, record: DefectRecord, block_number: int) -> int:
        data = record.to_dict()
        data["block_number"] = block_number
        return self._push("defect_committed", data)

    def publish_status(self, status: dict) -> int:
        return self._push("sim_status", status)

    def since(self, last_seq: int, limit: int = 500) -> list[tuple[int, str, dict]]:
        """Events with seq > last_seq, oldest first."""
        return [item for item in self.buffer if item[0] > last_seq][:limit]
