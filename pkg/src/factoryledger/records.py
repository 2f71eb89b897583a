"""Defect records: the payload stored on-chain.

A DefectRecord describes one detected anomaly: which sensor, what kind of
fault, the sensor value at the time, how severe (Alert disrupts the
process, Warning lets it continue), and — for supply-chain container
sensors only — shipment id, GPS location and tilt status.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum
from typing import Any, Optional

from .canonical import canonical_bytes


class Importance(str, Enum):
    ALERT = "Alert"
    WARNING = "Warning"


_UUID_RE = re.compile(
    r"^[0-9a-f]{8}-[0-9a-f]{4}-[0-9a-f]{4}-[0-9a-f]{4}-[0-9a-f]{12}$"
)


def asset_label(sensor_id: str) -> str:
    return sensor_id.split("_", 1)[0]


def is_container_sensor(sensor_id: str) -> bool:
    return asset_label(sensor_id).startswith("Container")


class RecordValidationError(ValueError):
    """Raised when a DefectRecord breaks one of its invariants.

    `field` names the offending field so API error bodies can itemize.
    """

    def __init__(self, field: str, message: str) -> None:
        self.field = field
        super().__init__(f"{field}: {message}")


@dataclass
class DefectRecord:
    record_id: str
    sensor_id: str
    fault_type: str
    value: float
    unit: str
    importance: Importance
    timestamp: int  # simulated epoch milliseconds
    shipment_id: Optional[str] = None
    location: Optional[dict] = None  # {"lat": deg, "lon": deg}
    tilt_status: Optional[str] = None  # "TILTED" | "UPRIGHT"

    def to_dict(self) -> dict:
        return {
            "record_id": self.record_id,
            "sensor_id": self.sensor_id,
            "fault_type": self.fault_type,
            "value": self.value,
            "unit": self.unit,
            "importance": self.importance.value,
            "timestamp": self.timestamp,
            "shipment_id": self.shipment_id,
            "location": dict(self.location) if self.location else None,
            "tilt_status": self.tilt_status,
        }

    def canonical(self) -> bytes:
        return canonical_bytes(self.to_dict())


def validate_record_dict(data: Any) -> DefectRecord:
    """Parse and validate an untrusted record payload.

    Raises RecordValidationError on the first invariant breach; used by
    both chaincode-style transaction validation and the API write path.
    """
    if not isinstance(data, dict):
        raise RecordValidationError("payload", "record must be a JSON object")

    def need(field: str, types: tuple) -> Any:
        if field not in data:
            raise RecordValidationError(field, "missing required field")
        val = data[field]
        if not isinstance(val, types) or isinstance(val, bool):
            raise RecordValidationError(field, f"expected {types[0].__name__}")
        return val

    record_id = need("record_id", (str,))
    if not _UUID_RE.match(record_id):
        raise RecordValidationError("record_id", "not a lowercase UUID")
    sensor_id = need("sensor_id", (str,))
    fault_type = need("fault_type", (str,))
    if not fault_type:
        raise RecordValidationError("fault_type", "must be non-empty")
    value = float(need("value", (int, float)))
    if value != value or value in (float("inf"), float("-inf")):
        raise RecordValidationError("value", "must be finite")
    unit = need("unit", (str,))
    raw_importance = need("importance", (str,))
    try:
        importance = Importance(raw_importance)
    except ValueError:
        raise RecordValidationError(
            "importance", f"must be one of {[i.value for i in Importance]}"
        ) from None
    timestamp = need("timestamp", (int,))
    if timestamp < 0:
        raise RecordValidationError("timestamp", "must be >= 0")

    shipment_id = data.get("shipment_id")
    location = data.get("location")
    tilt_status = data.get("tilt_status")

    container = is_container_sensor(sensor_id)
    for field, val in (
        ("shipment_id", shipment_id),
        ("location", location),
        ("tilt_status", tilt_status),
    ):
        if container and val is None:
            raise RecordValidationError(field, "required for container sensors")
        if not container and val is not None:
            raise RecordValidationError(field, "only allowed for container sensors")

    if container:
        if not isinstance(shipment_id, str) or not shipment_id:
            raise RecordValidationError("shipment_id", "must be a non-empty string")
        if (
            not isinstance(location, dict)
            or set(location) != {"lat", "lon"}
            or not all(isinstance(location[k], (int, float)) for k in ("lat", "lon"))
        ):
            raise RecordValidationError("location", "must be {lat, lon} degrees")
        if tilt_status not in ("TILTED", "UPRIGHT"):
            raise RecordValidationError("tilt_status", "must be TILTED or UPRIGHT")

    unknown = set(data) - {
        "record_id",
        "sensor_id",
        "fault_type",
        "value",
        "unit",
        "importance",
        "timestamp",
        "shipment_id",
        "location",
        "tilt_status",
    }
    if unknown:
        raise RecordValidationError(sorted(unknown)[0], "unknown field")

    return DefectRecord(
        record_id=record_id,
        sensor_id=sensor_id,
        fault_type=fault_type,
        value=value,
        unit=unit,
        importance=importance,
        timestamp=timestamp,
        shipment_id=shipment_id,
        location=dict(location) if location else None,
        tilt_status=tilt_status,
    )
