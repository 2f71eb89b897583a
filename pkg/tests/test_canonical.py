"""Canonical serialization and record validation."""

import subprocess

import pytest

from factoryledger.canonical import canonical_bytes, sha256_hex
from factoryledger.records import (
    DefectRecord,
    Importance,
    RecordValidationError,
    validate_record_dict,
)


def sample_record(**overrides):
    data = {
        "record_id": "7f9c2ba4-e88f-5a63-a74c-e5b0cda9a6b1",
        "sensor_id": "R02_LoadCell",
        "fault_type": "OverPressure",
        "value": 912.5,
        "unit": "N",
        "importance": "Warning",
        "timestamp": 1700000123400,
        "shipment_id": None,
        "location": None,
        "tilt_status": None,
    }
    data.update(overrides)
    return data


def container_record(**overrides):
    data = sample_record(
        sensor_id="Container1_Gyroscope",
        fault_type="ExcessTilt",
        value=20.0,
        unit="deg",
        shipment_id="SHIP-001",
        location={"lat": 34.1, "lon": -80.9},
        tilt_status="TILTED",
    )
    data.update(overrides)
    return data


def test_field_order_does_not_matter():
    a = sample_record()
    b = dict(reversed(list(a.items())))
    assert canonical_bytes(a) == canonical_bytes(b)


def test_identical_records_identical_bytes():
    r1 = validate_record_dict(sample_record())
    r2 = validate_record_dict(sample_record())
    assert r1.canonical() == r2.canonical()


def test_single_field_change_changes_digest():
    base = validate_record_dict(sample_record()).canonical()
    for mutated in (
        sample_record(value=912.6),
        sample_record(timestamp=1700000123401),
        sample_record(fault_type="OverTemperature"),
        sample_record(importance="Alert"),
    ):
        other = validate_record_dict(mutated).canonical()
        assert sha256_hex(base) != sha256_hex(other)


def test_digest_matches_openssl():
    # independent SHA-256: pipe the canonical bytes through the openssl CLI
    data = validate_record_dict(container_record()).canonical()
    out = subprocess.run(
        ["openssl", "dgst", "-sha256", "-r"],
        input=data,
        capture_output=True,
        check=True,
    )
    assert out.stdout.decode().split()[0] == sha256_hex(data)


def test_nan_rejected():
    with pytest.raises(ValueError):
        canonical_bytes({"x": float("nan")})


def test_canonical_shape():
    record = DefectRecord(
        record_id="7f9c2ba4-e88f-5a63-a74c-e5b0cda9a6b1",
        sensor_id="R01_EStop",
        fault_type="EmergencyStop",
        value=1.0,
        unit="state",
        importance=Importance.ALERT,
        timestamp=1700000000100,
    )
    assert record.canonical() == (
        b'{"fault_type":"EmergencyStop","importance":"Alert","location":null,'
        b'"record_id":"7f9c2ba4-e88f-5a63-a74c-e5b0cda9a6b1","sensor_id":"R01_EStop",'
        b'"shipment_id":null,"tilt_status":null,"timestamp":1700000000100,'
        b'"unit":"state","value":1.0}'
    )


@pytest.mark.parametrize(
    "mutate,field",
    [
        (lambda d: d.pop("importance"), "importance"),
        (lambda d: d.update(importance="Critical"), "importance"),
        (lambda d: d.update(record_id="not-a-uuid"), "record_id"),
        (lambda d: d.update(value="high"), "value"),
        (lambda d: d.update(timestamp=-5), "timestamp"),
        (lambda d: d.update(bogus=1), "bogus"),
        (lambda d: d.update(shipment_id="SHIP-001"), "shipment_id"),
    ],
)
def test_validation_failures_name_the_field(mutate, field):
    data = sample_record()
    mutate(data)
    with pytest.raises(RecordValidationError) as err:
        validate_record_dict(data)
    assert err.value.field == field


def test_container_records_require_shipment_fields():
    validate_record_dict(container_record())  # valid as-is
    for missing in ("shipment_id", "location", "tilt_status"):
        with pytest.raises(RecordValidationError) as err:
            validate_record_dict(container_record(**{missing: None}))
        assert err.value.field == missing
    with pytest.raises(RecordValidationError):
        validate_record_dict(container_record(location={"lat": 1.0}))
    with pytest.raises(RecordValidationError):
        validate_record_dict(container_record(tilt_status="SIDEWAYS"))
