"""HTTP facade: auth flow, defect writes, queries, block access."""

import pytest

from factoryledger.ledger import query_by_sensor, query_by_shipment

from helpers_api import ORGS, auth, build_stack, make_client, record_dict, register


@pytest.fixture()
def stack():
    app, service, tokens, bus, clock = build_stack()
    client = make_client(app)
    yield client, service, tokens, bus, clock
    client.close()


# --- registration ------------------------------------------------------------


def test_register_issues_hex_token(stack):
    client, *_ = stack
    token = register(client, "Org2")
    assert len(token) == 64
    assert all(c in "0123456789abcdef" for c in token)


def test_register_failures_are_indistinguishable(stack):
    client, *_ = stack
    wrong = client.post(
        "/api/auth/register", json={"org_id": "Org2", "secret": "nope"}
    )
    unknown = client.post(
        "/api/auth/register", json={"org_id": "Ghost", "secret": "nope"}
    )
    assert wrong.status_code == unknown.status_code == 401
    assert wrong.json() == unknown.json()


def test_two_registrations_two_tokens(stack):
    client, _, _, _, clock = stack
    t1 = register(client, "Org1")
    t2 = register(client, "Org1")
    assert t1 != t2
    for t in (t1, t2):
        resp = client.get("/api/chain/verify", headers=auth(t))
        assert resp.status_code == 200


# --- writes ------------------------------------------------------------


def test_post_defect_commits_with_block_number(stack):
    client, service, *_ = stack
    token = register(client)
    resp = client.post("/api/defects", json=record_dict(1), headers=auth(token))
    assert resp.status_code == 201, resp.text
    body = resp.json()
    assert body["status"] == "COMMITTED"
    assert body["block_number"] >= 1
    assert len(body["tx_id"]) == 64
    assert service.channel.height == body["block_number"] + 1


def test_post_defect_twice_dedups(stack):
    client, service, *_ = stack
    token = register(client)
    first = client.post("/api/defects", json=record_dict(2), headers=auth(token))
    assert first.status_code == 201
    again = client.post("/api/defects", json=record_dict(2), headers=auth(token))
    assert again.status_code == 200
    assert again.json()["status"] == "DUPLICATE"
    committed = [
        tx
        for block in service.channel.chain[1:]
        for tx in block.transactions
        if tx.payload["record_id"] == record_dict(2)["record_id"]
    ]
    assert len(committed) == 1  # chain gained exactly one tx


def test_post_defect_validation_error_names_field(stack):
    client, *_ = stack
    token = register(client)
    bad = record_dict(3)
    bad["importance"] = "Critical"
    resp = client.post("/api/defects", json=bad, headers=auth(token))
    assert resp.status_code == 422
    body = resp.json()
    assert body["code"] == "VALIDATION_FAILED"
    assert "importance" in body["message"]


def test_post_defect_requires_token(stack):
    client, *_ = stack
    resp = client.post("/api/defects", json=record_dict(4))
    assert resp.status_code == 401


# --- reads ------------------------------------------------------------


def seed_records(client, token):
    for n, sensor in ((10, "Container1_Temperature"), (11, "Container1_Gyroscope"),
                      (12, "R02_LoadCell")):
        resp = client.post(
            "/api/defects", json=record_dict(n, sensor_id=sensor),
            headers=auth(token),
        )
        assert resp.status_code == 201


def test_get_shipment_defects(stack):
    client, service, *_ = stack
    token = register(client)
    seed_records(client, token)
    resp = client.get("/api/defects/shipment/SHIP-001", headers=auth(token))
    assert resp.status_code == 200
    rows = resp.json()
    assert len(rows) == 2
    assert rows == sorted(rows, key=lambda r: (r["timestamp"], r["record_id"]))
    for row in rows:
        assert row["tilt_status"] is not None
        assert row["location"] is not None
    direct = query_by_shipment(service.channel, "SHIP-001", "Org2")
    assert rows == [r.to_dict() for r in direct]


def test_get_sensor_defects_matches_direct_query(stack):
    client, service, *_ = stack
    token = register(client)
    seed_records(client, token)
    resp = client.get("/api/defects/sensor/R02_LoadCell", headers=auth(token))
    rows = resp.json()
    assert [r["sensor_id"] for r in rows] == ["R02_LoadCell"]
    for field in ("sensor_id", "value", "importance", "fault_type", "timestamp"):
        assert field in rows[0]
    direct = query_by_sensor(service.channel, "R02_LoadCell", "Org2")
    assert rows == [r.to_dict() for r in direct]


def test_unknown_shipment_is_empty_200(stack):
    client, *_ = stack
    token = register(client)
    resp = client.get("/api/defects/shipment/SHIP-999", headers=auth(token))
    assert resp.status_code == 200
    assert resp.json() == []


def test_expired_token_is_unauthorized(stack):
    client, _, _, _, clock = stack
    token = register(client)
    clock.advance(3600_000 + 1)
    resp = client.get("/api/defects/sensor/R02_LoadCell", headers=auth(token))
    assert resp.status_code == 401


def test_read_your_writes(stack):
    client, *_ = stack
    token = register(client)
    resp = client.post(
        "/api/defects",
        json=record_dict(20, sensor_id="Container1_Humidity"),
        headers=auth(token),
    )
    assert resp.status_code == 201
    rows = client.get(
        "/api/defects/shipment/SHIP-001", headers=auth(token)
    ).json()
    assert [r["record_id"] for r in rows] == [
        record_dict(20)["record_id"]
    ]


# --- blocks and verification -------------------------------------------------


def test_block_zero_is_genesis(stack):
    client, *_ = stack
    token = register(client)
    resp = client.get("/api/blocks/0", headers=auth(token))
    assert resp.status_code == 200
    block = resp.json()
    assert block["header"]["number"] == 0
    assert block["header"]["previous_hash"] == "0" * 64
    assert block["config"]["member_orgs"] == ["Org1", "Org2", "Org3"]


def test_block_beyond_tip_is_404(stack):
    client, *_ = stack
    token = register(client)
    resp = client.get("/api/blocks/999", headers=auth(token))
    assert resp.status_code == 404


def test_verify_endpoint_reports_ok(stack):
    client, *_ = stack
    token = register(client)
    seed_records(client, token)
    resp = client.get("/api/chain/verify", headers=auth(token))
    assert resp.status_code == 200
    assert resp.json()["ok"] is True


def test_verify_endpoint_reports_tamper(stack):
    client, service, *_ = stack
    token = register(client)
    seed_records(client, token)
    rid = next(iter(service.channel.world_state))
    service.channel.world_state[rid].value += 1.0
    resp = client.get("/api/chain/verify", headers=auth(token))
    assert resp.json()["ok"] is False


# --- hygiene ------------------------------------------------------------


def test_no_secret_or_token_echo(stack):
    client, *_ = stack
    token = register(client)
    resp = client.post("/api/defects", json={"nope": 1}, headers=auth(token))
    assert token not in resp.text
    assert ORGS["Org2"] not in resp.text
    resp2 = client.post(
        "/api/auth/register", json={"org_id": "Org2", "secret": "wrong"}
    )
    assert "wrong" not in resp2.text
