"""HTTP client used by the edge gateway and tooling.

Registers for a token, posts defect records, re-registers once on auth
expiry, and surfaces the three failure families the gateway cares about:
rejected (validation), unreachable (network), unauthorized.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import httpx


class ClientUnreachable(Exception):
    pass


class ClientRejected(Exception):
    def __init__(self, status_code: int, message: str) -> None:
        self.status_code = status_code
        super().__init__(f"{status_code}: {message}")


class ClientUnauthorized(Exception):
    pass


@dataclass
class SubmitReceipt:
    tx_id: str
    status: str  # Committed | Duplicate | Pending
    block_number: Optional[int] = None


_STATUS_MAP = {"COMMITTED": "Committed", "DUPLICATE": "Duplicate", "PENDING": "Pending"}


class ApiClient:
    def __init__(
        self,
        base_url: str,
        org_id: str,
        secret: str,
        timeout: float = 10.0,
        transport: Optional[httpx.BaseTransport] = None,
    ) -> None:
        self.org_id = org_id
        self._secret = secret
        self.http = httpx.Client(
            base_url=base_url, timeout=timeout, transport=transport
        )
        self.token: Optional[str] = None

    def close(self) -> None:
        self.http.close()

    # --- auth ---------------------------------------------------------

    def register(self) -> str:
        try:
            resp = self.http.post(
                "/api/auth/register",
                json={"org_id": self.org_id, "secret": self._secret},
            )
        except httpx.HTTPError as exc:
            raise ClientUnreachable(str(exc)) from exc
        if resp.status_code != 200:
            raise ClientUnauthorized()
        self.token = resp.json()["token"]
        return self.token

    def _headers(self) -> dict:
        if self.token is None:
            self.register()
        return {"Authorization": f"Bearer {self.token}"}

    # --- writes ---------------------------------------------------------

    def post_defect(self, record_dict: dict) -> SubmitReceipt:
        """One POST attempt with a single re-register on auth failure."""
        for attempt in (1, 2):
            try:
                resp = self.http.post(
                    "/api/defects", json=record_dict, headers=self._headers()
                )
            except httpx.HTTPError as exc:
                raise ClientUnreachable(str(exc)) from exc
            if resp.status_code == 401 and attempt == 1:
                self.token = None  # expired: re-register once and retry
                continue
            break
        if resp.status_code in (200, 201, 202):
            body = resp.json()
            return SubmitReceipt(
                tx_id=body["tx_id"],
                status=_STATUS_MAP[body["status"]],
                block_number=body.get("block_number"),
            )
        if resp.status_code == 401:
            raise ClientUnauthorized()
        if resp.status_code == 503:
            raise ClientUnreachable("no ordering leader")
        raise ClientRejected(resp.status_code, resp.json().get("message", ""))

    # --- reads ---------------------------------------------------------

    def _get(self, path: str):
        for attempt in (1, 2):
            try:
                resp = self.http.get(path, headers=self._headers())
            except httpx.HTTPError as exc:
                raise ClientUnreachable(str(exc)) from exc
            if resp.status_code == 401 and attempt == 1:
                self.token = None
                continue
            break
        if resp.status_code == 401:
            raise ClientUnauthorized()
        if resp.status_code == 403:
            raise ClientRejected(403, "not a member")
        if resp.status_code == 404:
            return None
        resp.raise_for_status()
        return resp.json()

    def shipment_defects(self, shipment_id: str) -> list:
        return self._get(f"/api/defects/shipment/{shipment_id}")

    def sensor_defects(self, sensor_id: str) -> list:
        return self._get(f"/api/defects/sensor/{sensor_id}")

    def get_block(self, number: int):
        return self._get(f"/api/blocks/{number}")

    def verify_chain(self) -> dict:
        return self._get("/api/chain/verify")
