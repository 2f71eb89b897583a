"""HTTP facade: registration, defect writes, queries, chain access, stream.

Routes:
    POST /api/auth/register              {org_id, secret} -> token
    POST /api/defects                    bearer; DefectRecord JSON
    GET  /api/defects/shipment/{id}      bearer
    GET  /api/defects/sensor/{id}        bearer
    GET  /api/blocks/{n}                 bearer
    GET  /api/chain/verify               bearer
    GET  /api/stream                     bearer or ?token=; SSE, ?last_seq=
    POST /api/sim/{start|stop|inject}    bearer; only in demo mode
    GET  /api/sim/status                 bearer; only in demo mode

Every error body is {"code", "message"}; token and secret values never
appear in responses or logs.
"""

from __future__ import annotations

import asyncio
import json
from typing import Optional

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse, StreamingResponse

from ..ledger.channel import NotAMember
from ..records import RecordValidationError
from .auth import AuthError, TokenTable
from .service import LedgerService, NoLeaderAvailable
from .stream import EventBus


def _error(status: int, code: str, message: str) -> JSONResponse:
    return JSONResponse(
        status_code=status, content={"code": code, "message": message}
    )


def _unauthorized() -> JSONResponse:
    # one shape for missing, garbled, expired and unknown tokens
    return _error(401, "UNAUTHORIZED", "valid registration token required")


def _forbidden() -> JSONResponse:
    return _error(403, "FORBIDDEN", "org is not a member of this channel")


def create_app(
    service: LedgerService,
    tokens: TokenTable,
    bus: EventBus,
    sim_control=None,
    stream_poll_s: float = 0.05,
) -> FastAPI:
    app = FastAPI(title="factoryledger api", docs_url=None, redoc_url=None)

    def authed_org(request: Request, allow_query_token: bool = False) -> Optional[str]:
        header = request.headers.get("authorization", "")
        presented = None
        if header.lower().startswith("bearer "):
            presented = header[7:].strip()
        elif allow_query_token:
            presented = request.query_params.get("token")
        return tokens.org_for(presented)

    # --- auth ---------------------------------------------------------

    @app.post("/api/auth/register")
    async def register(request: Request):
        try:
            body = await request.json()
        except json.JSONDecodeError:
            return _unauthorized()
        if not isinstance(body, dict):
            return _unauthorized()
        try:
            token = tokens.register(body.get("org_id"), body.get("secret"))
        except AuthError:
            return _unauthorized()
        return JSONResponse(status_code=200, content=token.to_dict())

    # --- writes ---------------------------------------------------------

    @app.post("/api/defects")
    async def post_defect(request: Request):
        org = authed_org(request)
        if org is None:
            return _unauthorized()
        try:
            body = await request.json()
        except json.JSONDecodeError:
            return _error(422, "VALIDATION_FAILED", "body is not valid JSON")
        try:
            outcome = await asyncio.to_thread(service.submit_record, body, org)
        except RecordValidationError as exc:
            return _error(422, "VALIDATION_FAILED", str(exc))
        except NoLeaderAvailable:
            return _error(503, "NOT_LEADER_RETRY", "no ordering leader; retry")
        status = {"COMMITTED": 201, "DUPLICATE": 200, "PENDING": 202}[outcome.status]
        return JSONResponse(
            status_code=status,
            content={
                "status": outcome.status,
                "tx_id": outcome.tx_id,
                "block_number": outcome.block_number,
            },
        )

    # --- reads ---------------------------------------------------------

    @app.get("/api/defects/shipment/{shipment_id}")
    async def shipment_defects(shipment_id: str, request: Request):
        org = authed_org(request)
        if org is None:
            return _unauthorized()
        try:
            records = service.query_shipment(shipment_id, org)
        except NotAMember:
            return _forbidden()
        return JSONResponse(status_code=200, content=[r.to_dict() for r in records])

    @app.get("/api/defects/sensor/{sensor_id}")
    async def sensor_defects(sensor_id: str, request: Request):
        org = authed_org(request)
        if org is None:
            return _unauthorized()
        try:
            records = service.query_sensor(sensor_id, org)
        except NotAMember:
            return _forbidden()
        return JSONResponse(status_code=200, content=[r.to_dict() for r in records])

    @app.get("/api/blocks/{number}")
    async def get_block(number: int, request: Request):
        org = authed_org(request)
        if org is None:
            return _unauthorized()
        block = service.get_block(number)
        if block is None:
            return _error(404, "NOT_FOUND", f"no block {number}")
        return JSONResponse(status_code=200, content=block.to_dict())

    @app.get("/api/chain/verify")
    async def verify(request: Request):
        org = authed_org(request)
        if org is None:
            return _unauthorized()
        return JSONResponse(status_code=200, content=service.verify().to_dict())

    # --- stream ---------------------------------------------------------

    @app.get("/api/stream")
    async def stream(request: Request):
        org = authed_org(request, allow_query_token=True)
        if org is None:
            return _unauthorized()
        try:
            last_seq = int(request.query_params.get("last_seq", 0))
        except ValueError:
            last_seq = 0

        async def events():
            seen = last_seq
            yield ": connected\n\n"
            while True:
                if await request.is_disconnected():
                    return
                batch = bus.since(seen)
                for seq, kind, data in batch:
                    seen = seq
                    payload = json.dumps(data, sort_keys=True)
                    yield f"id: {seq}\nevent: {kind}\ndata: {payload}\n\n"
                await asyncio.sleep(stream_poll_s)

        return StreamingResponse(events(), media_type="text/event-stream")

    # --- simulator control (demo mode) -----------------------------------

    if sim_control is not None:

        @app.post("/api/sim/start")
        async def sim_start(request: Request):
            if authed_org(request) is None:
                return _unauthorized()
            sim_control.start()
            return JSONResponse(status_code=200, content=sim_control.status())

        @app.post("/api/sim/stop")
        async def sim_stop(request: Request):
            if authed_org(request) is None:
                return _unauthorized()
            sim_control.stop()
            return JSONResponse(status_code=200, content=sim_control.status())

        @app.get("/api/sim/status")
        async def sim_status(request: Request):
            if authed_org(request) is None:
                return _unauthorized()
            return JSONResponse(status_code=200, content=sim_control.status())

        @app.post("/api/sim/inject")
        async def sim_inject(request: Request):
            if authed_org(request) is None:
                return _unauthorized()
            try:
                body = await request.json()
                result = sim_control.inject(body)
            except (json.JSONDecodeError, KeyError, ValueError) as exc:
                return _error(422, "VALIDATION_FAILED", str(exc))
            return JSONResponse(status_code=200, content=result)

    return app
