"""HTTP gateway: ics feeds, a JSON API, and transaction submission.

The gateway holds no authority and no keys; every mutating request carries a
client-signed transaction envelope, and every read is a fee-free query
against the latest sealed state.  Feed access is keyed purely by address:
anyone who knows a user's address can fetch that user's view, which is the
documented trade-off of serving plain calendar clients.
"""

from __future__ import annotations

import threading

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse, PlainTextResponse

from .crypto import Address
from .errors import (
    AccessDenied,
    BadNonce,
    BadSignature,
    LedgerCalError,
    NonMonotonicTimestamp,
    UnknownContract,
    UnknownKind,
)
from .ledger import SignedTransaction
from .node import Node

FEED_CONTENT_TYPE = "text/calendar; charset=utf-8"


def _error(status: int, code: str, message: str) -> JSONResponse:
    return JSONResponse({"error": code, "message": message}, status_code=status)


def _parse_address(text: str) -> Address:
    try:
        return Address.parse(text)
    except ValueError as exc:
        raise _AddressError(str(exc)) from None


class _AddressError(Exception):
    pass


def _tx_from_envelope(body: dict) -> SignedTransaction:
    try:
        return SignedTransaction(
            sender=Address.parse(body["sender"]),
            public_key=bytes.fromhex(body["public_key"]),
            nonce=int(body["nonce"]),
            target=Address.parse(body["target"]),
            op=str(body["op"]),
            args=dict(body["args"]),
            signature=bytes.fromhex(body["signature"]),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise _AddressError(f"malformed transaction envelope: {exc}") from None


def create_app(node: Node, ui_dir: str | None = None) -> FastAPI:
    app = FastAPI(title="ledgercal gateway", docs_url=None, redoc_url=None)
    ledger = node.ledger
    # mutations funnel through the single sequencer; reads hit the immutable
    # latest-sealed state and need no lock (sealing swaps the state reference)
    write_lock = threading.Lock()

    @app.exception_handler(_AddressError)
    async def _bad_request(request: Request, exc: _AddressError):
        return _error(400, "malformed_request", str(exc))

    # --- reads ---------------------------------------------------------------

    @app.get("/feed/{contract}/{user_spec}")
    def feed(contract: str, user_spec: str):
        if not user_spec.endswith(".ics"):
            return _error(400, "malformed_request", "feed path must end in .ics")
        contract_addr = _parse_address(contract)
        user = _parse_address(user_spec[: -len(".ics")])
        try:
            text = ledger.query(contract_addr, "get_events_ical", {}, sender=user)
        except UnknownContract as exc:
            return _error(404, exc.code, exc.message)
        except AccessDenied as exc:
            return _error(403, exc.code, exc.message)
        except LedgerCalError as exc:
            return _error(400, exc.code, exc.message)
        return PlainTextResponse(text, media_type=FEED_CONTENT_TYPE)

    def _read(contract: str, user: str, op: str):
        contract_addr = _parse_address(contract)
        user_addr = _parse_address(user)
        try:
            return JSONResponse(ledger.query(contract_addr, op, {}, sender=user_addr))
        except UnknownContract as exc:
            return _error(404, exc.code, exc.message)
        except AccessDenied as exc:
            return _error(403, exc.code, exc.message)
        except LedgerCalError as exc:
            return _error(400, exc.code, exc.message)

    @app.get("/api/events")
    def api_events(contract: str, user: str):
        return _read(contract, user, "get_events_obj")

    @app.get("/api/messages")
    def api_messages(contract: str, user: str):
        return _read(contract, user, "get_msg_timed")

    @app.get("/api/access")
    def api_access(contract: str, user: str):
        return _read(contract, user, "user_access_level")

    @app.get("/api/grants")
    def api_grants(contract: str, user: str):
        return _read(contract, user, "list_grants")

    @app.get("/api/account")
    def api_account(address: str):
        addr = _parse_address(address)
        info = ledger.account_info(addr)
        info["next_nonce"] = ledger.next_nonce(addr)  # accounts for pooled txs
        return info

    @app.get("/api/contracts")
    def api_contracts():
        return [
            {"address": str(rec.address), "kind": rec.kind, "owner": str(rec.owner)}
            for rec in sorted(ledger.state.contracts.values(), key=lambda r: r.address)
        ]

    @app.get("/api/chain/head")
    def api_head():
        head = ledger.blocks[-1]
        return {
            "height": head.height,
            "timestamp": head.timestamp,
            "state_digest": ledger.state.digest().hex(),
            "time": ledger.state.current_time,
        }

    # --- writes ----------------------------------------------------------------

    @app.post("/api/tx")
    async def api_tx(request: Request):
        try:
            body = await request.json()
        except Exception:
            return _error(400, "malformed_request", "body is not JSON")
        tx = _tx_from_envelope(body)
        with write_lock:
            try:
                receipt = ledger.submit(tx)
            except (BadSignature, BadNonce, UnknownContract, UnknownKind) as exc:
                return JSONResponse({"error": exc.code, "message": exc.message}, status_code=422)
            if node.dev_mode and getattr(node, "auto_seal", False):
                node.seal()
        return receipt

    @app.get("/api/tx/{tx_id}")
    def api_tx_status(tx_id: str):
        receipt = ledger.receipt(tx_id)
        return {"tx_id": tx_id, **receipt}

    # --- dev sequencer control ----------------------------------------------------

    @app.post("/admin/seal")
    def admin_seal():
        if not node.dev_mode:
            return _error(403, "not_dev_mode", "sealing is only exposed in dev mode")
        try:
            with write_lock:
                block = node.seal()
        except NonMonotonicTimestamp as exc:
            return _error(409, exc.code, exc.message)
        return {"height": block.height, "included": len(block.transactions),
                "state_digest": block.state_digest.hex()}

    @app.post("/admin/clock")
    async def admin_clock(request: Request):
        if not node.dev_mode:
            return _error(403, "not_dev_mode", "the clock is only exposed in dev mode")
        body = await request.json()
        if "set" in body:
            node.clock.set(int(body["set"]))
        if "advance" in body:
            node.clock.advance(int(body["advance"]))
        return {"now": node.clock.now()}

    if ui_dir:
        from fastapi.staticfiles import StaticFiles

        app.mount("/ui", StaticFiles(directory=ui_dir, html=True), name="ui")

    return app
