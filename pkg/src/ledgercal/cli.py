"""Operator command line: keys, node lifecycle, contract ops, feeds, scorecards.

Every subcommand is a thin adapter over one module operation, reached
through the gateway's JSON API (or an embedded node for ``node run``).
Exit codes: 0 success, 2 usage, 3 transport, 4 contract rejection.
"""

from __future__ import annotations

import json
import sys
import time
from pathlib import Path

import click
import httpx

from .crypto import Address, ZERO_ADDRESS
from .encoding import iter_length_prefixed
from .errors import ChainVerificationError
from .ical import parse_unix
from .keystore import Keystore
from .ledger import CHAIN_MAGIC, Block, ChainVerifier, GenesisConfig, FeeSchedule, SignedTransaction
from .node import Node, parse_alloc
from .scorecard import (
    load_answers,
    load_rubric,
    render_csv,
    render_figure,
    render_json,
    render_report,
    score,
)

EXIT_TRANSPORT = 3
EXIT_REJECTED = 4


def _fail(code: str, message: str, exit_code: int) -> None:
    click.echo(f"error: {code}: {message}", err=True)
    sys.exit(exit_code)


def parse_when(text: str) -> int:
    """Accept unix seconds or ISO-8601 (UTC) like 2020-01-31T12:30:00."""
    if text.isdigit():
        return int(text)
    iso = text.strip().replace(" ", "T")
    if "T" not in iso:
        iso += "T00:00:00"
    date_part, _, time_part = iso.partition("T")
    time_part = time_part.rstrip("Z")
    if time_part.count(":") == 1:
        time_part += ":00"
    compact = date_part.replace("-", "") + "T" + time_part.replace(":", "") + "Z"
    return parse_unix(compact)


class Gateway:
    """Minimal JSON client for the gateway endpoints the CLI needs."""

    def __init__(self, url: str):
        self.url = url.rstrip("/")
        self._client = httpx.Client(base_url=self.url, timeout=10.0)

    def _check(self, response: httpx.Response) -> dict | list:
        if response.status_code >= 400:
            try:
                payload = response.json()
                code, message = payload.get("error", "http_error"), payload.get("message", "")
            except Exception:
                code, message = "http_error", response.text
            _fail(code, f"{message} (HTTP {response.status_code})", EXIT_REJECTED)
        if "calendar" in response.headers.get("content-type", ""):
            return {"text": response.text}
        return response.json()

    def get(self, path: str, **params) -> dict | list:
        try:
            return self._check(self._client.get(path, params=params or None))
        except httpx.HTTPError as exc:
            _fail("transport", str(exc), EXIT_TRANSPORT)

    def post(self, path: str, body: dict | None = None) -> dict | list:
        try:
            return self._check(self._client.post(path, json=body))
        except httpx.HTTPError as exc:
            _fail("transport", str(exc), EXIT_TRANSPORT)

    def next_nonce(self, address: Address) -> int:
        info = self.get("/api/account", address=str(address))
        return int(info["next_nonce"])

    def submit(self, tx: SignedTransaction) -> dict:
        envelope = {
            "sender": str(tx.sender),
            "public_key": tx.public_key.hex(),
            "nonce": tx.nonce,
            "target": str(tx.target),
            "op": tx.op,
            "args": tx.args,
            "signature": tx.signature.hex(),
        }
        return self.post("/api/tx", envelope)

    def wait(self, tx_id: str, attempts: int = 20, delay: float = 0.05) -> dict:
        status = {}
        for _ in range(attempts):
            status = self.get(f"/api/tx/{tx_id}")
            if status.get("status") != "pending":
                return status
            time.sleep(delay)
        return status


def _send(gw: Gateway, keystore: Keystore, alias: str, target: Address, op: str, args: dict) -> dict:
    pair = keystore.get(alias)
    tx = SignedTransaction.make(pair, gw.next_nonce(pair.address), target, op, args)
    receipt = gw.submit(tx)
    status = gw.wait(receipt["tx_id"])
    if status.get("status") == "pending":
        click.echo(f"tx {receipt['tx_id']} pending; run `ledgercal seal` to include it")
        return status
    if status.get("status") == "rejected" or not status.get("ok", False):
        _fail(status.get("error", "rejected"), f"tx {receipt['tx_id']} failed", EXIT_REJECTED)
    return status


def _resolve_addr(keystore: Keystore, value: str) -> Address:
    if value.startswith("0x"):
        return Address.parse(value)
    return keystore.address_of(value)


@click.group()
@click.option("--gateway", "gateway_url", envvar="LEDGERCAL_GATEWAY",
              default="http://127.0.0.1:8545", show_default=True, help="Gateway base URL.")
@click.option("--keystore", "keystore_path", envvar="LEDGERCAL_KEYSTORE",
              default="keystore.json", show_default=True, type=click.Path())
@click.pass_context
def main(ctx, gateway_url, keystore_path):
    """Calendar and time-locked messages on a deterministic ledger."""
    ctx.ensure_object(dict)
    ctx.obj["gateway_url"] = gateway_url
    ctx.obj["keystore_path"] = keystore_path


def _gw(ctx) -> Gateway:
    return Gateway(ctx.obj["gateway_url"])


def _ks(ctx) -> Keystore:
    return Keystore(ctx.obj["keystore_path"])


# --- keys ----------------------------------------------------------------------

@main.group()
def key():
    """Manage the local keystore."""


@key.command("new")
@click.option("--alias", required=True)
@click.option("--seed", default=None, help="32-byte hex seed for a deterministic key.")
@click.pass_context
def key_new(ctx, alias, seed):
    ks = _ks(ctx)
    try:
        _, address = ks.create(alias, bytes.fromhex(seed) if seed else None)
    except ValueError as exc:
        raise click.UsageError(str(exc))
    click.echo(f"{alias} {address}")


@key.command("list")
@click.pass_context
def key_list(ctx):
    ks = _ks(ctx)
    for alias in ks.aliases():
        click.echo(f"{alias} {ks.address_of(alias)}")


# --- node ------------------------------------------------------------------------

@main.group()
def node():
    """Run or follow a node."""


@node.command("run")
@click.option("--chain-file", default="chain.lcal", show_default=True, type=click.Path())
@click.option("--bind", default="127.0.0.1:8545", show_default=True)
@click.option("--dev/--no-dev", default=True, show_default=True,
              help="Expose /admin endpoints and the manual clock.")
@click.option("--auto-seal/--no-auto-seal", default=True, show_default=True,
              help="Seal a block immediately after each accepted transaction.")
@click.option("--fund", multiple=True, help="alias=amount or 0xaddr=amount; repeatable.")
@click.option("--genesis-time", default=0, show_default=True, type=int)
@click.option("--write-base", default=10, show_default=True, type=int)
@click.option("--write-per-byte", default=1, show_default=True, type=int)
@click.option("--ui-dir", default=None, type=click.Path(exists=True, file_okay=False))
@click.pass_context
def node_run(ctx, chain_file, bind, dev, auto_seal, fund, genesis_time,
             write_base, write_per_byte, ui_dir):
    """Host the sequencer and gateway in one process."""
    import uvicorn

    from .gateway import create_app

    ks = _ks(ctx)
    pairs = []
    for entry in fund:
        name, sep, amount = entry.partition("=")
        if not sep:
            raise click.UsageError(f"--fund expects name=amount, got {entry!r}")
        pairs.append(f"{_resolve_addr(ks, name)}={amount}")
    genesis = GenesisConfig(
        timestamp=genesis_time,
        fee=FeeSchedule(write_base=write_base, write_per_byte=write_per_byte),
        alloc=parse_alloc(pairs),
    )
    node_obj = Node.create_or_open(chain_file, genesis, dev_mode=dev)
    node_obj.auto_seal = auto_seal
    app = create_app(node_obj, ui_dir=ui_dir)
    host, _, port = bind.partition(":")
    click.echo(f"chain file {chain_file}, state digest {node_obj.ledger.head_digest().hex()}")
    uvicorn.run(app, host=host, port=int(port or 8545), log_level="warning")


@node.command("follow")
@click.option("--chain-file", required=True, type=click.Path(exists=True))
@click.option("--once", is_flag=True, help="Verify the current file and exit.")
@click.option("--interval", default=1.0, show_default=True, type=float)
def node_follow(chain_file, once, interval):
    """Tail a chain file, verifying digests continuously."""
    from .contracts import build_registry

    registry = build_registry()
    verifier: ChainVerifier | None = None
    offset = 0
    try:
        while True:
            with open(chain_file, "rb") as fh:
                data = fh.read()
            if verifier is None:
                if not data.startswith(CHAIN_MAGIC):
                    _fail("bad_magic", "not a chain file", 1)
                body = data[len(CHAIN_MAGIC):]
                records = iter_length_prefixed(body)
                genesis = GenesisConfig.decode(next(records))
                verifier = ChainVerifier(genesis, registry)
                offset = len(CHAIN_MAGIC)
                offset += 4 + len(genesis.encode())
            for record in iter_length_prefixed(data[offset:]):
                block = Block.decode(record)
                verifier.feed(block)
                offset += 4 + len(record)
                click.echo(
                    f"block {block.height} ok: {len(block.transactions)} txs, "
                    f"state {verifier.state.digest().hex()[:16]}…"
                )
            if once:
                click.echo(f"verified up to height {verifier.height}")
                return
            time.sleep(interval)
    except ChainVerificationError as exc:
        _fail(exc.code, f"height {exc.height}: {exc.message}", 1)


@main.command("seal")
@click.pass_context
def seal(ctx):
    """Seal a block at the node clock's current time (dev mode)."""
    result = _gw(ctx).post("/admin/seal")
    click.echo(f"sealed block {result['height']} with {result['included']} txs")


# --- deploy -------------------------------------------------------------------------

@main.command("deploy")
@click.argument("kind", type=click.Choice(["msg-store", "cal-store", "cal-auth"]))
@click.option("--as", "alias", required=True, help="Keystore alias that signs and owns.")
@click.option("--calstore", default=None, help="Backing cal-store address (cal-auth only).")
@click.option("--quota", default=None, type=int, help="Storage quota in bytes.")
@click.option("--text-limit", default=None, type=int, help="Event text cap (cal-store only).")
@click.pass_context
def deploy(ctx, kind, alias, calstore, quota, text_limit):
    """Deploy a contract and print its address."""
    args: dict = {}
    if kind == "cal-auth":
        if not calstore:
            raise click.UsageError("cal-auth requires --calstore")
        args["calstore"] = calstore
    if quota is not None:
        args["storage_quota"] = quota
    if text_limit is not None:
        args["text_limit"] = text_limit
    status = _send(_gw(ctx), _ks(ctx), alias, ZERO_ADDRESS, kind, args)
    click.echo(status["value"]["deployed"])


# --- events ----------------------------------------------------------------------------

@main.group()
def event():
    """Calendar events, direct or via an authorization proxy."""


@event.command("add")
@click.option("--contract", required=True)
@click.option("--as", "alias", required=True)
@click.option("--start", required=True, help="Unix seconds or ISO-8601 UTC.")
@click.option("--end", required=True)
@click.option("--summary", required=True)
@click.option("--description", default="")
@click.pass_context
def event_add(ctx, contract, alias, start, end, summary, description):
    args = {
        "dtstart": parse_when(start),
        "dtend": parse_when(end),
        "summary": summary,
        "description": description,
    }
    status = _send(_gw(ctx), _ks(ctx), alias, Address.parse(contract), "store_event", args)
    click.echo(status["value"])


@event.command("rm")
@click.option("--contract", required=True)
@click.option("--as", "alias", required=True)
@click.option("--uid", required=True)
@click.pass_context
def event_rm(ctx, contract, alias, uid):
    _send(_gw(ctx), _ks(ctx), alias, Address.parse(contract), "remove_event", {"uid": uid})
    click.echo(f"removed {uid}")


@event.command("list")
@click.option("--contract", required=True)
@click.option("--as", "alias", default=None, help="Keystore alias to read as.")
@click.option("--as-addr", default=None, help="Raw address to read as.")
@click.pass_context
def event_list(ctx, contract, alias, as_addr):
    if not alias and not as_addr:
        raise click.UsageError("pass --as or --as-addr")
    user = as_addr or str(_ks(ctx).address_of(alias))
    events = _gw(ctx).get("/api/events", contract=contract, user=user)
    click.echo(json.dumps(events, indent=2, sort_keys=True))


# --- messages ------------------------------------------------------------------------------

@main.group()
def msg():
    """Time-locked messages."""


@msg.command("add")
@click.option("--contract", required=True)
@click.option("--as", "alias", required=True)
@click.option("--body", required=True)
@click.option("--unlock", required=True, help="Unix seconds or ISO-8601 UTC.")
@click.pass_context
def msg_add(ctx, contract, alias, body, unlock):
    args = {"body": body, "unlock_time": parse_when(unlock)}
    status = _send(_gw(ctx), _ks(ctx), alias, Address.parse(contract), "store_msg", args)
    click.echo(f"stored message id {status['value']}")


@msg.command("list")
@click.option("--contract", required=True)
@click.option("--as", "alias", default=None)
@click.option("--as-addr", default=None)
@click.pass_context
def msg_list(ctx, contract, alias, as_addr):
    if not alias and not as_addr:
        raise click.UsageError("pass --as or --as-addr")
    user = as_addr or str(_ks(ctx).address_of(alias))
    slots = _gw(ctx).get("/api/messages", contract=contract, user=user)
    released = [s for s in slots if s["id"] != 0]
    locked = len(slots) - len(released)
    for s in released:
        click.echo(f"{s['id']}: {s['body']} (unlocked at {s['unlock_time']})")
    if locked:
        click.echo(f"({locked} message(s) still locked)")


# --- grants --------------------------------------------------------------------------------

@main.group()
def grant():
    """Date-ranged access grants on a cal-auth contract."""


@grant.command("add")
@click.option("--contract", required=True)
@click.option("--as", "alias", required=True)
@click.option("--to-addr", required=True)
@click.option("--level", required=True, type=click.Choice(["read", "write"]))
@click.option("--from", "not_before", default=None, help="Window start (open if omitted).")
@click.option("--to", "not_after", default=None, help="Window end (open if omitted).")
@click.pass_context
def grant_add(ctx, contract, alias, to_addr, level, not_before, not_after):
    args = {
        "account": to_addr,
        "level": level,
        "not_before": parse_when(not_before) if not_before else None,
        "not_after": parse_when(not_after) if not_after else None,
    }
    _send(_gw(ctx), _ks(ctx), alias, Address.parse(contract), "grant_access", args)
    click.echo(f"granted {level} to {to_addr}")


@grant.command("rm")
@click.option("--contract", required=True)
@click.option("--as", "alias", required=True)
@click.option("--to-addr", required=True)
@click.pass_context
def grant_rm(ctx, contract, alias, to_addr):
    _send(_gw(ctx), _ks(ctx), alias, Address.parse(contract), "revoke_access", {"account": to_addr})
    click.echo(f"revoked {to_addr}")


@grant.command("list")
@click.option("--contract", required=True)
@click.option("--as", "alias", required=True, help="Admin alias whose view to list.")
@click.pass_context
def grant_list(ctx, contract, alias):
    user = str(_ks(ctx).address_of(alias))
    grants = _gw(ctx).get("/api/grants", contract=contract, user=user)
    click.echo(json.dumps(grants, indent=2, sort_keys=True))


@main.command("transfer-owner")
@click.option("--contract", required=True)
@click.option("--as", "alias", required=True)
@click.option("--new-owner", required=True)
@click.pass_context
def transfer_owner(ctx, contract, alias, new_owner):
    """Hand a cal-auth contract (ownership and admin role) to a new owner."""
    _send(_gw(ctx), _ks(ctx), alias, Address.parse(contract), "transfer_cal_auth",
          {"new_owner": new_owner})
    click.echo(f"ownership transferred to {new_owner}")


# --- feed -----------------------------------------------------------------------------------

@main.group()
def feed():
    """iCalendar feeds."""


@feed.command("get")
@click.option("--contract", required=True)
@click.option("--user", required=True, help="Address (or keystore alias) whose view to fetch.")
@click.option("--out", default=None, type=click.Path())
@click.pass_context
def feed_get(ctx, contract, user, out):
    ks = _ks(ctx)
    address = _resolve_addr(ks, user)
    result = _gw(ctx).get(f"/feed/{contract}/{address}.ics")
    text = result["text"]
    if out:
        Path(out).write_text(text)
        click.echo(f"wrote {out}")
    else:
        click.echo(text, nl=False)


# --- scorecard ---------------------------------------------------------------------------------

@main.group()
def scorecard():
    """Preservation rubric scoring and reports."""


@scorecard.command("run")
@click.argument("answers_file", type=click.Path(exists=True))
@click.option("--rubric", "rubric_path", default=None, type=click.Path(exists=True))
@click.option("--json", "json_path", default=None, type=click.Path())
@click.option("--csv", "csv_path", default=None, type=click.Path())
@click.option("--figure", "figure_path", default=None, type=click.Path())
def scorecard_run(answers_file, rubric_path, json_path, csv_path, figure_path):
    """Score an answers file and render reports."""
    rubric = load_rubric(rubric_path)
    answers, overrides, title = load_answers(answers_file)
    result = score(answers, overrides, rubric=rubric, title=title)
    click.echo(render_report(result), nl=False)
    if json_path:
        Path(json_path).write_text(render_json(result))
    if csv_path:
        Path(csv_path).write_text(render_csv(result))
    if figure_path:
        render_figure(result, figure_path)


if __name__ == "__main__":
    main()
