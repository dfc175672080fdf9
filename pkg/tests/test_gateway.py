import random

import pytest
from fastapi.testclient import TestClient

from ledgercal.crypto import ZERO_ADDRESS, contract_address
from ledgercal.gateway import create_app
from ledgercal.ical import parse
from ledgercal.ledger import FeeSchedule, GenesisConfig, SignedTransaction
from ledgercal.node import ManualClock, Node

from conftest import GENESIS_TIME, make_keys

KEYS = make_keys(4, salt=b"gw")
ALICE, BOB, CAROL, EVE = KEYS


def envelope(tx: SignedTransaction) -> dict:
    return {
        "sender": str(tx.sender),
        "public_key": tx.public_key.hex(),
        "nonce": tx.nonce,
        "target": str(tx.target),
        "op": tx.op,
        "args": tx.args,
        "signature": tx.signature.hex(),
    }


def genesis():
    return GenesisConfig(
        timestamp=GENESIS_TIME,
        fee=FeeSchedule(write_base=10, write_per_byte=1),
        alloc={pair.address: 10_000_000 for pair in KEYS},
    )


@pytest.fixture
def node():
    return Node.create(genesis(), clock=ManualClock(start=GENESIS_TIME), dev_mode=True)


@pytest.fixture
def client(node):
    return TestClient(create_app(node))


def send(client, node, pair, target, op, args, seal=True):
    tx = SignedTransaction.make(pair, node.ledger.next_nonce(pair.address), target, op, args)
    response = client.post("/api/tx", json=envelope(tx))
    assert response.status_code == 200, response.text
    if seal:
        node.clock.advance(1)
        assert client.post("/admin/seal").status_code == 200
    return response.json()["tx_id"]


@pytest.fixture
def contracts(client, node):
    """Deploy a cal-store and a cal-auth through the HTTP path."""
    send(client, node, ALICE, ZERO_ADDRESS, "cal-store", {})
    store = contract_address(ALICE.address, 0)
    send(client, node, ALICE, ZERO_ADDRESS, "cal-auth", {"calstore": str(store)})
    auth = contract_address(ALICE.address, 1)
    return store, auth


def grant(client, node, auth, account, level, nb=None, na=None):
    send(client, node, ALICE, auth, "grant_access",
         {"account": str(account), "level": level, "not_before": nb, "not_after": na})


# --- feed -------------------------------------------------------------------

def test_feed_unknown_user_returns_empty_calendar(client, node, contracts):
    store, _ = contracts
    response = client.get(f"/feed/{store}/{EVE.address}.ics")
    assert response.status_code == 200
    assert response.headers["content-type"].startswith("text/calendar")
    assert parse(response.text).events == []


def test_feed_for_granted_user_matches_filtered_events(client, node, contracts):
    store, auth = contracts
    grant(client, node, auth, BOB.address, "write")
    send(client, node, BOB, auth, "store_event",
         {"dtstart": GENESIS_TIME + 50, "dtend": GENESIS_TIME + 60, "summary": "in", "description": ""})
    send(client, node, BOB, auth, "store_event",
         {"dtstart": GENESIS_TIME + 5000, "dtend": GENESIS_TIME + 6000, "summary": "out", "description": ""})
    grant(client, node, auth, CAROL.address, "read", nb=GENESIS_TIME, na=GENESIS_TIME + 100)
    response = client.get(f"/feed/{auth}/{CAROL.address}.ics")
    assert response.status_code == 200
    events = parse(response.text).events
    assert [e.summary for e in events] == ["in"]


def test_feed_for_ungranted_user_is_403(client, node, contracts):
    _, auth = contracts
    response = client.get(f"/feed/{auth}/{EVE.address}.ics")
    assert response.status_code == 403
    assert response.json()["error"] == "access_denied"


def test_feed_address_and_contract_errors(client, node, contracts):
    store, _ = contracts
    assert client.get(f"/feed/not-an-address/{BOB.address}.ics").status_code == 400
    assert client.get(f"/feed/{store}/{BOB.address}").status_code == 400  # no .ics
    ghost = "0x" + "9" * 40
    assert client.get(f"/feed/{ghost}/{BOB.address}.ics").status_code == 404


# --- JSON api ------------------------------------------------------------------

def test_api_events_and_access_mirror_contract_state(client, node, contracts):
    store, auth = contracts
    send(client, node, ALICE, store, "store_event",
         {"dtstart": GENESIS_TIME + 9, "dtend": GENESIS_TIME + 10, "summary": "mine", "description": ""})
    events = client.get("/api/events", params={"contract": str(store), "user": str(ALICE.address)}).json()
    assert [e["summary"] for e in events] == ["mine"]
    assert client.get("/api/events", params={"contract": str(store), "user": str(BOB.address)}).json() == []

    grant(client, node, auth, BOB.address, "read", na=GENESIS_TIME + 77)
    access = client.get("/api/access", params={"contract": str(auth), "user": str(BOB.address)}).json()
    assert access == {"level": "read", "not_before": None, "not_after": GENESIS_TIME + 77}


def test_api_grants_requires_the_admin_role(client, node, contracts):
    _, auth = contracts
    grant(client, node, auth, BOB.address, "read")
    denied = client.get("/api/grants", params={"contract": str(auth), "user": str(BOB.address)})
    assert denied.status_code == 403
    rows = client.get("/api/grants", params={"contract": str(auth), "user": str(ALICE.address)})
    assert rows.status_code == 200
    assert rows.json() == [{"account": str(BOB.address), "level": "read",
                            "not_before": None, "not_after": None}]


def test_api_messages(client, node, contracts):
    send(client, node, ALICE, ZERO_ADDRESS, "msg-store", {})
    msgs = contract_address(ALICE.address, node.ledger.state.account(ALICE.address).nonce - 1)
    send(client, node, ALICE, msgs, "store_msg",
         {"body": "future", "unlock_time": GENESIS_TIME + 10_000})
    slots = client.get("/api/messages", params={"contract": str(msgs), "user": str(ALICE.address)}).json()
    assert slots == [{"id": 0, "body": "", "unlock_time": 0}]


def test_feed_parse_equals_api_events_for_random_pairs(client, node, contracts):
    store, auth = contracts
    rng = random.Random(11)
    grant(client, node, auth, BOB.address, "write")
    for _ in range(8):
        start = GENESIS_TIME + rng.randrange(1, 5_000)
        send(client, node, BOB, auth,
             "store_event", {"dtstart": start, "dtend": start + 10,
                             "summary": f"e{start}", "description": ""})
        send(client, node, ALICE, store,
             "store_event", {"dtstart": start, "dtend": start + 99,
                             "summary": f"own{start}", "description": ""})
    grant(client, node, auth, CAROL.address, "read",
          nb=GENESIS_TIME + 1_000, na=GENESIS_TIME + 4_000)

    pairs = [(store, ALICE.address), (store, BOB.address), (store, EVE.address),
             (auth, BOB.address), (auth, CAROL.address)]
    for contract, user in pairs:
        api = client.get("/api/events", params={"contract": str(contract), "user": str(user)})
        feed = client.get(f"/feed/{contract}/{user}.ics")
        assert api.status_code == feed.status_code == 200
        assert [e.to_json() for e in parse(feed.text).events] == api.json()


# --- transactions ------------------------------------------------------------------

def test_tx_lifecycle_pending_then_included(client, node, contracts):
    store, _ = contracts
    tx = SignedTransaction.make(ALICE, node.ledger.next_nonce(ALICE.address), store,
                                "store_event", {"dtstart": GENESIS_TIME, "dtend": GENESIS_TIME,
                                                "summary": "s", "description": ""})
    receipt = client.post("/api/tx", json=envelope(tx)).json()
    status = client.get(f"/api/tx/{receipt['tx_id']}").json()
    assert status["status"] == "pending"
    node.clock.advance(1)
    client.post("/admin/seal")
    status = client.get(f"/api/tx/{receipt['tx_id']}").json()
    assert status["status"] == "included" and status["ok"]
    events = client.get("/api/events", params={"contract": str(store), "user": str(ALICE.address)}).json()
    assert any(e["summary"] == "s" for e in events)


def test_tx_bad_signature_is_422(client, node, contracts):
    store, _ = contracts
    tx = SignedTransaction.make(ALICE, 99, store, "remove_event", {"uid": "u"})
    body = envelope(tx)
    body["signature"] = ("00" * 8) + body["signature"][16:]
    assert client.post("/api/tx", json=body).status_code == 422
    body2 = envelope(tx)  # wrong nonce, intact signature
    assert client.post("/api/tx", json=body2).status_code == 422
    assert client.post("/api/tx", json=body2).json()["error"] == "bad_nonce"


def test_tx_malformed_envelope_is_400(client):
    assert client.post("/api/tx", json={"sender": "zzz"}).status_code == 400
    assert client.post("/api/tx", content=b"not json",
                       headers={"content-type": "application/json"}).status_code == 400


def test_expired_writer_shows_included_but_failed(client, node, contracts):
    # end-to-end: window closes, the write lands on-chain but fails with
    # access_denied visible in the status endpoint
    _, auth = contracts
    grant(client, node, auth, BOB.address, "write", nb=GENESIS_TIME, na=GENESIS_TIME + 20)
    node.clock.set(GENESIS_TIME + 500)
    client.post("/admin/seal")
    tx_id = send(client, node, BOB, auth, "store_event",
                 {"dtstart": GENESIS_TIME, "dtend": GENESIS_TIME, "summary": "late", "description": ""})
    status = client.get(f"/api/tx/{tx_id}").json()
    assert status["status"] == "included"
    assert status["ok"] is False
    assert status["error"] == "access_denied"


def test_auto_seal_mode(node, client, contracts):
    store, _ = contracts
    node.auto_seal = True
    tx = SignedTransaction.make(ALICE, node.ledger.next_nonce(ALICE.address), store,
                                "store_event", {"dtstart": 1, "dtend": 2, "summary": "a",
                                                "description": ""})
    receipt = client.post("/api/tx", json=envelope(tx)).json()
    assert client.get(f"/api/tx/{receipt['tx_id']}").json()["status"] == "included"


# --- sequencer control -----------------------------------------------------------------

def test_seal_endpoint_drains_pool(client, node, contracts):
    store, _ = contracts
    for i in range(2):
        tx = SignedTransaction.make(ALICE, node.ledger.next_nonce(ALICE.address), store,
                                    "store_event", {"dtstart": i, "dtend": i, "summary": str(i),
                                                    "description": ""})
        client.post("/api/tx", json=envelope(tx))
    node.clock.advance(5)
    result = client.post("/admin/seal").json()
    assert result["included"] == 2


def test_seal_with_rewound_clock_is_409(client, node):
    node.clock.advance(10)
    client.post("/admin/seal")
    node.clock.set(GENESIS_TIME)
    response = client.post("/admin/seal")
    assert response.status_code == 409
    assert response.json()["error"] == "non_monotonic_timestamp"


def test_admin_endpoints_locked_outside_dev_mode():
    node = Node.create(genesis(), clock=ManualClock(GENESIS_TIME), dev_mode=False)
    client = TestClient(create_app(node))
    assert client.post("/admin/seal").status_code == 403
    assert client.post("/admin/clock", json={"advance": 5}).status_code == 403


# --- gateway holds no state ---------------------------------------------------------------

def test_restart_changes_no_query_result(tmp_path):
    chain_path = str(tmp_path / "chain.lcal")
    node = Node.create(genesis(), chain_path=chain_path,
                       clock=ManualClock(GENESIS_TIME), dev_mode=True)
    client = TestClient(create_app(node))
    send(client, node, ALICE, ZERO_ADDRESS, "cal-store", {})
    store = contract_address(ALICE.address, 0)
    send(client, node, ALICE, store, "store_event",
         {"dtstart": GENESIS_TIME + 1, "dtend": GENESIS_TIME + 2, "summary": "persisted",
          "description": ""})
    before_events = client.get("/api/events", params={"contract": str(store),
                                                      "user": str(ALICE.address)}).json()
    before_feed = client.get(f"/feed/{store}/{ALICE.address}.ics").text
    before_head = client.get("/api/chain/head").json()
    node.close()

    reopened = Node.open(chain_path, dev_mode=True)
    client2 = TestClient(create_app(reopened))
    assert client2.get("/api/events", params={"contract": str(store),
                                              "user": str(ALICE.address)}).json() == before_events
    assert client2.get(f"/feed/{store}/{ALICE.address}.ics").text == before_feed
    assert client2.get("/api/chain/head").json() == before_head
    reopened.close()


def test_gets_are_fee_neutral(client, node, contracts):
    store, auth = contracts
    digest_before = node.ledger.state.digest()
    balances_before = {a: s.balance for a, s in node.ledger.state.accounts.items()}
    for _ in range(5):
        client.get("/api/events", params={"contract": str(store), "user": str(ALICE.address)})
        client.get("/api/access", params={"contract": str(auth), "user": str(BOB.address)})
        client.get(f"/feed/{store}/{ALICE.address}.ics")
        client.get("/api/account", params={"address": str(ALICE.address)})
        client.get("/api/chain/head")
        client.get("/api/contracts")
    assert node.ledger.state.digest() == digest_before
    assert {a: s.balance for a, s in node.ledger.state.accounts.items()} == balances_before
