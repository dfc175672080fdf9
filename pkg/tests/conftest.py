import pytest

from ledgercal.contracts import build_registry
from ledgercal.crypto import ZERO_ADDRESS, Address, keygen
from ledgercal.ledger import FeeSchedule, GenesisConfig, Ledger, SignedTransaction

GENESIS_TIME = 1_000


def make_keys(n, salt=b"k"):
    """Deterministic keypairs for tests; seeds derive from the salt and index."""
    pairs = []
    for i in range(n):
        seed = (salt + bytes([i])).ljust(32, b"\x00")
        pairs.append(keygen(seed=seed)[0])
    return pairs


@pytest.fixture
def keys():
    return make_keys(4)


@pytest.fixture
def ledger(keys):
    genesis = GenesisConfig(
        timestamp=GENESIS_TIME,
        fee=FeeSchedule(write_base=10, write_per_byte=1),
        alloc={pair.address: 10_000_000 for pair in keys},
    )
    return Ledger(genesis, build_registry())


class Chain:
    """Convenience driver: sign, submit, seal, query in one place."""

    def __init__(self, ledger):
        self.ledger = ledger
        self.time = ledger.state.current_time

    def send(self, pair, target, op, args, expect_ok=True):
        nonce = self.ledger.next_nonce(pair.address)
        tx = SignedTransaction.make(pair, nonce, target, op, args)
        receipt = self.ledger.submit(tx)
        self.time += 1
        self.ledger.seal_block(self.time)
        status = self.ledger.receipt(receipt["tx_id"])
        assert status["status"] == "included", status
        if expect_ok:
            assert status["ok"], status
        return status

    def deploy(self, pair, kind, args=None):
        status = self.send(pair, ZERO_ADDRESS, kind, args or {})
        return Address.parse(status["value"]["deployed"])

    def query(self, contract, op, args=None, sender=None):
        return self.ledger.query(contract, op, args or {}, sender=sender)

    def at(self, t):
        """Advance the chain clock so the next sealed block carries time t."""
        assert t > self.time, "time only moves forward"
        self.time = t - 1
        return self

    def seal_at(self, t):
        """Seal an (often empty) block at time t, moving current_time there."""
        assert t >= self.time, "time only moves forward"
        self.time = t
        return self.ledger.seal_block(t)


@pytest.fixture
def chain(ledger):
    return Chain(ledger)
