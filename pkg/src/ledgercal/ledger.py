"""Deterministic single-sequencer ledger with follower replication by replay.

The sequencer is the only writer: `submit` verifies transactions into a
pending pool, `seal_block` drains the pool in order, applies each
transaction through the contract runtime, charges write fees, and appends a
block carrying the digest of the resulting state.  Followers rebuild the
state from the serialized chain and must arrive at the same digests.

Fees follow the write-not-read rule: every included transaction pays
``write_base + write_per_byte * len(encoded args)``; read-only queries are
not transactions and never touch a balance.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field, replace
from typing import BinaryIO, Iterable

from .crypto import (
    DIGEST_LEN,
    Address,
    KeyPair,
    ZERO_ADDRESS,
    address_from_public_key,
    contract_address,
    get_digest,
    get_signature,
)
from .encoding import Reader, canonical_json, decode_json, enc_bytes, enc_str, enc_u32, enc_u64
from .errors import (
    CONTRACT_ERRORS,
    BadNonce,
    BadSignature,
    BrokenChain,
    InsufficientBalance,
    InvalidArguments,
    LedgerCalError,
    NonMonotonicTimestamp,
    StateMismatch,
    UnknownContract,
    UnknownKind,
)
from .runtime import (
    DEFAULT_STORAGE_QUOTA,
    CallContext,
    ContractRecord,
    ContractRegistry,
    TxExecutor,
)

CHAIN_MAGIC = b"LCCHAIN1"


@dataclass(frozen=True)
class FeeSchedule:
    """Write fees in abstract units; reads are free by construction."""

    write_base: int = 10
    write_per_byte: int = 1
    read_cost: int = 0  # kept explicit; must stay zero

    def fee_for(self, args_len: int) -> int:
        return self.write_base + self.write_per_byte * args_len


@dataclass(frozen=True)
class GenesisConfig:
    timestamp: int
    fee: FeeSchedule = FeeSchedule()
    alloc: dict = field(default_factory=dict)  # Address -> initial balance

    def encode(self) -> bytes:
        out = [enc_u64(self.fee.write_base), enc_u64(self.fee.write_per_byte),
               enc_u64(self.timestamp), enc_u32(len(self.alloc))]
        for address in sorted(self.alloc):
            out.append(address.bytes)
            out.append(enc_u64(self.alloc[address]))
        return b"".join(out)

    @classmethod
    def decode(cls, data: bytes) -> "GenesisConfig":
        r = Reader(data)
        base, per_byte, ts = r.u64(), r.u64(), r.u64()
        alloc = {}
        for _ in range(r.u32()):
            address = Address(r.raw(20))
            alloc[address] = r.u64()
        r.expect_done()
        return cls(timestamp=ts, fee=FeeSchedule(write_base=base, write_per_byte=per_byte), alloc=alloc)


@dataclass
class AccountState:
    nonce: int = 0
    balance: int = 0


@dataclass
class ChainState:
    """Full ledger state.

    The canonical serialization (and therefore the state digest) covers
    accounts and contracts, sorted by address; `current_time` is block
    header data, already tamper-evident through the block digests.
    """

    accounts: dict = field(default_factory=dict)   # Address -> AccountState
    contracts: dict = field(default_factory=dict)  # Address -> ContractRecord
    current_time: int = 0

    def encode(self) -> bytes:
        out = [enc_u32(len(self.accounts))]
        for address in sorted(self.accounts):
            acct = self.accounts[address]
            out.append(address.bytes)
            out.append(enc_u64(acct.nonce))
            out.append(enc_u64(acct.balance))
        out.append(enc_u32(len(self.contracts)))
        for address in sorted(self.contracts):
            rec = self.contracts[address]
            out.append(address.bytes)
            out.append(enc_str(rec.kind))
            out.append(rec.owner.bytes)
            out.append(enc_u64(rec.storage_quota))
            out.append(enc_bytes(rec.storage))
        return b"".join(out)

    def digest(self, algo: str = "sha256") -> bytes:
        return get_digest(algo).digest(self.encode())

    def clone(self) -> "ChainState":
        return ChainState(
            accounts={a: replace(s) for a, s in self.accounts.items()},
            contracts={a: replace(r) for a, r in self.contracts.items()},
            current_time=self.current_time,
        )

    def account(self, address: Address) -> AccountState:
        return self.accounts.get(address, AccountState())


@dataclass(frozen=True)
class SignedTransaction:
    sender: Address
    public_key: bytes
    nonce: int
    target: Address  # ZERO_ADDRESS marks a deployment; op then names the kind
    op: str
    args: dict
    signature: bytes

    def args_bytes(self) -> bytes:
        return canonical_json(self.args)

    def payload(self) -> bytes:
        return b"".join(
            [
                self.sender.bytes,
                enc_bytes(self.public_key),
                enc_u64(self.nonce),
                self.target.bytes,
                enc_str(self.op),
                enc_bytes(self.args_bytes()),
            ]
        )

    def encode(self) -> bytes:
        return self.payload() + enc_bytes(self.signature)

    @classmethod
    def decode(cls, data: bytes) -> "SignedTransaction":
        r = Reader(data)
        sender = Address(r.raw(20))
        public_key = r.bytes_()
        nonce = r.u64()
        target = Address(r.raw(20))
        op = r.str_()
        args = decode_json(r.bytes_())
        signature = r.bytes_()
        r.expect_done()
        return cls(sender, public_key, nonce, target, op, args, signature)

    def tx_id(self, algo: str = "sha256") -> str:
        return get_digest(algo).digest(self.encode()).hex()

    def verify(self, algo: str = "ed25519") -> bool:
        if address_from_public_key(self.public_key) != self.sender:
            return False
        return get_signature(algo).verify(self.public_key, self.payload(), self.signature)

    @property
    def is_deploy(self) -> bool:
        return self.target == ZERO_ADDRESS

    @classmethod
    def make(cls, keypair: KeyPair, nonce: int, target: Address, op: str, args: dict,
             algo: str = "ed25519") -> "SignedTransaction":
        unsigned = cls(
            sender=keypair.address,
            public_key=keypair.public_key,
            nonce=nonce,
            target=target,
            op=op,
            args=args,
            signature=b"",
        )
        signature = get_signature(algo).sign(keypair.secret_key, unsigned.payload())
        return replace(unsigned, signature=signature)


@dataclass(frozen=True)
class Block:
    height: int
    parent_digest: bytes
    timestamp: int
    transactions: tuple
    state_digest: bytes

    def encode(self) -> bytes:
        out = [
            enc_u64(self.height),
            self.parent_digest,
            enc_u64(self.timestamp),
            enc_u32(len(self.transactions)),
        ]
        out.extend(enc_bytes(tx.encode()) for tx in self.transactions)
        out.append(self.state_digest)
        return b"".join(out)

    @classmethod
    def decode(cls, data: bytes) -> "Block":
        r = Reader(data)
        height = r.u64()
        parent = r.raw(DIGEST_LEN)
        ts = r.u64()
        txs = tuple(SignedTransaction.decode(r.bytes_()) for _ in range(r.u32()))
        state_digest = r.raw(DIGEST_LEN)
        r.expect_done()
        return cls(height, parent, ts, txs, state_digest)

    def digest(self, algo: str = "sha256") -> bytes:
        return get_digest(algo).digest(self.encode())


def genesis_state(genesis: GenesisConfig) -> ChainState:
    state = ChainState(current_time=genesis.timestamp)
    for address, balance in genesis.alloc.items():
        state.accounts[address] = AccountState(nonce=0, balance=balance)
    return state


def genesis_block(genesis: GenesisConfig) -> Block:
    return Block(
        height=0,
        parent_digest=b"\x00" * DIGEST_LEN,
        timestamp=genesis.timestamp,
        transactions=(),
        state_digest=genesis_state(genesis).digest(),
    )


@dataclass
class TxResult:
    """Outcome of applying one transaction inside a block."""

    ok: bool
    error: str | None = None
    value: object = None
    fee: int = 0


def apply_transaction(state: ChainState, tx: SignedTransaction, fee: FeeSchedule,
                      block_time: int, registry: ContractRegistry) -> TxResult:
    """Apply one verified transaction in place; raises only reject errors.

    BadNonce / InsufficientBalance leave the state untouched and mean the
    transaction must not be included.  Contract-level failures debit the fee
    and bump the nonce but leave every contract's storage byte-identical.
    """
    account = state.accounts.get(tx.sender)
    current_nonce = account.nonce if account else 0
    if tx.nonce != current_nonce:
        raise BadNonce(f"expected nonce {current_nonce}, got {tx.nonce}")
    due = fee.fee_for(len(tx.args_bytes()))
    balance = account.balance if account else 0
    if balance < due:
        raise InsufficientBalance(f"fee is {due}, balance is {balance}")

    if account is None:
        account = AccountState()
        state.accounts[tx.sender] = account
    account.balance -= due
    account.nonce += 1

    executor = TxExecutor(registry, state.contracts)
    ctx = CallContext(msg_sender=tx.sender, origin=tx.sender, block_time=block_time)
    try:
        if tx.is_deploy:
            quota = tx.args.get("storage_quota", DEFAULT_STORAGE_QUOTA)
            if not isinstance(quota, int) or isinstance(quota, bool) or quota <= 0:
                raise InvalidArguments(f"storage_quota must be a positive integer: {quota!r}")
            init_args = {k: v for k, v in tx.args.items() if k != "storage_quota"}
            address = contract_address(tx.sender, tx.nonce)
            executor.deploy(ctx, tx.op, init_args, address, storage_quota=quota)
            value = {"deployed": str(address)}
        else:
            value = executor.call(tx.target, ctx, tx.op, tx.args)
        updates = executor.commit()
    except (UnknownContract, UnknownKind, *CONTRACT_ERRORS) as exc:
        return TxResult(ok=False, error=exc.code, fee=due)
    state.contracts.update(updates)
    return TxResult(ok=True, value=value, fee=due)


class Ledger:
    """The sequencer: pending pool, sealed chain, and live state."""

    def __init__(self, genesis: GenesisConfig, registry: ContractRegistry,
                 chain_file: BinaryIO | None = None):
        self.genesis = genesis
        self.registry = registry
        self.blocks: list[Block] = [genesis_block(genesis)]
        self.state: ChainState = genesis_state(genesis)
        self.pool: list[SignedTransaction] = []
        self.receipts: dict[str, dict] = {}
        self._pending_nonces: dict[Address, int] = {}
        self._pending_deploys: set[Address] = set()
        self._chain_file = chain_file
        if chain_file is not None:
            write_chain_header(chain_file, genesis)
            append_block(chain_file, self.blocks[0])

    @classmethod
    def resume(cls, genesis: GenesisConfig, blocks: list[Block], registry: ContractRegistry,
               chain_file: BinaryIO | None = None) -> "Ledger":
        """Rebuild a sequencer from an existing chain, verifying it by replay."""
        state = replay(genesis, blocks, registry)
        ledger = cls(genesis, registry, chain_file=None)
        ledger.blocks = list(blocks)
        ledger.state = state
        ledger._chain_file = chain_file
        return ledger

    # --- submission ---------------------------------------------------------

    def next_nonce(self, sender: Address) -> int:
        return self._pending_nonces.get(sender, self.state.account(sender).nonce)

    def submit(self, tx: SignedTransaction) -> dict:
        if not tx.verify():
            raise BadSignature("transaction signature does not verify")
        expected = self.next_nonce(tx.sender)
        if tx.nonce != expected:
            kind = "stale" if tx.nonce < expected else "future"
            raise BadNonce(f"{kind} nonce {tx.nonce}, expected {expected}")
        if tx.is_deploy:
            self.registry.get(tx.op)  # UnknownKind for unregistered contract types
            self._pending_deploys.add(contract_address(tx.sender, tx.nonce))
        else:
            known = tx.target in self.state.contracts or tx.target in self._pending_deploys
            if not known:
                raise UnknownContract(f"no contract at {tx.target}")
        self.pool.append(tx)
        self._pending_nonces[tx.sender] = expected + 1
        tx_id = tx.tx_id()
        self.receipts[tx_id] = {"status": "pending", "position": len(self.pool) - 1}
        return {"tx_id": tx_id, "position": len(self.pool) - 1}

    # --- sealing -------------------------------------------------------------

    def seal_block(self, timestamp: int) -> Block:
        head = self.blocks[-1]
        if timestamp < head.timestamp:
            raise NonMonotonicTimestamp(
                f"timestamp {timestamp} is before head timestamp {head.timestamp}"
            )
        working = self.state.clone()
        working.current_time = timestamp
        included: list[SignedTransaction] = []
        for tx in self.pool:
            tx_id = tx.tx_id()
            try:
                result = apply_transaction(working, tx, self.genesis.fee, timestamp, self.registry)
            except (BadNonce, InsufficientBalance) as exc:
                self.receipts[tx_id] = {"status": "rejected", "error": exc.code}
                continue
            included.append(tx)
            self.receipts[tx_id] = {
                "status": "included",
                "height": head.height + 1,
                "ok": result.ok,
                "error": result.error,
                "value": result.value,
                "fee": result.fee,
            }
        block = Block(
            height=head.height + 1,
            parent_digest=head.digest(),
            timestamp=timestamp,
            transactions=tuple(included),
            state_digest=working.digest(),
        )
        self.blocks.append(block)
        self.state = working
        self.pool = []
        self._pending_nonces = {}
        self._pending_deploys = set()
        if self._chain_file is not None:
            append_block(self._chain_file, block)
        return block

    # --- reads ----------------------------------------------------------------

    def query(self, contract: Address, op: str, args: dict, sender: Address):
        """Fee-free read-only call against the latest sealed state."""
        executor = TxExecutor(self.registry, self.state.contracts)
        ctx = CallContext(
            msg_sender=sender,
            origin=sender,
            block_time=self.state.current_time,
            read_only=True,
        )
        return executor.call(contract, ctx, op, args)

    def account_info(self, address: Address) -> dict:
        acct = self.state.account(address)
        return {"address": str(address), "nonce": acct.nonce, "balance": acct.balance}

    def receipt(self, tx_id: str) -> dict:
        return self.receipts.get(tx_id, {"status": "unknown"})

    def head_digest(self) -> bytes:
        return self.state.digest()


# --- replay / replication -----------------------------------------------------

class ChainVerifier:
    """Incremental follower: feed blocks in order, get verified state out.

    Raises BrokenChain on structural violations (heights, parent digests,
    timestamp order) and StateMismatch when a block's recorded state digest
    cannot be reproduced, including any transaction that an honest sequencer
    would never have included.
    """

    def __init__(self, genesis: GenesisConfig, registry: ContractRegistry):
        self.genesis = genesis
        self.registry = registry
        self.state = genesis_state(genesis)
        self._prev: Block | None = None

    @property
    def height(self) -> int:
        return -1 if self._prev is None else self._prev.height

    def feed(self, block: Block) -> None:
        if self._prev is None:
            if block.height != 0 or block.parent_digest != b"\x00" * DIGEST_LEN:
                raise BrokenChain(block.height, "chain does not start at height 0")
            if block.transactions:
                raise BrokenChain(0, "genesis block carries transactions")
            if block.timestamp != self.genesis.timestamp:
                raise BrokenChain(0, "genesis timestamp differs from chain header")
            if block.state_digest != self.state.digest():
                raise StateMismatch(0, "genesis state digest mismatch")
            self._prev = block
            return
        height = block.height
        if height != self._prev.height + 1:
            raise BrokenChain(height, f"height jump after {self._prev.height}")
        if block.parent_digest != self._prev.digest():
            raise BrokenChain(height, "parent digest mismatch")
        if block.timestamp < self._prev.timestamp:
            raise BrokenChain(height, "timestamp decreased")
        self.state.current_time = block.timestamp
        for tx in block.transactions:
            if not tx.verify():
                raise StateMismatch(height, "invalid transaction signature in sealed block")
            try:
                apply_transaction(self.state, tx, self.genesis.fee, block.timestamp, self.registry)
            except LedgerCalError as exc:
                raise StateMismatch(height, f"unreplayable transaction: {exc.code}") from None
        if self.state.digest() != block.state_digest:
            raise StateMismatch(height, "recomputed state digest differs from recorded")
        self._prev = block


def replay(genesis: GenesisConfig, blocks: Iterable[Block],
           registry: ContractRegistry) -> ChainState:
    """Rebuild the state from a full chain, verifying every digest on the way."""
    verifier = ChainVerifier(genesis, registry)
    fed = 0
    for block in blocks:
        verifier.feed(block)
        fed += 1
    if fed == 0:
        raise BrokenChain(0, "empty chain")
    return verifier.state


# --- chain file -----------------------------------------------------------------

def write_chain_header(fh: BinaryIO, genesis: GenesisConfig) -> None:
    fh.write(CHAIN_MAGIC)
    fh.write(enc_bytes(genesis.encode()))
    fh.flush()


def append_block(fh: BinaryIO, block: Block) -> None:
    fh.write(enc_bytes(block.encode()))
    fh.flush()


def read_chain(data: bytes) -> tuple[GenesisConfig, list[Block]]:
    if not data.startswith(CHAIN_MAGIC):
        raise ValueError("not a chain file (bad magic)")
    r = Reader(data[len(CHAIN_MAGIC):])
    genesis = GenesisConfig.decode(r.bytes_())
    blocks = []
    while not r.done():
        blocks.append(Block.decode(r.bytes_()))
    return genesis, blocks


def read_chain_file(path: str) -> tuple[GenesisConfig, list[Block]]:
    with open(path, "rb") as fh:
        return read_chain(fh.read())


def dump_chain(genesis: GenesisConfig, blocks: Iterable[Block]) -> bytes:
    buf = io.BytesIO()
    write_chain_header(buf, genesis)
    for block in blocks:
        append_block(buf, block)
    return buf.getvalue()
