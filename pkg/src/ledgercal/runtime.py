"""Contract runtime: native state machines with ledger call semantics.

Contracts are Python classes registered by kind tag.  Each instance owns an
opaque serialized state blob inside the chain state; the runtime decodes it
per call, re-serializes on mutation, enforces the storage quota, and rolls
the whole transaction back on any contract error.

Call identity follows the usual ledger rules: for a direct call
``msg_sender == origin``; when contract A calls contract B, B observes
``msg_sender == address(A)`` while ``origin`` is unchanged.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Any, Callable

from .crypto import Address
from .encoding import Reader, enc_str, enc_u32
from .errors import (
    AccessDenied,
    InvalidArguments,
    QuotaExceeded,
    ReadOnlyViolation,
    ReentrancyBlocked,
    UnknownContract,
    UnknownKind,
    UnknownOperation,
)

DEFAULT_STORAGE_QUOTA = 24576  # bytes of serialized contract state

ADMIN_ROLE = "admin"


@dataclass
class ContractRecord:
    """Chain-state view of one deployed contract."""

    address: Address
    kind: str
    owner: Address
    storage_quota: int
    storage: bytes


@dataclass
class CallContext:
    """Per-call identity and clock, plus the hook for nested calls."""

    msg_sender: Address
    origin: Address
    block_time: int
    read_only: bool = False
    _executor: "TxExecutor | None" = field(default=None, repr=False, compare=False)
    _self_address: Address | None = field(default=None, repr=False, compare=False)

    def call(self, target: Address, op: str, args: dict) -> Any:
        """Call another contract; the callee sees this contract as sender."""
        if self._executor is None or self._self_address is None:
            raise RuntimeError("nested calls are only available inside contract code")
        child = CallContext(
            msg_sender=self._self_address,
            origin=self.origin,
            block_time=self.block_time,
            read_only=self.read_only,
        )
        return self._executor.call(target, child, op, args)

    def set_owner(self, new_owner: Address) -> None:
        """Reassign ownership of the currently executing contract."""
        if self._executor is None or self._self_address is None:
            raise RuntimeError("set_owner is only available inside contract code")
        self._executor.record_for(self._self_address).owner = new_owner

    def self_record(self) -> ContractRecord:
        if self._executor is None or self._self_address is None:
            raise RuntimeError("self_record is only available inside contract code")
        return self._executor.record_for(self._self_address)

    def contract_exists(self, address: Address) -> bool:
        if self._executor is None:
            raise RuntimeError("contract_exists is only available inside contract code")
        return self._executor.has_contract(address)


def only_owner_guard(ctx: CallContext, record: ContractRecord) -> None:
    if ctx.msg_sender != record.owner:
        raise AccessDenied(f"caller {ctx.msg_sender} is not the owner")


@dataclass
class RoleSet:
    """Admin-gated role membership, with idempotent grant/revoke."""

    members: dict[str, set[Address]] = field(default_factory=dict)

    def require_admin(self, ctx: CallContext) -> None:
        if ctx.msg_sender not in self.members.get(ADMIN_ROLE, set()):
            raise AccessDenied(f"caller {ctx.msg_sender} lacks the {ADMIN_ROLE} role")

    def grant(self, ctx: CallContext, role: str, account: Address) -> None:
        self.require_admin(ctx)
        self.members.setdefault(role, set()).add(account)

    def revoke(self, ctx: CallContext, role: str, account: Address) -> None:
        self.require_admin(ctx)
        self.members.get(role, set()).discard(account)

    def has(self, role: str, account: Address) -> bool:
        return account in self.members.get(role, set())

    def encode(self) -> bytes:
        out = [enc_u32(len(self.members))]
        for role in sorted(self.members):
            addrs = sorted(self.members[role])
            out.append(enc_str(role))
            out.append(enc_u32(len(addrs)))
            out.extend(a.bytes for a in addrs)
        return b"".join(out)

    @classmethod
    def decode(cls, r: Reader) -> "RoleSet":
        members: dict[str, set[Address]] = {}
        for _ in range(r.u32()):
            role = r.str_()
            members[role] = {Address(r.raw(20)) for _ in range(r.u32())}
        return cls(members=members)


@dataclass(frozen=True)
class OpSpec:
    name: str
    method: Callable
    read_only: bool


def operation(read_only: bool = False):
    """Mark a contract method as an externally callable operation."""

    def wrap(fn):
        fn.__op_spec__ = {"read_only": read_only}
        return fn

    return wrap


class Contract:
    """Base class for contract state machines.

    Subclasses set ``kind``, implement ``create``/``encode``/``decode`` and
    expose operations via the :func:`operation` decorator.
    """

    kind: str = ""

    @classmethod
    def create(cls, ctx: CallContext, args: dict) -> "Contract":
        raise NotImplementedError

    def encode(self) -> bytes:
        raise NotImplementedError

    @classmethod
    def decode(cls, data: bytes) -> "Contract":
        raise NotImplementedError

    @classmethod
    def ops(cls) -> dict[str, OpSpec]:
        found = {}
        for name in dir(cls):
            fn = getattr(cls, name)
            spec = getattr(fn, "__op_spec__", None)
            if spec is not None:
                found[name] = OpSpec(name=name, method=fn, read_only=spec["read_only"])
        return found


class ContractRegistry:
    def __init__(self):
        self._kinds: dict[str, type[Contract]] = {}

    def register(self, cls: type[Contract]) -> type[Contract]:
        if not cls.kind:
            raise ValueError("contract class must set a kind tag")
        self._kinds[cls.kind] = cls
        return cls

    def get(self, kind: str) -> type[Contract]:
        try:
            return self._kinds[kind]
        except KeyError:
            raise UnknownKind(f"no contract kind registered as {kind!r}") from None

    def kinds(self) -> list[str]:
        return sorted(self._kinds)


class TxExecutor:
    """Executes one transaction (or read-only query) against a contract map.

    Works on copy-on-write records; ``commit`` re-serializes every touched
    contract, enforces quotas, and returns the records to write back.  If
    anything raises, the caller simply drops the executor and the base map
    is untouched.
    """

    def __init__(self, registry: ContractRegistry, base: dict[Address, ContractRecord]):
        self._registry = registry
        self._base = base
        self._scratch: dict[Address, ContractRecord] = {}
        self._instances: dict[Address, Contract] = {}
        self._stack: list[Address] = []

    def record_for(self, address: Address) -> ContractRecord:
        if address not in self._scratch:
            if address not in self._base:
                raise UnknownContract(f"no contract at {address}")
            self._scratch[address] = replace(self._base[address])
        return self._scratch[address]

    def has_contract(self, address: Address) -> bool:
        return address in self._scratch or address in self._base

    def _instance_for(self, address: Address) -> Contract:
        if address not in self._instances:
            record = self.record_for(address)
            cls = self._registry.get(record.kind)
            self._instances[address] = cls.decode(record.storage)
        return self._instances[address]

    def deploy(self, ctx: CallContext, kind: str, args: dict, address: Address,
               storage_quota: int = DEFAULT_STORAGE_QUOTA) -> Address:
        cls = self._registry.get(kind)
        if self.has_contract(address):
            raise UnknownKind(f"address {address} already occupied")
        bound = CallContext(
            msg_sender=ctx.msg_sender,
            origin=ctx.origin,
            block_time=ctx.block_time,
            read_only=ctx.read_only,
            _executor=self,
            _self_address=address,
        )
        instance = cls.create(bound, dict(args))
        self._scratch[address] = ContractRecord(
            address=address,
            kind=kind,
            owner=ctx.origin,
            storage_quota=storage_quota,
            storage=b"",
        )
        self._instances[address] = instance
        return address

    def call(self, target: Address, ctx: CallContext, op: str, args: dict) -> Any:
        if target in self._stack:
            raise ReentrancyBlocked(f"re-entrant call into {target}")
        record = self.record_for(target)
        cls = self._registry.get(record.kind)
        spec = cls.ops().get(op)
        if spec is None:
            raise UnknownOperation(f"{record.kind} has no operation {op!r}")
        if ctx.read_only and not spec.read_only:
            raise ReadOnlyViolation(f"{op} mutates state but the call is read-only")
        instance = self._instance_for(target)
        bound = replace(ctx)
        bound._executor = self
        bound._self_address = target
        self._stack.append(target)
        try:
            try:
                return spec.method(instance, bound, **args)
            except TypeError as exc:
                # only translate signature mismatches at this dispatch level
                if _is_dispatch_error(exc, spec.name):
                    raise InvalidArguments(f"bad arguments for {op}: {exc}") from None
                raise
        finally:
            self._stack.pop()

    def commit(self) -> dict[Address, ContractRecord]:
        """Serialize touched contracts, check quotas, return updated records."""
        for address, instance in self._instances.items():
            record = self.record_for(address)
            data = instance.encode()
            if len(data) > record.storage_quota:
                raise QuotaExceeded(
                    f"contract {address} needs {len(data)} bytes, quota is {record.storage_quota}"
                )
            record.storage = data
        return self._scratch


def _is_dispatch_error(exc: TypeError, op_name: str) -> bool:
    text = str(exc)
    return op_name in text and ("argument" in text or "arguments" in text)
