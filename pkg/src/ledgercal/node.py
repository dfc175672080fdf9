"""One node process: sequencer, injected clock, and chain file persistence."""

from __future__ import annotations

import os
import time

from .contracts import build_registry
from .crypto import Address
from .ledger import GenesisConfig, Ledger, read_chain_file
from .runtime import ContractRegistry


class ManualClock:
    """Explicitly driven clock; tests and dev mode control time directly."""

    def __init__(self, start: int = 0):
        self._now = start

    def now(self) -> int:
        return self._now

    def set(self, t: int) -> None:
        self._now = t

    def advance(self, seconds: int) -> int:
        self._now += seconds
        return self._now


class WallClock:
    def now(self) -> int:
        return int(time.time())


class Node:
    """Sequencer plus clock; the gateway and CLI embed one of these."""

    def __init__(self, ledger: Ledger, clock, dev_mode: bool = False):
        self.ledger = ledger
        self.clock = clock
        self.dev_mode = dev_mode

    @classmethod
    def create(cls, genesis: GenesisConfig, chain_path: str | None = None,
               registry: ContractRegistry | None = None, clock=None,
               dev_mode: bool = False) -> "Node":
        registry = registry or build_registry()
        clock = clock or ManualClock(start=genesis.timestamp)
        fh = open(chain_path, "wb") if chain_path else None
        ledger = Ledger(genesis, registry, chain_file=fh)
        return cls(ledger, clock, dev_mode=dev_mode)

    @classmethod
    def open(cls, chain_path: str, registry: ContractRegistry | None = None,
             clock=None, dev_mode: bool = False) -> "Node":
        """Resume from an existing chain file, verifying it block by block."""
        registry = registry or build_registry()
        genesis, blocks = read_chain_file(chain_path)
        fh = open(chain_path, "ab")
        ledger = Ledger.resume(genesis, blocks, registry, chain_file=fh)
        clock = clock or ManualClock(start=ledger.state.current_time)
        return cls(ledger, clock, dev_mode=dev_mode)

    @classmethod
    def create_or_open(cls, chain_path: str, genesis: GenesisConfig,
                       registry: ContractRegistry | None = None, clock=None,
                       dev_mode: bool = False) -> "Node":
        if os.path.exists(chain_path) and os.path.getsize(chain_path) > 0:
            return cls.open(chain_path, registry=registry, clock=clock, dev_mode=dev_mode)
        return cls.create(genesis, chain_path, registry=registry, clock=clock, dev_mode=dev_mode)

    def seal(self):
        return self.ledger.seal_block(self.clock.now())

    def close(self) -> None:
        fh = self.ledger._chain_file
        if fh is not None:
            fh.close()
            self.ledger._chain_file = None


def parse_alloc(pairs: list[str]) -> dict[Address, int]:
    """Parse ``0xaddr=balance`` strings into a genesis allocation."""
    alloc: dict[Address, int] = {}
    for pair in pairs:
        addr_text, sep, amount = pair.partition("=")
        if not sep:
            raise ValueError(f"expected 0xaddr=balance, got {pair!r}")
        alloc[Address.parse(addr_text)] = int(amount)
    return alloc
