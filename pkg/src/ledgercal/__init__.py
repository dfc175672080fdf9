"""ledgercal: a calendar and time-locked message store on a deterministic
replicated ledger simulator, with an iCalendar feed gateway and a digital
preservation scorecard."""

from .crypto import Address, KeyPair, keygen
from .ledger import Block, ChainState, FeeSchedule, GenesisConfig, Ledger, SignedTransaction, replay

__all__ = [
    "Address",
    "Block",
    "ChainState",
    "FeeSchedule",
    "GenesisConfig",
    "KeyPair",
    "Ledger",
    "SignedTransaction",
    "keygen",
    "replay",
]

__version__ = "0.1.0"
