"""Built-in contract kinds and their registry."""

from ..runtime import ContractRegistry
from .calauth import AccessLevel, CalendarAuth, RoleGrant
from .calstore import CalendarStore, OwnerCalendar
from .msgstore import EMPTY_SLOT, MessageTimeStore, StoredMessage

__all__ = [
    "AccessLevel",
    "CalendarAuth",
    "CalendarStore",
    "EMPTY_SLOT",
    "MessageTimeStore",
    "OwnerCalendar",
    "RoleGrant",
    "StoredMessage",
    "build_registry",
]


def build_registry() -> ContractRegistry:
    registry = ContractRegistry()
    registry.register(MessageTimeStore)
    registry.register(CalendarStore)
    registry.register(CalendarAuth)
    return registry
