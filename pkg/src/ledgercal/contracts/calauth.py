"""Organization-owned authorization proxy in front of a calendar store.

Exposes the store's externally facing interface unchanged; the only
difference a client sees is the contract address it calls.  Grants are
per-account (re-granting replaces), carry a read or read-write level and an
optional validity window, and are administered by the admin role, which the
ownership transfer hands over atomically.

Events created through the proxy are stored in the backing store under the
proxy's own address, so they belong to the organization, not the writer.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import IntEnum

from ..crypto import Address
from ..encoding import Reader, enc_u32, enc_u64, enc_u8
from ..errors import AccessDenied, InvalidArguments, InvalidWindow, UnknownContract
from ..ical import MAX_UNIX, CalendarEvent, IcalDocument, serialize
from ..runtime import ADMIN_ROLE, CallContext, Contract, RoleSet, only_owner_guard, operation

STATE_VERSION = 1


class AccessLevel(IntEnum):
    NONE = 0
    READ = 1
    WRITE = 2
    ADMIN = 3  # administrative marker reported for the owner, never granted

    @property
    def label(self) -> str:
        return self.name.lower()


def parse_level(value) -> AccessLevel:
    if isinstance(value, str) and value.lower() in ("read", "write"):
        return AccessLevel[value.upper()]
    raise InvalidArguments(f"level must be 'read' or 'write', got {value!r}")


@dataclass
class RoleGrant:
    account: Address
    level: AccessLevel
    not_before: int | None  # None = open bound
    not_after: int | None

    def window_contains(self, t: int) -> bool:
        if self.not_before is not None and t < self.not_before:
            return False
        if self.not_after is not None and t > self.not_after:
            return False
        return True


def _check_bound(name: str, value) -> int | None:
    if value is None:
        return None
    if not isinstance(value, int) or isinstance(value, bool) or not 0 <= value < MAX_UNIX:
        raise InvalidWindow(f"{name} outside supported range: {value!r}")
    return value


class CalendarAuth(Contract):
    kind = "cal-auth"

    def __init__(self, calstore: Address, roles: RoleSet,
                 grants: dict[Address, RoleGrant] | None = None):
        self.calstore = calstore
        self.roles = roles
        self.grants = grants or {}

    @classmethod
    def create(cls, ctx: CallContext, args: dict) -> "CalendarAuth":
        try:
            calstore = Address.parse(args["calstore"])
        except (KeyError, ValueError) as exc:
            raise InvalidArguments(f"calstore address required: {exc}") from None
        if not ctx.contract_exists(calstore):
            raise UnknownContract(f"no contract at {calstore}")
        roles = RoleSet(members={ADMIN_ROLE: {ctx.origin}})
        return cls(calstore=calstore, roles=roles)

    # --- administration ----------------------------------------------------

    @operation()
    def grant_access(self, ctx: CallContext, account, level, not_before=None, not_after=None):
        self.roles.require_admin(ctx)
        target = Address.parse(account)
        lvl = parse_level(level)
        nb = _check_bound("not_before", not_before)
        na = _check_bound("not_after", not_after)
        if nb is not None and na is not None and nb > na:
            raise InvalidWindow(f"not_before {nb} is after not_after {na}")
        self.grants[target] = RoleGrant(account=target, level=lvl, not_before=nb, not_after=na)
        return None

    @operation()
    def revoke_access(self, ctx: CallContext, account):
        self.roles.require_admin(ctx)
        self.grants.pop(Address.parse(account), None)
        return None

    @operation()
    def transfer_cal_auth(self, ctx: CallContext, new_owner):
        record = ctx.self_record()
        only_owner_guard(ctx, record)
        target = Address.parse(new_owner)
        if target == ctx.msg_sender:
            return None  # identity transfer leaves everything unchanged
        self.roles.grant(ctx, ADMIN_ROLE, target)
        self.roles.revoke(ctx, ADMIN_ROLE, ctx.msg_sender)
        ctx.set_owner(target)
        return None

    @operation(read_only=True)
    def user_access_level(self, ctx: CallContext):
        if self.roles.has(ADMIN_ROLE, ctx.msg_sender):
            return {"level": AccessLevel.ADMIN.label, "not_before": None, "not_after": None}
        grant = self.grants.get(ctx.msg_sender)
        if grant is None:
            return {"level": AccessLevel.NONE.label, "not_before": None, "not_after": None}
        return {
            "level": grant.level.label,
            "not_before": grant.not_before,
            "not_after": grant.not_after,
        }

    @operation(read_only=True)
    def list_grants(self, ctx: CallContext):
        """Dashboard view of all grants; restricted to the admin role."""
        self.roles.require_admin(ctx)
        return [
            {
                "account": str(g.account),
                "level": g.level.label,
                "not_before": g.not_before,
                "not_after": g.not_after,
            }
            for g in sorted(self.grants.values(), key=lambda g: g.account)
        ]

    # --- proxied store interface --------------------------------------------

    def _require_write(self, ctx: CallContext) -> RoleGrant:
        grant = self.grants.get(ctx.msg_sender)
        if grant is None or grant.level < AccessLevel.WRITE:
            raise AccessDenied(f"{ctx.msg_sender} has no write access")
        if not grant.window_contains(ctx.block_time):
            raise AccessDenied(f"write window closed for {ctx.msg_sender}")
        return grant

    def _require_read(self, ctx: CallContext) -> RoleGrant:
        grant = self.grants.get(ctx.msg_sender)
        if grant is None or grant.level < AccessLevel.READ:
            raise AccessDenied(f"{ctx.msg_sender} has no read access")
        return grant

    @operation()
    def store_event(self, ctx: CallContext, dtstart, dtend, summary, description):
        self._require_write(ctx)
        return ctx.call(
            self.calstore,
            "store_event",
            {"dtstart": dtstart, "dtend": dtend, "summary": summary, "description": description},
        )

    @operation()
    def remove_event(self, ctx: CallContext, uid):
        self._require_write(ctx)
        return ctx.call(self.calstore, "remove_event", {"uid": uid})

    def _visible_events(self, ctx: CallContext, grant: RoleGrant) -> list[dict]:
        events = ctx.call(self.calstore, "get_events_obj", {})
        nb, na = grant.not_before, grant.not_after
        return [
            ev
            for ev in events
            if (nb is None or ev["dtstart"] >= nb) and (na is None or ev["dtstart"] <= na)
        ]

    @operation(read_only=True)
    def get_events_obj(self, ctx: CallContext):
        grant = self._require_read(ctx)
        return self._visible_events(ctx, grant)

    @operation(read_only=True)
    def get_events_ical(self, ctx: CallContext):
        grant = self._require_read(ctx)
        events = [CalendarEvent.from_json(ev) for ev in self._visible_events(ctx, grant)]
        return serialize(IcalDocument(events=events))

    # --- state codec ---------------------------------------------------------

    def encode(self) -> bytes:
        out = [enc_u8(STATE_VERSION), self.calstore.bytes, self.roles.encode()]
        out.append(enc_u32(len(self.grants)))
        for account in sorted(self.grants):
            grant = self.grants[account]
            out.append(account.bytes)
            out.append(enc_u8(int(grant.level)))
            for bound in (grant.not_before, grant.not_after):
                if bound is None:
                    out.append(enc_u8(0))
                    out.append(enc_u64(0))
                else:
                    out.append(enc_u8(1))
                    out.append(enc_u64(bound))
        return b"".join(out)

    @classmethod
    def decode(cls, data: bytes) -> "CalendarAuth":
        r = Reader(data)
        if r.u8() != STATE_VERSION:
            raise ValueError("unsupported cal-auth state version")
        calstore = Address(r.raw(20))
        roles = RoleSet.decode(r)
        grants: dict[Address, RoleGrant] = {}
        for _ in range(r.u32()):
            account = Address(r.raw(20))
            level = AccessLevel(r.u8())
            has_nb, nb = r.u8(), r.u64()
            has_na, na = r.u8(), r.u64()
            grants[account] = RoleGrant(
                account=account,
                level=level,
                not_before=nb if has_nb else None,
                not_after=na if has_na else None,
            )
        r.expect_done()
        return cls(calstore=calstore, roles=roles, grants=grants)
