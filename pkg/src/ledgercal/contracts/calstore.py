"""Per-address calendar event storage with structured and iCal retrieval."""

from __future__ import annotations

from dataclasses import dataclass, field

from ..crypto import Address
from ..encoding import Reader, enc_str, enc_u32, enc_u64, enc_u8
from ..errors import InvalidRange, NotFound, TextTooLong
from ..ical import MAX_UNIX, CalendarEvent, IcalDocument, serialize
from ..runtime import CallContext, Contract, operation

STATE_VERSION = 1

DEFAULT_TEXT_LIMIT = 4096  # combined summary+description characters per event


@dataclass
class OwnerCalendar:
    """Event list for one address; the uid counter never reuses values."""

    next_seq: int = 1
    events: list[CalendarEvent] = field(default_factory=list)


def _check_time(name: str, value) -> int:
    if not isinstance(value, int) or isinstance(value, bool) or not 0 <= value < MAX_UNIX:
        raise InvalidRange(f"{name} outside supported range: {value!r}")
    return value


class CalendarStore(Contract):
    kind = "cal-store"

    def __init__(self, owners: dict[Address, OwnerCalendar] | None = None,
                 text_limit: int = DEFAULT_TEXT_LIMIT):
        self.owners = owners or {}
        self.text_limit = text_limit

    @classmethod
    def create(cls, ctx: CallContext, args: dict) -> "CalendarStore":
        limit = args.get("text_limit", DEFAULT_TEXT_LIMIT)
        if not isinstance(limit, int) or isinstance(limit, bool) or limit <= 0:
            raise InvalidRange(f"text_limit must be a positive integer: {limit!r}")
        return cls(text_limit=limit)

    @operation()
    def store_event(self, ctx: CallContext, dtstart, dtend, summary, description):
        _check_time("dtstart", dtstart)
        _check_time("dtend", dtend)
        if dtend < dtstart:
            raise InvalidRange(f"dtend {dtend} is before dtstart {dtstart}")
        if not isinstance(summary, str) or not isinstance(description, str):
            raise InvalidRange("summary and description must be strings")
        # normalize line endings so structured and iCal retrieval agree exactly
        summary = summary.replace("\r\n", "\n").replace("\r", "\n")
        description = description.replace("\r\n", "\n").replace("\r", "\n")
        if len(summary) + len(description) > self.text_limit:
            raise TextTooLong(
                f"summary+description is {len(summary) + len(description)} chars, "
                f"limit is {self.text_limit}"
            )
        cal = self.owners.setdefault(ctx.msg_sender, OwnerCalendar())
        uid = f"uid-{cal.next_seq}@{ctx.msg_sender}"
        cal.next_seq += 1
        cal.events.append(
            CalendarEvent(
                uid=uid,
                dtstart=dtstart,
                dtend=dtend,
                summary=summary,
                description=description,
                organizer=str(ctx.msg_sender),
                dtstamp=ctx.block_time,
            )
        )
        return uid

    @operation()
    def remove_event(self, ctx: CallContext, uid):
        cal = self.owners.get(ctx.msg_sender)
        if cal is not None:
            for i, ev in enumerate(cal.events):
                if ev.uid == uid:
                    del cal.events[i]  # shift, keeping the remaining order
                    return True
        raise NotFound(f"no event {uid!r} for {ctx.msg_sender}")

    @operation(read_only=True)
    def get_events_obj(self, ctx: CallContext):
        cal = self.owners.get(ctx.msg_sender)
        if cal is None:
            return []
        return [ev.to_json() for ev in cal.events]

    @operation(read_only=True)
    def get_events_ical(self, ctx: CallContext):
        cal = self.owners.get(ctx.msg_sender)
        events = list(cal.events) if cal else []
        return serialize(IcalDocument(events=events))

    def encode(self) -> bytes:
        out = [enc_u8(STATE_VERSION), enc_u32(self.text_limit), enc_u32(len(self.owners))]
        for owner in sorted(self.owners):
            cal = self.owners[owner]
            out.append(owner.bytes)
            out.append(enc_u64(cal.next_seq))
            out.append(enc_u32(len(cal.events)))
            for ev in cal.events:
                out.append(enc_str(ev.uid))
                out.append(enc_u64(ev.dtstart))
                out.append(enc_u64(ev.dtend))
                out.append(enc_str(ev.summary))
                out.append(enc_str(ev.description))
                out.append(enc_str(ev.organizer))
                out.append(enc_u64(ev.dtstamp))
        return b"".join(out)

    @classmethod
    def decode(cls, data: bytes) -> "CalendarStore":
        if data == b"":
            return cls()
        r = Reader(data)
        if r.u8() != STATE_VERSION:
            raise ValueError("unsupported cal-store state version")
        text_limit = r.u32()
        owners: dict[Address, OwnerCalendar] = {}
        for _ in range(r.u32()):
            owner = Address(r.raw(20))
            cal = OwnerCalendar(next_seq=r.u64())
            for _ in range(r.u32()):
                cal.events.append(
                    CalendarEvent(
                        uid=r.str_(),
                        dtstart=r.u64(),
                        dtend=r.u64(),
                        summary=r.str_(),
                        description=r.str_(),
                        organizer=r.str_(),
                        dtstamp=r.u64(),
                    )
                )
            owners[owner] = cal
        r.expect_done()
        return cls(owners, text_limit=text_limit)
