"""Time-locked message store: per-sender messages released after their unlock time."""

from __future__ import annotations

from dataclasses import dataclass

from ..crypto import Address
from ..encoding import Reader, enc_str, enc_u32, enc_u64, enc_u8
from ..errors import EmptyBody, InvalidRange
from ..ical import MAX_UNIX
from ..runtime import CallContext, Contract, operation

STATE_VERSION = 1

# id 0 marks a slot whose message has not been released yet
EMPTY_SLOT = {"id": 0, "body": "", "unlock_time": 0}


@dataclass
class StoredMessage:
    id: int  # 1-based position in the sender's append-only list
    body: str
    unlock_time: int

    def to_json(self) -> dict:
        return {"id": self.id, "body": self.body, "unlock_time": self.unlock_time}


class MessageTimeStore(Contract):
    kind = "msg-store"

    def __init__(self, senders: dict[Address, list[StoredMessage]] | None = None):
        self.senders = senders or {}

    @classmethod
    def create(cls, ctx: CallContext, args: dict) -> "MessageTimeStore":
        return cls()

    @operation()
    def store_msg(self, ctx: CallContext, body, unlock_time):
        if not isinstance(body, str) or body == "":
            raise EmptyBody("message body must be a non-empty string")
        if not isinstance(unlock_time, int) or isinstance(unlock_time, bool) or not 0 <= unlock_time < MAX_UNIX:
            raise InvalidRange(f"unlock_time outside supported range: {unlock_time!r}")
        messages = self.senders.setdefault(ctx.msg_sender, [])
        msg = StoredMessage(id=len(messages) + 1, body=body, unlock_time=unlock_time)
        messages.append(msg)
        return msg.id

    @operation(read_only=True)
    def get_msg_timed(self, ctx: CallContext):
        """All slots for the caller; unreleased positions hold the empty sentinel."""
        slots = []
        for msg in self.senders.get(ctx.msg_sender, []):
            if ctx.block_time >= msg.unlock_time:
                slots.append(msg.to_json())
            else:
                slots.append(dict(EMPTY_SLOT))
        return slots

    def encode(self) -> bytes:
        out = [enc_u8(STATE_VERSION), enc_u32(len(self.senders))]
        for sender in sorted(self.senders):
            messages = self.senders[sender]
            out.append(sender.bytes)
            out.append(enc_u32(len(messages)))
            for msg in messages:
                out.append(enc_str(msg.body))
                out.append(enc_u64(msg.unlock_time))
        return b"".join(out)

    @classmethod
    def decode(cls, data: bytes) -> "MessageTimeStore":
        if data == b"":
            return cls()
        r = Reader(data)
        if r.u8() != STATE_VERSION:
            raise ValueError("unsupported msg-store state version")
        senders: dict[Address, list[StoredMessage]] = {}
        for _ in range(r.u32()):
            sender = Address(r.raw(20))
            messages = []
            for i in range(r.u32()):
                body = r.str_()
                unlock = r.u64()
                messages.append(StoredMessage(id=i + 1, body=body, unlock_time=unlock))
            senders[sender] = messages
        r.expect_done()
        return cls(senders)
