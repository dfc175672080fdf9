"""Minimal RFC 5545 serializer/parser and unix<->civil UTC conversion.

The serializer emits one VCALENDAR wrapping one VEVENT per event, with
CRLF line endings, 75-octet folding and TEXT escaping, deterministically
byte-for-byte.  The parser inverts the serializer on that subset and keeps
unknown properties as opaque pass-through pairs.

Date conversion uses the closed-form days-from-civil algorithm rather than
the platform's local-time machinery; everything is UTC, and the supported
range is 0 <= t < 2**40 unix seconds.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from .errors import InvalidCivil, MalformedDateTime, MalformedDocument, OutOfRange

PRODID = "-//ledgercal//calendar 0.1//EN"
ICAL_VERSION = "2.0"

MAX_UNIX = 2**40  # exclusive upper bound of the supported timestamp range
SECONDS_PER_DAY = 86400

FOLD_LIMIT = 75  # octets per physical line, continuation lines start with a space

_DT_RE = re.compile(r"^(\d{8})T(\d{6})Z$")

_DAYS_IN_MONTH = (31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31)


def is_leap_year(year: int) -> bool:
    return year % 4 == 0 and (year % 100 != 0 or year % 400 == 0)


def days_in_month(year: int, month: int) -> int:
    if month == 2 and is_leap_year(year):
        return 29
    return _DAYS_IN_MONTH[month - 1]


@dataclass(frozen=True)
class CivilDateTime:
    """A Gregorian UTC wall-clock instant."""

    year: int
    month: int
    day: int
    hour: int
    minute: int
    second: int

    def validate(self) -> "CivilDateTime":
        if not 1 <= self.month <= 12:
            raise InvalidCivil(f"month out of range: {self.month}")
        if not 1 <= self.day <= days_in_month(self.year, self.month):
            raise InvalidCivil(f"day out of range: {self.year}-{self.month:02d}-{self.day}")
        if not (0 <= self.hour <= 23 and 0 <= self.minute <= 59 and 0 <= self.second <= 59):
            raise InvalidCivil(f"time out of range: {self.hour}:{self.minute}:{self.second}")
        return self


def _days_from_civil(year: int, month: int, day: int) -> int:
    """Days since 1970-01-01 for a valid Gregorian date (closed form)."""
    y = year - (1 if month <= 2 else 0)
    era = (y if y >= 0 else y - 399) // 400
    yoe = y - era * 400
    doy = (153 * (month + (-3 if month > 2 else 9)) + 2) // 5 + day - 1
    doe = yoe * 365 + yoe // 4 - yoe // 100 + doy
    return era * 146097 + doe - 719468


def _civil_from_days(days: int) -> tuple[int, int, int]:
    """Inverse of :func:`_days_from_civil`."""
    z = days + 719468
    era = (z if z >= 0 else z - 146096) // 146097
    doe = z - era * 146097
    yoe = (doe - doe // 1460 + doe // 36524 - doe // 146096) // 365
    y = yoe + era * 400
    doy = doe - (365 * yoe + yoe // 4 - yoe // 100)
    mp = (5 * doy + 2) // 153
    day = doy - (153 * mp + 2) // 5 + 1
    month = mp + (3 if mp < 10 else -9)
    return y + (1 if month <= 2 else 0), month, day


def unix_to_civil(t: int) -> CivilDateTime:
    if not 0 <= t < MAX_UNIX:
        raise OutOfRange(f"timestamp outside supported range: {t}")
    days, rem = divmod(t, SECONDS_PER_DAY)
    year, month, day = _civil_from_days(days)
    hour, rem = divmod(rem, 3600)
    minute, second = divmod(rem, 60)
    return CivilDateTime(year, month, day, hour, minute, second)


def civil_to_unix(c: CivilDateTime) -> int:
    c.validate()
    t = _days_from_civil(c.year, c.month, c.day) * SECONDS_PER_DAY
    t += c.hour * 3600 + c.minute * 60 + c.second
    if not 0 <= t < MAX_UNIX:
        raise OutOfRange(f"civil date outside supported range: {c}")
    return t


def format_dt(c: CivilDateTime) -> str:
    """Render as the RFC 5545 basic UTC form, e.g. ``19960918T143000Z``."""
    c.validate()
    return f"{c.year:04d}{c.month:02d}{c.day:02d}T{c.hour:02d}{c.minute:02d}{c.second:02d}Z"


def parse_dt(text: str) -> CivilDateTime:
    m = _DT_RE.match(text)
    if not m:
        raise MalformedDateTime(f"not a YYYYMMDDTHHMMSSZ date-time: {text!r}")
    date_part, time_part = m.groups()
    c = CivilDateTime(
        year=int(date_part[0:4]),
        month=int(date_part[4:6]),
        day=int(date_part[6:8]),
        hour=int(time_part[0:2]),
        minute=int(time_part[2:4]),
        second=int(time_part[4:6]),
    )
    try:
        return c.validate()
    except InvalidCivil as exc:
        raise MalformedDateTime(str(exc)) from None


def format_unix(t: int) -> str:
    return format_dt(unix_to_civil(t))


def parse_unix(text: str) -> int:
    return civil_to_unix(parse_dt(text))


# --- document model ---------------------------------------------------------

@dataclass
class CalendarEvent:
    """One VEVENT-equivalent record.

    ``extras`` holds optional pass-through properties (STATUS, CATEGORIES,
    anything unknown) as (name, raw-text-value) pairs in emission order.
    """

    uid: str
    dtstart: int
    dtend: int
    summary: str
    description: str
    organizer: str
    dtstamp: int
    extras: list[tuple[str, str]] = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "uid": self.uid,
            "dtstart": self.dtstart,
            "dtend": self.dtend,
            "summary": self.summary,
            "description": self.description,
            "organizer": self.organizer,
            "dtstamp": self.dtstamp,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "CalendarEvent":
        return cls(
            uid=obj["uid"],
            dtstart=obj["dtstart"],
            dtend=obj["dtend"],
            summary=obj["summary"],
            description=obj["description"],
            organizer=obj["organizer"],
            dtstamp=obj["dtstamp"],
        )


@dataclass
class IcalDocument:
    prodid: str = PRODID
    version: str = ICAL_VERSION
    events: list[CalendarEvent] = field(default_factory=list)


def escape_text(value: str) -> str:
    """RFC 5545 3.3.11 TEXT escaping: backslash, semicolon, comma, newline."""
    value = value.replace("\\", "\\\\")
    value = value.replace(";", "\\;")
    value = value.replace(",", "\\,")
    value = value.replace("\r\n", "\n").replace("\r", "\n")
    return value.replace("\n", "\\n")


def unescape_text(value: str) -> str:
    out = []
    i = 0
    while i < len(value):
        ch = value[i]
        if ch == "\\" and i + 1 < len(value):
            nxt = value[i + 1]
            if nxt in ("n", "N"):
                out.append("\n")
            elif nxt in ("\\", ";", ","):
                out.append(nxt)
            else:
                # unknown escape, keep verbatim
                out.append(ch)
                out.append(nxt)
            i += 2
        else:
            out.append(ch)
            i += 1
    return "".join(out)


def fold_line(line: str) -> str:
    """Split a content line into <=75-octet chunks joined by CRLF+space."""
    data = line.encode("utf-8")
    if len(data) <= FOLD_LIMIT:
        return line
    parts = []
    start = 0
    limit = FOLD_LIMIT
    while start < len(data):
        end = min(start + limit, len(data))
        # never split inside a UTF-8 sequence
        while end < len(data) and (data[end] & 0xC0) == 0x80:
            end -= 1
        parts.append(data[start:end])
        start = end
        limit = FOLD_LIMIT - 1  # continuation lines spend one octet on the space
    return "\r\n ".join(p.decode("utf-8") for p in parts)


def _unfold(text: str) -> list[str]:
    if "\r\n" in text:
        text = text.replace("\r\n", "\n")
    lines: list[str] = []
    for raw in text.split("\n"):
        if raw.startswith((" ", "\t")):
            if not lines:
                raise MalformedDocument("continuation line before any content line")
            lines[-1] += raw[1:]
        elif raw != "":
            lines.append(raw)
    return lines


_EVENT_PROPS = ("DTSTAMP", "UID", "ORGANIZER", "DTSTART", "DTEND", "SUMMARY", "DESCRIPTION")


def serialize(doc: IcalDocument) -> str:
    """Deterministic text/calendar rendering of the document."""
    lines = ["BEGIN:VCALENDAR", f"PRODID:{doc.prodid}", f"VERSION:{doc.version}"]
    for ev in doc.events:
        lines.append("BEGIN:VEVENT")
        lines.append(f"DTSTAMP:{format_unix(ev.dtstamp)}")
        lines.append(f"UID:{escape_text(ev.uid)}")
        lines.append(f"ORGANIZER:{escape_text(ev.organizer)}")
        lines.append(f"DTSTART:{format_unix(ev.dtstart)}")
        lines.append(f"DTEND:{format_unix(ev.dtend)}")
        for name, value in ev.extras:
            lines.append(f"{name.upper()}:{escape_text(value)}")
        lines.append(f"SUMMARY:{escape_text(ev.summary)}")
        lines.append(f"DESCRIPTION:{escape_text(ev.description)}")
        lines.append("END:VEVENT")
    lines.append("END:VCALENDAR")
    return "".join(fold_line(line) + "\r\n" for line in lines)


def _parse_unix_prop(value: str) -> int:
    try:
        return civil_to_unix(parse_dt(value))
    except OutOfRange as exc:
        raise MalformedDateTime(str(exc)) from None


def parse(text: str) -> IcalDocument:
    """Parse the supported subset back into a document.

    Inverse of :func:`serialize`; raises MalformedDocument on structural
    problems and MalformedDateTime on bad date-time values.
    """
    lines = _unfold(text)
    if not lines or lines[0] != "BEGIN:VCALENDAR" or lines[-1] != "END:VCALENDAR":
        raise MalformedDocument("missing VCALENDAR envelope")

    doc = IcalDocument(prodid="", version="")
    current: dict | None = None
    for line in lines[1:-1]:
        if line == "BEGIN:VEVENT":
            if current is not None:
                raise MalformedDocument("nested BEGIN:VEVENT")
            current = {"extras": []}
            continue
        if line == "END:VEVENT":
            if current is None:
                raise MalformedDocument("END:VEVENT without BEGIN")
            doc.events.append(_finish_event(current))
            current = None
            continue
        if line.startswith(("BEGIN:", "END:")):
            raise MalformedDocument(f"unsupported component: {line}")
        name, sep, value = line.partition(":")
        if not sep:
            raise MalformedDocument(f"property line without colon: {line!r}")
        name = name.upper()
        if current is None:
            if name == "PRODID":
                doc.prodid = value
            elif name == "VERSION":
                doc.version = value
            # other calendar-level properties are ignored
        else:
            if name in ("DTSTAMP", "DTSTART", "DTEND"):
                current[name.lower()] = _parse_unix_prop(value)
            elif name in ("UID", "ORGANIZER", "SUMMARY", "DESCRIPTION"):
                current[name.lower()] = unescape_text(value)
            else:
                current["extras"].append((name, unescape_text(value)))
    if current is not None:
        raise MalformedDocument("missing END:VEVENT")
    return doc


def _finish_event(props: dict) -> CalendarEvent:
    missing = [k for k in ("dtstamp", "uid", "dtstart", "dtend") if k not in props]
    if missing:
        raise MalformedDocument(f"event missing required properties: {', '.join(missing)}")
    return CalendarEvent(
        uid=props["uid"],
        dtstart=props["dtstart"],
        dtend=props["dtend"],
        summary=props.get("summary", ""),
        description=props.get("description", ""),
        organizer=props.get("organizer", ""),
        dtstamp=props["dtstamp"],
        extras=props["extras"],
    )
