import datetime as dt

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ledgercal.errors import (
    InvalidCivil,
    MalformedDateTime,
    MalformedDocument,
    OutOfRange,
)
from ledgercal.ical import (
    PRODID,
    CalendarEvent,
    CivilDateTime,
    IcalDocument,
    civil_to_unix,
    escape_text,
    format_dt,
    fold_line,
    parse,
    parse_dt,
    serialize,
    unescape_text,
    unix_to_civil,
)

UTC = dt.timezone.utc


# --- unix <-> civil ---------------------------------------------------------

def test_epoch_identity():
    assert unix_to_civil(0) == CivilDateTime(1970, 1, 1, 0, 0, 0)
    assert civil_to_unix(CivilDateTime(1970, 1, 1, 0, 0, 0)) == 0


def test_last_second_of_first_day():
    assert unix_to_civil(86399) == CivilDateTime(1970, 1, 1, 23, 59, 59)


def test_conference_timestamp_roundtrip():
    # value checked against the day-iteration oracle below and stdlib datetime
    c = CivilDateTime(1996, 9, 18, 14, 30, 0)
    t = civil_to_unix(c)
    assert t == int(dt.datetime(1996, 9, 18, 14, 30, tzinfo=UTC).timestamp())
    assert unix_to_civil(t) == c


def test_out_of_range_and_invalid_civil():
    with pytest.raises(OutOfRange):
        unix_to_civil(-1)
    with pytest.raises(OutOfRange):
        unix_to_civil(2**40)
    with pytest.raises(InvalidCivil):
        civil_to_unix(CivilDateTime(2021, 2, 30, 0, 0, 0))
    with pytest.raises(InvalidCivil):
        civil_to_unix(CivilDateTime(2021, 13, 1, 0, 0, 0))
    with pytest.raises(InvalidCivil):
        civil_to_unix(CivilDateTime(2021, 1, 1, 24, 0, 0))
    with pytest.raises(OutOfRange):
        civil_to_unix(CivilDateTime(1969, 12, 31, 23, 59, 59))


def test_leap_year_rules():
    # 4/100/400: 2000-02-29 exists, 1900-02-29 does not
    civil_to_unix(CivilDateTime(2000, 2, 29, 0, 0, 0))
    with pytest.raises(InvalidCivil):
        civil_to_unix(CivilDateTime(1900, 2, 29, 0, 0, 0))


def day_iteration_table(last_day: int):
    """Brute-force oracle: walk forward one day at a time from the epoch."""
    def leap(y):
        return y % 4 == 0 and (y % 100 != 0 or y % 400 == 0)

    month_days = [31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31]
    table = []
    y, m, d = 1970, 1, 1
    for _ in range(last_day + 1):
        table.append((y, m, d))
        d += 1
        limit = 29 if (m == 2 and leap(y)) else month_days[m - 1]
        if d > limit:
            d, m = 1, m + 1
            if m > 12:
                m, y = 1, y + 1
    return table


def test_unix_to_civil_against_day_iteration_oracle():
    table = day_iteration_table(1000)
    for day in range(1001):
        for offset in (0, 3661, 86399):
            t = day * 86400 + offset
            c = unix_to_civil(t)
            assert (c.year, c.month, c.day) == table[day]
            assert (c.hour, c.minute, c.second) == (offset // 3600, offset % 3600 // 60, offset % 60)


@given(st.integers(0, 4_102_444_800))
@settings(max_examples=300)
def test_bijection_and_stdlib_agreement(t):
    c = unix_to_civil(t)
    assert civil_to_unix(c) == t
    ref = dt.datetime.fromtimestamp(t, tz=UTC)
    assert (c.year, c.month, c.day, c.hour, c.minute, c.second) == (
        ref.year, ref.month, ref.day, ref.hour, ref.minute, ref.second,
    )


# --- date-time text form -----------------------------------------------------

def test_format_dt_examples():
    assert format_dt(CivilDateTime(1970, 1, 1, 0, 0, 0)) == "19700101T000000Z"
    assert format_dt(CivilDateTime(1996, 9, 18, 14, 30, 0)) == "19960918T143000Z"


def test_parse_dt_examples():
    assert parse_dt("19960918T143000Z") == CivilDateTime(1996, 9, 18, 14, 30, 0)
    for bad in ("19961332T999999Z", "1996-09-18T14:30:00Z", "19960918T143000", "garbage"):
        with pytest.raises(MalformedDateTime):
            parse_dt(bad)


@given(st.integers(0, 4_102_444_800))
@settings(max_examples=200)
def test_format_parse_identity(t):
    c = unix_to_civil(t)
    assert parse_dt(format_dt(c)) == c


# --- escaping and folding ------------------------------------------------------

def test_escape_rules():
    assert escape_text("a,b;c") == "a\\,b\\;c"
    assert escape_text("line1\nline2") == "line1\\nline2"
    assert escape_text("back\\slash") == "back\\\\slash"
    assert unescape_text("a\\,b\\;c") == "a,b;c"
    assert unescape_text("x\\ny") == "x\ny"
    assert unescape_text("x\\Ny") == "x\ny"


@given(st.text(max_size=400))
def test_escape_unescape_identity(text):
    # bare carriage returns are normalized to newlines on the way in
    normalized = text.replace("\r\n", "\n").replace("\r", "\n")
    assert unescape_text(escape_text(text)) == normalized


def test_escape_normalizes_line_endings():
    assert escape_text("a\r\nb") == "a\\nb"
    assert escape_text("a\rb") == "a\\nb"


def independent_unfold(text: str) -> list[str]:
    """Reference unfolding written against the folding rule, not the code."""
    lines = text.split("\r\n")
    out = []
    for line in lines:
        if line == "":
            continue
        if line[:1] in (" ", "\t"):
            out[-1] += line[1:]
        else:
            out.append(line)
    return out


def test_folding_at_75_octets():
    line = "DESCRIPTION:" + "x" * 80
    folded = fold_line(line)
    physical = folded.split("\r\n")
    assert len(physical) == 2
    assert all(len(p.encode()) <= 75 for p in physical)
    assert physical[1].startswith(" ")
    assert independent_unfold(folded + "\r\n") == [line]


def test_fold_boundary_is_exact():
    at_limit = "X:" + "a" * 73  # 75 octets stays on one line
    assert fold_line(at_limit) == at_limit
    over = "X:" + "a" * 74  # 76 octets folds
    folded = fold_line(over)
    first, second = folded.split("\r\n")
    assert len(first.encode()) == 75
    assert second == " a"


def test_folding_never_splits_utf8():
    line = "SUMMARY:" + "é" * 120
    folded = fold_line(line)
    for piece in folded.split("\r\n"):
        piece.encode("utf-8")  # decodes cleanly piece by piece
        assert len(piece.encode()) <= 75
    assert independent_unfold(folded + "\r\n") == [line]


# --- serializer ------------------------------------------------------------------

def test_empty_document_golden():
    expected = (
        "BEGIN:VCALENDAR\r\n"
        f"PRODID:{PRODID}\r\n"
        "VERSION:2.0\r\n"
        "END:VCALENDAR\r\n"
    )
    assert serialize(IcalDocument()) == expected


def sample_event(**overrides):
    fields = dict(
        uid="uid-1@0x" + "ab" * 20,
        dtstart=843_057_000,
        dtend=843_256_800,
        summary="Networld+Interop Conference",
        description="Networld+Interop Conference and Exhibit\nAtlanta World Congress Center\nAtlanta, Georgia",
        organizer="0x" + "ab" * 20,
        dtstamp=836_481_600,
    )
    fields.update(overrides)
    return CalendarEvent(**fields)


def test_serialize_property_order_and_escapes():
    text = serialize(IcalDocument(events=[sample_event(summary="a,b;c")]))
    lines = independent_unfold(text)
    names = [line.split(":", 1)[0] for line in lines]
    assert names == [
        "BEGIN", "PRODID", "VERSION",
        "BEGIN", "DTSTAMP", "UID", "ORGANIZER", "DTSTART", "DTEND", "SUMMARY", "DESCRIPTION", "END",
        "END",
    ]
    assert "SUMMARY:a\\,b\\;c" in lines
    assert all(len(p.encode()) <= 75 for p in text.split("\r\n"))


def test_serialize_is_deterministic():
    doc = IcalDocument(events=[sample_event()])
    assert serialize(doc) == serialize(doc)


def test_passthrough_properties_sit_in_listing_position():
    ev = sample_event(extras=[("STATUS", "CONFIRMED"), ("CATEGORIES", "CONFERENCE")])
    lines = independent_unfold(serialize(IcalDocument(events=[ev])))
    names = [line.split(":", 1)[0] for line in lines]
    assert names[8:12] == ["DTEND", "STATUS", "CATEGORIES", "SUMMARY"]


# --- parser ------------------------------------------------------------------------

CONFERENCE_ICS = (
    "BEGIN:VCALENDAR\r\n"
    "PRODID:-//xyz Corp//NONSGML PDA Calendar Version 1.0//EN\r\n"
    "VERSION:2.0\r\n"
    "BEGIN:VEVENT\r\n"
    "DTSTAMP:19960704T120000Z\r\n"
    "UID:uid1@example.com\r\n"
    "ORGANIZER:mailto:jsmith@example.com\r\n"
    "DTSTART:19960918T143000Z\r\n"
    "DTEND:19960920T220000Z\r\n"
    "STATUS:CONFIRMED\r\n"
    "CATEGORIES:CONFERENCE\r\n"
    "SUMMARY:Networld+Interop Conference\r\n"
    "DESCRIPTION:Networld+Interop Conference\r\n"
    "  and Exhibit\\nAtlanta World Congress Center\\n\r\n"
    " Atlanta\\, Georgia\r\n"
    "END:VEVENT\r\n"
    "END:VCALENDAR\r\n"
)


def test_parse_conference_example():
    doc = parse(CONFERENCE_ICS)
    assert doc.prodid == "-//xyz Corp//NONSGML PDA Calendar Version 1.0//EN"
    assert doc.version == "2.0"
    assert len(doc.events) == 1
    ev = doc.events[0]
    assert ev.uid == "uid1@example.com"
    assert ev.organizer == "mailto:jsmith@example.com"
    assert ev.summary == "Networld+Interop Conference"
    assert ev.description == (
        "Networld+Interop Conference and Exhibit\n"
        "Atlanta World Congress Center\nAtlanta, Georgia"
    )
    assert ev.dtstart == civil_to_unix(CivilDateTime(1996, 9, 18, 14, 30, 0))
    assert ev.dtend == civil_to_unix(CivilDateTime(1996, 9, 20, 22, 0, 0))
    assert ev.dtstamp == civil_to_unix(CivilDateTime(1996, 7, 4, 12, 0, 0))
    assert ev.extras == [("STATUS", "CONFIRMED"), ("CATEGORIES", "CONFERENCE")]


def test_parse_rejects_malformed_documents():
    with pytest.raises(MalformedDocument):
        parse("SUMMARY:no envelope\r\n")
    truncated = CONFERENCE_ICS.replace("END:VEVENT\r\n", "")
    with pytest.raises(MalformedDocument):
        parse(truncated)
    with pytest.raises(MalformedDocument):
        parse("BEGIN:VCALENDAR\r\nBEGIN:VEVENT\r\nBEGIN:VEVENT\r\nEND:VCALENDAR\r\n")
    with pytest.raises(MalformedDateTime):
        parse(CONFERENCE_ICS.replace("19960918T143000Z", "19961332T999999Z"))


# --- round-trip -----------------------------------------------------------------------

text_values = st.text(
    alphabet=st.characters(blacklist_categories=("Cs", "Cc")) | st.sampled_from(",;\\\n"),
    max_size=120,
)
extra_names = st.sampled_from(["STATUS", "CATEGORIES", "LOCATION", "X-NOTE", "X-LONG-NAME"])


@st.composite
def documents(draw):
    events = []
    for i in range(draw(st.integers(0, 3))):
        start = draw(st.integers(0, 4_102_444_800))
        events.append(
            CalendarEvent(
                uid=f"uid-{i + 1}@0x" + "cd" * 20,
                dtstart=start,
                dtend=start + draw(st.integers(0, 10_000_000)),
                summary=draw(text_values),
                description=draw(text_values),
                organizer="0x" + "cd" * 20,
                dtstamp=draw(st.integers(0, 4_102_444_800)),
                extras=[(name, draw(text_values)) for name in draw(st.lists(extra_names, max_size=2, unique=True))],
            )
        )
    return IcalDocument(events=events)


@given(documents())
@settings(max_examples=150)
def test_roundtrip(doc):
    assert parse(serialize(doc)) == doc
