"""Standard MIDI File reading/writing and tick-to-millisecond phrase conversion.

Only what the pipeline needs is supported: format 0 and 1 files with a
ticks-per-quarter division.  Raw events are kept verbatim (running status
resolved) so a parsed document can be written back bit-for-bit equivalent.

Example
-------
>>> doc = parse_smf(open("phrase.mid", "rb").read())   # doctest: +SKIP
>>> phrase = to_phrase(doc)                             # doctest: +SKIP
"""

from __future__ import annotations

import struct
from bisect import bisect_right
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, NamedTuple, Optional

from .emotion import Quadrant
from .errors import (
    DanglingNoteOn,
    EmptyDocument,
    EmptyPhrase,
    MalformedHeader,
    MalformedTrack,
    TruncatedTrack,
    UnsupportedFormat,
)

DEFAULT_TEMPO_US = 500_000
META = 0xFF
SYSEX = 0xF0
SYSEX_ESCAPE = 0xF7
META_TEMPO = 0x51
META_END_OF_TRACK = 0x2F

# data byte count per channel-message high nibble
_DATA_LEN = {0x80: 2, 0x90: 2, 0xA0: 2, 0xB0: 2, 0xC0: 1, 0xD0: 1, 0xE0: 2}

MIN_PHRASE_MS = 100.0
MAX_PHRASE_MS = 6000.0


class TrackEvent(NamedTuple):
    """One raw event.

    ``data`` holds the channel-message data bytes, the sysex payload, or for
    meta events the type byte followed by the payload.
    """

    delta: int
    status: int
    data: bytes

    @property
    def is_meta(self) -> bool:
        return self.status == META

    @property
    def meta_type(self) -> Optional[int]:
        return self.data[0] if self.status == META else None


@dataclass(frozen=True)
class MidiDocument:
    format: int
    ticks_per_quarter: int
    tracks: tuple[tuple[TrackEvent, ...], ...]
    tempo_map: tuple[tuple[int, int], ...] = ()

    def __post_init__(self):
        if self.format not in (0, 1):
            raise UnsupportedFormat(f"format {self.format} not supported")
        if self.ticks_per_quarter <= 0:
            raise MalformedHeader("ticks_per_quarter must be positive")
        if not self.tempo_map:
            object.__setattr__(self, "tempo_map", extract_tempo_map(self.tracks))


@dataclass(frozen=True)
class NoteEvent:
    pitch: int
    onset_ms: float
    duration_ms: float
    velocity: int

    def __post_init__(self):
        if not 0 <= self.pitch <= 127:
            raise ValueError(f"pitch {self.pitch} outside 0..127")
        if not 1 <= self.velocity <= 127:
            raise ValueError(f"velocity {self.velocity} outside 1..127")
        if not self.duration_ms > 0:
            raise ValueError("duration_ms must be positive")
        if self.onset_ms < 0:
            raise ValueError("onset_ms must be non-negative")

    @property
    def offset_ms(self) -> float:
        return self.onset_ms + self.duration_ms


@dataclass(frozen=True)
class Phrase:
    """Timed note sequence, sorted by onset then pitch."""

    notes: tuple[NoteEvent, ...]
    quadrant: Optional[Quadrant] = None
    total_duration_ms: float = field(init=False)

    def __post_init__(self):
        notes = tuple(sorted(self.notes, key=lambda n: (n.onset_ms, n.pitch)))
        object.__setattr__(self, "notes", notes)
        total = max((n.offset_ms for n in notes), default=0.0)
        object.__setattr__(self, "total_duration_ms", total)

    def __len__(self) -> int:
        return len(self.notes)

    @property
    def is_admissible(self) -> bool:
        return MIN_PHRASE_MS <= self.total_duration_ms <= MAX_PHRASE_MS

    def with_quadrant(self, quadrant: Optional[Quadrant]) -> "Phrase":
        return Phrase(self.notes, quadrant)

    def shifted(self, offset_ms: float) -> "Phrase":
        return Phrase(
            tuple(NoteEvent(n.pitch, n.onset_ms + offset_ms, n.duration_ms, n.velocity) for n in self.notes),
            self.quadrant,
        )

    def transposed(self, semitones: int) -> "Phrase":
        return Phrase(
            tuple(NoteEvent(n.pitch + semitones, n.onset_ms, n.duration_ms, n.velocity) for n in self.notes),
            self.quadrant,
        )

    def time_scaled(self, factor: float) -> "Phrase":
        return Phrase(
            tuple(NoteEvent(n.pitch, n.onset_ms * factor, n.duration_ms * factor, n.velocity) for n in self.notes),
            self.quadrant,
        )

    def to_dict(self) -> dict:
        return {
            "quadrant": self.quadrant.value if self.quadrant else None,
            "notes": [[n.pitch, n.onset_ms, n.duration_ms, n.velocity] for n in self.notes],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Phrase":
        q = d.get("quadrant")
        return cls(
            tuple(NoteEvent(int(p), float(o), float(du), int(v)) for p, o, du, v in d["notes"]),
            Quadrant(q) if q else None,
        )


def make_phrase(notes: Iterable[tuple], quadrant: Optional[Quadrant] = None) -> Phrase:
    """Build a phrase from ``(pitch, onset_ms, duration_ms, velocity)`` tuples."""
    return Phrase(tuple(NoteEvent(int(p), float(o), float(d), int(v)) for p, o, d, v in notes), quadrant)


# -- variable-length quantities ------------------------------------------------

def encode_vlq(value: int) -> bytes:
    if not 0 <= value <= 0x0FFFFFFF:
        raise ValueError(f"VLQ value {value} out of range")
    out = [value & 0x7F]
    value >>= 7
    while value:
        out.append((value & 0x7F) | 0x80)
        value >>= 7
    return bytes(reversed(out))


def decode_vlq(buf: bytes, pos: int) -> tuple[int, int]:
    value = 0
    for _ in range(4):
        if pos >= len(buf):
            raise TruncatedTrack("variable-length quantity runs past end of track")
        b = buf[pos]
        pos += 1
        value = (value << 7) | (b & 0x7F)
        if not b & 0x80:
            return value, pos
    raise MalformedTrack("variable-length quantity longer than 4 bytes")


# -- parsing -------------------------------------------------------------------

def parse_smf(data: bytes) -> MidiDocument:
    """Decode a Standard MIDI File.

    Raises
    ------
    MalformedHeader, UnsupportedFormat, TruncatedTrack, MalformedTrack, DanglingNoteOn
    """
    data = bytes(data)
    if len(data) < 14 or data[:4] != b"MThd":
        raise MalformedHeader("missing MThd chunk")
    header_len = int.from_bytes(data[4:8], "big")
    if header_len < 6 or 8 + header_len > len(data):
        raise MalformedHeader(f"bad header length {header_len}")
    fmt, ntracks, division = struct.unpack(">HHH", data[8:14])
    if fmt not in (0, 1):
        raise UnsupportedFormat(f"SMF format {fmt} not supported")
    if division & 0x8000:
        raise UnsupportedFormat("SMPTE time division not supported")
    if division == 0:
        raise MalformedHeader("division must be positive")
    if fmt == 0 and ntracks != 1:
        raise MalformedHeader(f"format 0 file declares {ntracks} tracks")

    pos = 8 + header_len
    tracks = []
    while len(tracks) < ntracks:
        if pos + 8 > len(data):
            raise TruncatedTrack(f"expected {ntracks} tracks, found {len(tracks)}")
        tag = data[pos:pos + 4]
        length = int.from_bytes(data[pos + 4:pos + 8], "big")
        body = data[pos + 8:pos + 8 + length]
        if len(body) < length:
            raise TruncatedTrack("track chunk shorter than its declared length")
        pos += 8 + length
        if tag != b"MTrk":
            continue  # unknown chunk types are skipped
        tracks.append(_parse_track(body))
    tracks = tuple(tracks)
    return MidiDocument(fmt, division, tracks, extract_tempo_map(tracks))


def _parse_track(body: bytes) -> tuple[TrackEvent, ...]:
    events = []
    pos = 0
    running: Optional[int] = None
    while pos < len(body):
        delta, pos = decode_vlq(body, pos)
        if pos >= len(body):
            raise TruncatedTrack("event missing after delta time")
        status = body[pos]
        if status == META:
            if pos + 1 >= len(body):
                raise TruncatedTrack("meta event truncated")
            mtype = body[pos + 1]
            length, pos = decode_vlq(body, pos + 2)
            payload = body[pos:pos + length]
            if len(payload) < length:
                raise TruncatedTrack("meta event payload truncated")
            pos += length
            events.append(TrackEvent(delta, META, bytes([mtype]) + payload))
            if mtype == META_END_OF_TRACK:
                break
            continue
        if status in (SYSEX, SYSEX_ESCAPE):
            length, pos = decode_vlq(body, pos + 1)
            payload = body[pos:pos + length]
            if len(payload) < length:
                raise TruncatedTrack("sysex payload truncated")
            pos += length
            events.append(TrackEvent(delta, status, payload))
            continue
        if status & 0x80:
            if status >= 0xF0:
                raise MalformedTrack(f"status 0x{status:02X} not allowed in a file")
            running = status
            pos += 1
        elif running is None:
            raise MalformedTrack("data byte without running status")
        n = _DATA_LEN[running & 0xF0]
        payload = body[pos:pos + n]
        if len(payload) < n:
            raise TruncatedTrack("channel message truncated")
        if any(b & 0x80 for b in payload):
            raise MalformedTrack("status byte where data byte expected")
        pos += n
        events.append(TrackEvent(delta, running, payload))
    events = tuple(events)
    _check_note_pairing(events)
    return events


def _is_note_on(ev: TrackEvent) -> bool:
    return ev.status & 0xF0 == 0x90 and ev.data[1] > 0


def _is_note_off(ev: TrackEvent) -> bool:
    kind = ev.status & 0xF0
    return kind == 0x80 or (kind == 0x90 and ev.data[1] == 0)


def _check_note_pairing(events: Iterable[TrackEvent]) -> None:
    sounding = set()
    tick = 0
    for ev in events:
        tick += ev.delta
        key = (ev.status & 0x0F, ev.data[0]) if ev.status < 0xF0 else None
        if _is_note_on(ev):
            sounding.add(key)
        elif _is_note_off(ev):
            sounding.discard(key)
    if sounding:
        pitches = sorted(p for _, p in sounding)
        raise DanglingNoteOn(f"note-on without note-off for pitches {pitches}")


def extract_tempo_map(tracks: Iterable[Iterable[TrackEvent]]) -> tuple[tuple[int, int], ...]:
    """Collect set-tempo meta events from all tracks into a sorted tempo map."""
    changes = []
    order = 0
    for track in tracks:
        tick = 0
        for ev in track:
            tick += ev.delta
            if ev.status == META and ev.data[0] == META_TEMPO and len(ev.data) >= 4:
                changes.append((tick, order, int.from_bytes(ev.data[1:4], "big")))
                order += 1
    changes.sort()
    tempo: dict[int, int] = {}
    for tick, _, us in changes:
        tempo[tick] = us  # later events at the same tick win
    if 0 not in tempo:
        tempo[0] = DEFAULT_TEMPO_US
    return tuple(sorted(tempo.items()))


# -- writing -------------------------------------------------------------------

def _encode_event(ev: TrackEvent) -> bytes:
    out = bytearray(encode_vlq(ev.delta))
    out.append(ev.status)
    if ev.status == META:
        out.append(ev.data[0])
        out += encode_vlq(len(ev.data) - 1)
        out += ev.data[1:]
    elif ev.status in (SYSEX, SYSEX_ESCAPE):
        out += encode_vlq(len(ev.data))
        out += ev.data
    else:
        out += ev.data
    return bytes(out)


def write_document(doc: MidiDocument) -> bytes:
    """Serialize a document with explicit status bytes on every event."""
    out = bytearray(b"MThd")
    out += struct.pack(">IHHH", 6, doc.format, len(doc.tracks), doc.ticks_per_quarter)
    for track in doc.tracks:
        body = b"".join(_encode_event(ev) for ev in track)
        out += b"MTrk" + struct.pack(">I", len(body)) + body
    return bytes(out)


def write_smf(phrase: Phrase, ticks_per_quarter: int = 480, tempo_bpm: float = 120.0) -> bytes:
    """Render a phrase as a single-track format-0 file on channel 0.

    Onsets and offsets are rounded to the nearest tick; every note keeps at
    least one tick.  When two notes of the same pitch overlap the earlier one
    is cut at the later onset, mirroring how the parser pairs them.
    """
    if not phrase.notes:
        raise EmptyPhrase("cannot write an empty phrase")
    tempo_us = int(round(60_000_000 / tempo_bpm))
    ms_per_tick = tempo_us / (1000.0 * ticks_per_quarter)

    spans = []
    for n in phrase.notes:
        on = int(round(n.onset_ms / ms_per_tick))
        off = max(on + 1, int(round(n.offset_ms / ms_per_tick)))
        spans.append([on, off, n.pitch, min(127, max(1, n.velocity))])
    last_by_pitch: dict[int, list] = {}
    for span in sorted(spans, key=lambda s: (s[0], s[2])):
        prev = last_by_pitch.get(span[2])
        if prev is not None and prev[1] > span[0]:
            prev[1] = span[0]
        last_by_pitch[span[2]] = span
    spans = [s for s in spans if s[1] > s[0]]

    timed = []
    for on, off, pitch, vel in spans:
        timed.append((off, 0, pitch, bytes([0x80]), bytes([pitch, 0])))
        timed.append((on, 1, pitch, bytes([0x90]), bytes([pitch, vel])))
    timed.sort(key=lambda e: e[:3])

    events = [TrackEvent(0, META, bytes([META_TEMPO]) + tempo_us.to_bytes(3, "big"))]
    tick = 0
    for t, _, _, status, payload in timed:
        events.append(TrackEvent(t - tick, status[0], payload))
        tick = t
    events.append(TrackEvent(0, META, bytes([META_END_OF_TRACK])))
    return write_document(MidiDocument(0, ticks_per_quarter, (tuple(events),)))


# -- ticks to milliseconds ------------------------------------------------------

class TempoClock:
    """Piecewise-linear tick to millisecond conversion over a tempo map."""

    def __init__(self, tempo_map: Iterable[tuple[int, int]], ticks_per_quarter: int):
        self.ticks = []
        self.us = []
        self.start_ms = []
        acc = 0.0
        for i, (tick, us) in enumerate(tempo_map):
            if i:
                acc += (tick - self.ticks[-1]) * self.us[-1] / (1000.0 * ticks_per_quarter)
            self.ticks.append(tick)
            self.us.append(us)
            self.start_ms.append(acc)
        self.tpq = ticks_per_quarter

    def ms(self, tick: int) -> float:
        i = max(0, bisect_right(self.ticks, tick) - 1)
        return self.start_ms[i] + (tick - self.ticks[i]) * self.us[i] / (1000.0 * self.tpq)


def note_spans(track: Iterable[TrackEvent]) -> list[tuple[int, int, int, int]]:
    """Pair note-on/off events into ``(on_tick, off_tick, pitch, velocity)``.

    A note-on on an already sounding (channel, pitch) closes the earlier note.
    """
    spans = []
    sounding: dict[tuple[int, int], tuple[int, int]] = {}
    tick = 0
    for ev in track:
        tick += ev.delta
        if ev.status >= 0xF0:
            continue
        key = (ev.status & 0x0F, ev.data[0])
        if _is_note_on(ev):
            if key in sounding:
                on, vel = sounding.pop(key)
                spans.append((on, tick, key[1], vel))
            sounding[key] = (tick, ev.data[1])
        elif _is_note_off(ev) and key in sounding:
            on, vel = sounding.pop(key)
            spans.append((on, tick, key[1], vel))
    return spans


def to_phrase(doc: MidiDocument, quadrant: Optional[Quadrant] = None) -> Phrase:
    """Merge the notes of all tracks into a millisecond-timed phrase.

    Zero-length notes are dropped; the earliest onset becomes time 0.
    """
    clock = TempoClock(doc.tempo_map, doc.ticks_per_quarter)
    spans = [s for track in doc.tracks for s in note_spans(track) if s[1] > s[0]]
    if not spans:
        raise EmptyDocument("document contains no notes")
    origin = clock.ms(min(s[0] for s in spans))
    notes = []
    for on, off, pitch, vel in spans:
        start = clock.ms(on)
        notes.append(NoteEvent(pitch, start - origin, clock.ms(off) - start, vel))
    return Phrase(tuple(notes), quadrant)


def read_phrase(path, quadrant: Optional[Quadrant] = None) -> Phrase:
    return to_phrase(parse_smf(Path(path).read_bytes()), quadrant)


def save_phrase(path, phrase: Phrase, ticks_per_quarter: int = 480, tempo_bpm: float = 120.0) -> None:
    Path(path).write_bytes(write_smf(phrase, ticks_per_quarter, tempo_bpm))
