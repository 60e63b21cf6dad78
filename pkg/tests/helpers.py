"""Fixture builders shared by the unit and acceptance tests."""

from __future__ import annotations

import math
import random

from prosody_gesture.midi import META, MidiDocument, TrackEvent, encode_vlq

TEXT_META = 0x01
TEMPO_META = 0x51
EOT = TrackEvent(0, META, bytes([0x2F]))


def tempo_event(delta: int, us: int) -> TrackEvent:
    return TrackEvent(delta, META, bytes([TEMPO_META]) + us.to_bytes(3, "big"))


def random_track(rng: random.Random, n_notes: int, with_tempo: bool) -> tuple[TrackEvent, ...]:
    """Well-formed track: paired notes on random channels plus assorted other events."""
    timed = []  # (tick, order, event-without-delta)
    for _ in range(n_notes):
        on = rng.randrange(0, 4000)
        off = on + rng.randrange(1, 1500)
        ch = rng.randrange(16)
        pitch = rng.randrange(128)
        timed.append((on, 1, 0x90 | ch, bytes([pitch, rng.randrange(1, 128)])))
        if rng.random() < 0.5:
            timed.append((off, 0, 0x80 | ch, bytes([pitch, rng.randrange(128)])))
        else:
            timed.append((off, 0, 0x90 | ch, bytes([pitch, 0])))
    for _ in range(rng.randrange(4)):
        timed.append((rng.randrange(4000), 2, 0xB0 | rng.randrange(16), bytes([rng.randrange(120), rng.randrange(128)])))
    for _ in range(rng.randrange(3)):
        timed.append((rng.randrange(4000), 2, 0xC0 | rng.randrange(16), bytes([rng.randrange(128)])))
    if rng.random() < 0.3:
        timed.append((rng.randrange(4000), 2, 0xF0, bytes([0x7E, 0x7F, 0x09, 0x01, 0xF7])))
    if rng.random() < 0.5:
        timed.append((rng.randrange(4000), 2, META, bytes([TEXT_META]) + b"take %d" % rng.randrange(100)))
    if with_tempo:
        for _ in range(rng.randrange(1, 4)):
            timed.append((rng.randrange(4000), 2, META, bytes([TEMPO_META]) + rng.randrange(250_000, 1_500_000).to_bytes(3, "big")))
    # offs before ons at equal ticks so same-pitch re-strikes stay paired
    timed.sort(key=lambda e: (e[0], e[1]))
    events, tick = [], 0
    for t, _, status, data in _drop_overlaps(timed):
        events.append(TrackEvent(t - tick, status, data))
        tick = t
    events.append(EOT)
    return tuple(events)


def _drop_overlaps(timed):
    """Remove notes that would overlap an identical sounding (channel, pitch)."""
    sounding, keep, skip_off = set(), [], {}
    for e in timed:
        t, _, status, data = e
        kind = status & 0xF0 if status < 0xF0 else None
        key = (status & 0x0F, data[0]) if kind in (0x80, 0x90) else None
        is_on = kind == 0x90 and data[1] > 0
        is_off = kind == 0x80 or (kind == 0x90 and data[1] == 0)
        if is_on:
            if key in sounding:
                skip_off[key] = skip_off.get(key, 0) + 1
                continue
            sounding.add(key)
        elif is_off:
            if skip_off.get(key):
                skip_off[key] -= 1
                continue
            sounding.discard(key)
        keep.append(e)
    return keep


def random_document(rng: random.Random) -> MidiDocument:
    fmt = rng.choice((0, 1))
    n_tracks = 1 if fmt == 0 else rng.randrange(1, 4)
    tpq = rng.choice((96, 120, 192, 384, 480, 960))
    tracks = tuple(random_track(rng, rng.randrange(1, 12), with_tempo=(i == 0 and rng.random() < 0.7))
                   for i in range(n_tracks))
    return MidiDocument(fmt, tpq, tracks)


def encode_running_status(doc: MidiDocument) -> bytes:
    """Serialize with running status: repeated channel status bytes are omitted.

    Running status is cancelled by meta and sysex events, as the reference
    readers expect.
    """
    out = bytearray(b"MThd" + (6).to_bytes(4, "big") + doc.format.to_bytes(2, "big")
                    + len(doc.tracks).to_bytes(2, "big") + doc.ticks_per_quarter.to_bytes(2, "big"))
    for track in doc.tracks:
        body = bytearray()
        running = None
        for ev in track:
            body += encode_vlq(ev.delta)
            if ev.status == META:
                body += bytes([META, ev.data[0]]) + encode_vlq(len(ev.data) - 1) + ev.data[1:]
                running = None
            elif ev.status in (0xF0, 0xF7):
                body += bytes([ev.status]) + encode_vlq(len(ev.data)) + ev.data
                running = None
            else:
                if ev.status != running:
                    body.append(ev.status)
                    running = ev.status
                body += ev.data
        out += b"MTrk" + len(body).to_bytes(4, "big") + body
    return bytes(out)


def per_tick_ms(tempo_map, tpq: int, start: int, end: int) -> float:
    """Brute-force duration of ticks [start, end): add each tick's length one by one."""
    parts = []
    idx = 0
    for tick in range(start, end):
        while idx + 1 < len(tempo_map) and tempo_map[idx + 1][0] <= tick:
            idx += 1
        parts.append(tempo_map[idx][1] / (1000.0 * tpq))
    return math.fsum(parts)


def mini_manifest():
    from importlib import resources
    return str(resources.files("prosody_gesture") / "data" / "mini_corpus" / "manifest.json")


def tree_hashes(root):
    """sha256 of every file under ``root`` keyed by relative path."""
    import hashlib
    from pathlib import Path
    root = Path(root)
    return {str(p.relative_to(root)): hashlib.sha256(p.read_bytes()).hexdigest()
            for p in sorted(root.rglob("*")) if p.is_file()}


def run_pipeline(out):
    """validate -> train -> generate -> features -> gesture -> render -> simulate --strict -> stimuli.

    Returns the exit codes in order.
    """
    from pathlib import Path
    from prosody_gesture.cli import main
    out = Path(out)
    manifest = mini_manifest()
    steps = [
        ["validate", "--manifest", manifest, "--out", str(out / "validate")],
        ["train", "--manifest", manifest, "--out", str(out / "models")],
        ["generate", "--model", str(out / "models" / "happy.model"), "--seed", "7", "--duration", "3000",
         "--out", str(out / "gen")],
        ["features", "--phrase", str(out / "gen" / "happy_seed7.mid"), "--out", str(out / "features")],
        ["gesture", "--phrase", str(out / "gen" / "happy_seed7.mid"), "--quadrant", "happy", "--csv",
         "--out", str(out / "gesture")],
        ["render", "--phrase", str(out / "gen" / "happy_seed7.mid"), "--seed", "3", "--wav",
         "--sample-rate", "22050", "--out", str(out / "render")],
        ["simulate", "--gesture", str(out / "gesture" / "happy_seed7.gesture.json"),
         "--render", str(out / "render" / "happy_seed7.render.json"), "--strict", "--out", str(out / "sim")],
        ["stimuli", "--models", str(out / "models"), "--seed", "11", "--out", str(out / "stimuli")],
    ]
    return [main(argv) for argv in steps]


def note_messages(track):
    """(absolute tick, kind, channel, note, velocity) of every note message."""
    tick, out = 0, []
    for e in track:
        tick += e.delta
        if e.status < 0xF0 and e.status & 0xF0 in (0x80, 0x90):
            kind = "note_on" if e.status & 0xF0 == 0x90 else "note_off"
            out.append((tick, kind, e.status & 0x0F, e.data[0], e.data[1]))
    return out


def note_messages_mido(track):
    tick, out = 0, []
    for m in track:
        tick += m.time
        if m.type in ("note_on", "note_off"):
            out.append((tick, m.type, m.channel, m.note, m.velocity))
    return out
