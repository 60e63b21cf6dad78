"""Sample-playback render plans and a simple oscillator preview.

A sample bank holds up to 28 phonemes x 4 timbres.  Every note of a phrase
is assigned one sample, which is pitch-shifted and time-stretched to the
note.  :func:`preview_synth` turns a plan into audio using one band-limited
oscillator family per timbre in place of the real recordings.
"""

from __future__ import annotations

import json
import math
import wave
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import EmptyBank
from .midi import Phrase
from .rng import SplitMix64

N_PHONEMES = 28
N_TIMBRES = 4
MAX_SAMPLES = N_PHONEMES * N_TIMBRES
SAMPLE_RATES = (22050, 44100, 48000)
FADE_MS = 10.0
CLIP_HEADROOM = 10 ** (-1 / 20)  # -1 dBFS
N_HARMONICS = 12


@dataclass(frozen=True)
class SampleRecord:
    sample_id: int
    base_pitch: int
    base_duration_ms: float

    def __post_init__(self):
        if not 0 <= self.sample_id < MAX_SAMPLES:
            raise ValueError(f"sample_id {self.sample_id} outside 0..{MAX_SAMPLES - 1}")
        if not self.base_duration_ms > 0:
            raise ValueError("base_duration_ms must be positive")

    @property
    def phoneme(self) -> int:
        return self.sample_id // N_TIMBRES

    @property
    def timbre(self) -> int:
        return self.sample_id % N_TIMBRES


@dataclass(frozen=True)
class SampleBank:
    samples: tuple[SampleRecord, ...]
    metadata: str = ""

    def __post_init__(self):
        ids = [s.sample_id for s in self.samples]
        if len(set(ids)) != len(ids):
            raise ValueError("duplicate sample ids")
        object.__setattr__(self, "samples", tuple(sorted(self.samples, key=lambda s: s.sample_id)))

    def __len__(self) -> int:
        return len(self.samples)

    def get(self, sample_id: int) -> SampleRecord:
        for s in self.samples:
            if s.sample_id == sample_id:
                return s
        raise KeyError(sample_id)

    def to_dict(self) -> dict:
        return {
            "metadata": self.metadata,
            "samples": [[s.sample_id, s.base_pitch, s.base_duration_ms] for s in self.samples],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SampleBank":
        return cls(tuple(SampleRecord(int(i), int(p), float(ms)) for i, p, ms in d["samples"]), d.get("metadata", ""))

    @classmethod
    def load(cls, path) -> "SampleBank":
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def default_bank() -> SampleBank:
    text = resources.files("prosody_gesture").joinpath("data/default_bank.json").read_text(encoding="utf-8")
    return SampleBank.from_dict(json.loads(text))


@dataclass(frozen=True)
class SampleEvent:
    sample_id: int
    start_ms: float
    duration_ms: float
    stretch_ratio: float
    shift_semitones: int
    gain: float
    base_pitch: int
    base_duration_ms: float

    @property
    def timbre(self) -> int:
        return self.sample_id % N_TIMBRES

    @property
    def pitch(self) -> int:
        return self.base_pitch + self.shift_semitones


@dataclass(frozen=True)
class RenderPlan:
    events: tuple[SampleEvent, ...]
    phrase_duration_ms: float

    def to_dict(self) -> dict:
        return {
            "phrase_duration_ms": self.phrase_duration_ms,
            "events": [
                {
                    "sample_id": e.sample_id,
                    "start_ms": e.start_ms,
                    "duration_ms": e.duration_ms,
                    "stretch_ratio": e.stretch_ratio,
                    "shift_semitones": e.shift_semitones,
                    "gain": e.gain,
                    "base_pitch": e.base_pitch,
                    "base_duration_ms": e.base_duration_ms,
                }
                for e in self.events
            ],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "RenderPlan":
        return cls(tuple(SampleEvent(**e) for e in d["events"]), float(d["phrase_duration_ms"]))

    @classmethod
    def load(cls, path) -> "RenderPlan":
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def build_render_plan(p: Phrase, bank: SampleBank, seed: int) -> RenderPlan:
    """Assign each note a uniformly drawn sample and the shift/stretch that fits it."""
    if len(bank) == 0:
        raise EmptyBank("sample bank is empty")
    rng = SplitMix64(seed)
    events = []
    for n in p.notes:
        s = bank.samples[rng.randbelow(len(bank))]
        events.append(
            SampleEvent(
                sample_id=s.sample_id,
                start_ms=n.onset_ms,
                duration_ms=n.duration_ms,
                stretch_ratio=n.duration_ms / s.base_duration_ms,
                shift_semitones=n.pitch - s.base_pitch,
                gain=n.velocity / 127.0,
                base_pitch=s.base_pitch,
                base_duration_ms=s.base_duration_ms,
            )
        )
    return RenderPlan(tuple(events), p.total_duration_ms)


# -- preview synthesis ---------------------------------------------------------

def midi_to_hz(pitch: float) -> float:
    return 440.0 * 2.0 ** ((pitch - 69.0) / 12.0)


def _harmonics(timbre: int) -> list[tuple[int, float]]:
    """(harmonic number, amplitude) for sine, triangle, square, sawtooth."""
    if timbre == 0:
        return [(1, 1.0)]
    if timbre == 1:
        return [(k, (-1) ** ((k - 1) // 2) / k**2) for k in range(1, 2 * N_HARMONICS, 2)]
    if timbre == 2:
        return [(k, 1.0 / k) for k in range(1, 2 * N_HARMONICS, 2)]
    return [(k, 1.0 / k) for k in range(1, N_HARMONICS + 1)]


def oscillator(timbre: int, freq: float, n: int, sample_rate: int) -> np.ndarray:
    """Band-limited waveform of unit peak, harmonics above Nyquist dropped."""
    phase = 2.0 * np.pi * freq * np.arange(n) / sample_rate
    wave_ = np.zeros(n)
    parts = [(k, a) for k, a in _harmonics(timbre) if k * freq < sample_rate / 2] or [(1, 1.0)]
    for k, a in parts:
        wave_ += a * np.sin(k * phase)
    # peak over one full period, independent of the event length
    period = np.linspace(0.0, 2.0 * np.pi, 4096, endpoint=False)
    peak = np.max(np.abs(sum(a * np.sin(k * period) for k, a in parts)))
    return wave_ / peak


def buffer_length(plan: RenderPlan, sample_rate: int) -> int:
    return int(math.ceil(plan.phrase_duration_ms / 1000.0 * sample_rate - 1e-9))


def mix_events(plan: RenderPlan, sample_rate: int = 44100) -> np.ndarray:
    """Sum of all rendered events before any peak normalization."""
    if sample_rate not in SAMPLE_RATES:
        raise ValueError(f"sample rate must be one of {SAMPLE_RATES}")
    out = np.zeros(buffer_length(plan, sample_rate))
    for ev in plan.events:
        start = int(round(ev.start_ms * sample_rate / 1000.0))
        n = min(int(round(ev.duration_ms * sample_rate / 1000.0)), len(out) - start)
        if n <= 0:
            continue
        tone = ev.gain * oscillator(ev.timbre, midi_to_hz(ev.pitch), n, sample_rate)
        fade = min(int(round(FADE_MS * sample_rate / 1000.0)), n // 2)
        if fade > 0:
            ramp = np.arange(fade) / fade
            tone[:fade] *= ramp
            tone[n - fade:] *= ramp[::-1]
        out[start:start + n] += tone
    return out


def preview_synth(plan: RenderPlan, sample_rate: int = 44100) -> np.ndarray:
    """Mono float buffer; scaled to -1 dBFS only when the mix would clip."""
    out = mix_events(plan, sample_rate)
    peak = np.max(np.abs(out)) if out.size else 0.0
    if peak > 1.0:
        out *= CLIP_HEADROOM / peak
    return out


def write_wav(path, samples: Sequence[float], sample_rate: int) -> None:
    """16-bit little-endian mono PCM."""
    pcm = np.clip(np.round(np.asarray(samples) * 32767.0), -32768, 32767).astype("<i2")
    with wave.open(str(path), "wb") as w:
        w.setnchannels(1)
        w.setsampwidth(2)
        w.setframerate(sample_rate)
        w.writeframes(pcm.tobytes())
