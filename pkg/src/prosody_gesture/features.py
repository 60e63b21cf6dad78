"""Musical features that drive gesture generation.

Five features are extracted from a phrase: tempo, pitch range, contour,
key and rhythmic density.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import EmptyPhrase
from .midi import Phrase

DEGENERATE_TEMPO_BPM = 90.0
TEMPO_MIN_BPM = 40.0
TEMPO_MAX_BPM = 200.0
IOI_BIN_MS = 20.0

# Krumhansl & Kessler (1982) probe-tone ratings, tonic first
KK_MAJOR = np.array([6.35, 2.23, 3.48, 2.33, 4.38, 4.09, 2.52, 5.19, 2.39, 3.66, 2.29, 2.88])
KK_MINOR = np.array([6.33, 2.68, 3.52, 5.38, 2.60, 3.53, 2.54, 4.75, 3.98, 2.69, 3.34, 3.17])

PITCH_CLASS_NAMES = ("C", "C#", "D", "Eb", "E", "F", "F#", "G", "Ab", "A", "Bb", "B")


def _require_notes(p: Phrase) -> None:
    if not p.notes:
        raise EmptyPhrase("phrase has no notes")


def inter_onset_intervals(p: Phrase) -> np.ndarray:
    """Positive gaps between successive distinct onsets, in ms."""
    onsets = np.unique(np.round([n.onset_ms for n in p.notes], 6))
    return np.diff(onsets)


def modal_ioi_ms(p: Phrase) -> Optional[float]:
    """Mean IOI inside the most populated 20 ms histogram bin.

    Ties go to the shorter bin.  None when the phrase has fewer than two
    distinct onsets.
    """
    iois = inter_onset_intervals(p)
    if iois.size == 0:
        return None
    bins = np.floor(np.round(iois, 6) / IOI_BIN_MS).astype(int)
    counts = np.bincount(bins)
    mode = int(np.argmax(counts))
    return float(iois[bins == mode].mean())


def fold_bpm(bpm: float) -> float:
    """Halve or double into [40, 200] bpm."""
    while bpm > TEMPO_MAX_BPM:
        bpm /= 2.0
    while bpm < TEMPO_MIN_BPM:
        bpm *= 2.0
    return bpm


def estimate_tempo(p: Phrase) -> float:
    """Tempo from the modal inter-onset interval, folded into [40, 200] bpm.

    Phrases with fewer than two distinct onsets get 90 bpm; see
    :func:`tempo_is_degenerate`.
    """
    ioi = modal_ioi_ms(p)
    if ioi is None:
        return DEGENERATE_TEMPO_BPM
    return fold_bpm(60000.0 / ioi)


def tempo_is_degenerate(p: Phrase) -> bool:
    return modal_ioi_ms(p) is None


@dataclass(frozen=True)
class Contour:
    signs: tuple[str, ...]  # "+", "-" or "0" per successive note pair
    curve: tuple[float, ...]  # pitch normalized to [0, 1] at each note onset
    onsets_ms: tuple[float, ...]

    def value_at(self, t_ms: float) -> float:
        """Sample-and-hold reading of the normalized curve."""
        i = int(np.searchsorted(self.onsets_ms, t_ms, side="right")) - 1
        return self.curve[max(i, 0)]


def extract_contour(p: Phrase) -> Contour:
    _require_notes(p)
    pitches = np.array([n.pitch for n in p.notes], dtype=float)
    signs = tuple({1.0: "+", -1.0: "-", 0.0: "0"}[s] for s in np.sign(np.diff(pitches)))
    span = pitches.max() - pitches.min()
    if span == 0:
        curve = tuple(0.5 for _ in pitches)
    else:
        curve = tuple(float(x) for x in (pitches - pitches.min()) / span)
    return Contour(signs, curve, tuple(n.onset_ms for n in p.notes))


@dataclass(frozen=True)
class Key:
    tonic: int
    mode: str  # "major" | "minor"
    confidence: float

    @property
    def name(self) -> str:
        return f"{PITCH_CLASS_NAMES[self.tonic]} {self.mode}"


def pitch_class_histogram(p: Phrase) -> np.ndarray:
    """Total sounding duration per pitch class."""
    hist = np.zeros(12)
    for n in p.notes:
        hist[n.pitch % 12] += n.duration_ms
    return hist


def _pearson(x: np.ndarray, y: np.ndarray) -> float:
    xc = x - x.mean()
    yc = y - y.mean()
    denom = np.sqrt((xc @ xc) * (yc @ yc))
    return float(xc @ yc / denom) if denom > 0 else 0.0


def key_correlations(hist: np.ndarray) -> list[tuple[int, str, float]]:
    """Correlation of ``hist`` with all 24 key profiles.

    Each candidate tonic is handled by rotating the histogram so the
    tonic sits at index 0, which keeps results bit-identical under
    transposition.
    """
    out = []
    for tonic in range(12):
        rotated = np.roll(hist, -tonic)
        out.append((tonic, "major", _pearson(rotated, KK_MAJOR)))
        out.append((tonic, "minor", _pearson(rotated, KK_MINOR)))
    return out


def estimate_key(p: Phrase) -> Key:
    """Best-correlated major/minor key; ties favour the lower tonic, then major."""
    _require_notes(p)
    best = None
    for tonic, mode, r in key_correlations(pitch_class_histogram(p)):
        if best is None or r > best[2]:
            best = (tonic, mode, r)
    return Key(*best)


@dataclass(frozen=True)
class FeatureVector:
    tempo_bpm: float
    tempo_degenerate: bool
    pitch_range_semitones: int
    contour: Contour
    key: Key
    rhythmic_density_notes_per_s: float

    @property
    def density_notes_per_beat(self) -> float:
        return self.rhythmic_density_notes_per_s * 60.0 / self.tempo_bpm

    def to_dict(self) -> dict:
        return {
            "tempo_bpm": self.tempo_bpm,
            "tempo_degenerate": self.tempo_degenerate,
            "pitch_range_semitones": self.pitch_range_semitones,
            "contour": {"signs": "".join(self.contour.signs), "curve": list(self.contour.curve)},
            "key": {"tonic": self.key.tonic, "mode": self.key.mode, "confidence": self.key.confidence,
                    "name": self.key.name},
            "rhythmic_density_notes_per_s": self.rhythmic_density_notes_per_s,
            "density_notes_per_beat": self.density_notes_per_beat,
        }


def extract_features(p: Phrase) -> FeatureVector:
    _require_notes(p)
    pitches = [n.pitch for n in p.notes]
    return FeatureVector(
        tempo_bpm=estimate_tempo(p),
        tempo_degenerate=tempo_is_degenerate(p),
        pitch_range_semitones=max(pitches) - min(pitches),
        contour=extract_contour(p),
        key=estimate_key(p),
        rhythmic_density_notes_per_s=len(p.notes) / (p.total_duration_ms / 1000.0),
    )
