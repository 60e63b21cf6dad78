"""Emotion-conditioned vocal phrases and gestures for a small musical robot."""

from .emotion import QUADRANTS, EmotionPoint, Quadrant, centroid, quadrant_of
from .midi import MidiDocument, NoteEvent, Phrase, make_phrase, parse_smf, to_phrase, write_smf

__version__ = "0.1.0"

__all__ = [
    "QUADRANTS",
    "EmotionPoint",
    "MidiDocument",
    "NoteEvent",
    "Phrase",
    "Quadrant",
    "centroid",
    "make_phrase",
    "parse_smf",
    "quadrant_of",
    "to_phrase",
    "write_smf",
]
