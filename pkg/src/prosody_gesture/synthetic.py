"""Synthetic phrases with quadrant-typical prosody.

Used to build the bundled mini-corpus, test fixtures and demos.  Each
quadrant gets its own characteristic tempo, loudness and contour drift:
happy phrases are quick, loud and rising; angry ones fast, loudest and
jagged; sad ones slow, soft and falling; calm ones slow, soft and level.
"""

from __future__ import annotations

from dataclasses import dataclass

from .emotion import Quadrant
from .midi import Phrase, make_phrase
from .rng import SplitMix64


@dataclass(frozen=True)
class ProsodyStyle:
    n_notes: tuple[int, int]
    ioi_ms: tuple[float, float]
    velocity: tuple[int, int]
    start_pitch: tuple[int, int]
    steps: tuple[int, ...]  # candidate pitch steps, drawn uniformly
    legato: float = 0.85


STYLES = {
    Quadrant.HAPPY: ProsodyStyle((8, 14), (150.0, 250.0), (90, 115), (62, 70), (-2, 1, 2, 3, 4)),
    Quadrant.ANGRY: ProsodyStyle((9, 15), (100.0, 180.0), (105, 127), (55, 62), (-3, -2, 2, 3, -1, 1)),
    Quadrant.SAD: ProsodyStyle((5, 8), (400.0, 700.0), (35, 60), (60, 67), (-2, -1, -1, 0, 1)),
    Quadrant.CALM: ProsodyStyle((5, 9), (350.0, 550.0), (50, 75), (58, 65), (-1, 0, 1, 2, -2)),
}


def synthetic_phrase(q: Quadrant, seed: int) -> Phrase:
    """One deterministic monophonic phrase in the style of quadrant ``q``."""
    style = STYLES[Quadrant.parse(q)]
    rng = SplitMix64(seed)
    n = style.n_notes[0] + rng.randbelow(style.n_notes[1] - style.n_notes[0] + 1)
    pitch = style.start_pitch[0] + rng.randbelow(style.start_pitch[1] - style.start_pitch[0] + 1)
    onset = 0.0
    notes = []
    for _ in range(n):
        ioi = round(rng.uniform(*style.ioi_ms), 1)
        vel = style.velocity[0] + rng.randbelow(style.velocity[1] - style.velocity[0] + 1)
        notes.append((max(0, min(127, pitch)), onset, round(ioi * style.legato, 1), vel))
        onset = round(onset + ioi, 1)
        pitch += rng.choice(style.steps)
    return make_phrase(notes, Quadrant.parse(q))
