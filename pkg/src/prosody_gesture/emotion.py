"""Valence-arousal coordinates and the four emotion quadrants.

Quadrants follow the circumplex convention::

              arousal +
       ANGRY     |     HAPPY
    -------------+------------- valence
        SAD      |     CALM
              arousal -

Points on an axis belong to the non-negative side, so (0, 0) is happy.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass


class Quadrant(str, enum.Enum):
    HAPPY = "happy"
    ANGRY = "angry"
    SAD = "sad"
    CALM = "calm"

    def __str__(self) -> str:
        return self.value

    @classmethod
    def parse(cls, label: str) -> "Quadrant":
        try:
            return cls(label.strip().lower())
        except ValueError:
            raise ValueError(f"unknown quadrant label {label!r}") from None


QUADRANTS = (Quadrant.HAPPY, Quadrant.ANGRY, Quadrant.SAD, Quadrant.CALM)


def _clamp(x: float) -> float:
    return min(1.0, max(-1.0, float(x)))


@dataclass(frozen=True)
class EmotionPoint:
    """Continuous emotion; both coordinates are clamped to [-1, 1]."""

    valence: float
    arousal: float

    def __post_init__(self):
        object.__setattr__(self, "valence", _clamp(self.valence))
        object.__setattr__(self, "arousal", _clamp(self.arousal))

    @property
    def quadrant(self) -> Quadrant:
        return quadrant_of(self)

    def to_dict(self) -> dict:
        return {"valence": self.valence, "arousal": self.arousal}


NEUTRAL = EmotionPoint(0.0, 0.0)


def quadrant_of(p: EmotionPoint) -> Quadrant:
    if p.arousal >= 0:
        return Quadrant.HAPPY if p.valence >= 0 else Quadrant.ANGRY
    return Quadrant.CALM if p.valence >= 0 else Quadrant.SAD


_CENTROIDS = {
    Quadrant.HAPPY: (0.5, 0.5),
    Quadrant.ANGRY: (-0.5, 0.5),
    Quadrant.SAD: (-0.5, -0.5),
    Quadrant.CALM: (0.5, -0.5),
}


def centroid(q: Quadrant) -> EmotionPoint:
    """Mid-intensity representative point of a quadrant."""
    return EmotionPoint(*_CENTROIDS[Quadrant(q)])
