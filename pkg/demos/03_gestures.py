"""How emotion reshapes the same phrase's gestures.

One phrase is turned into gesture plans at the four quadrant centroids.
Amplitude follows arousal, the foot tap subdivides with arousal, and
negative valence swaps smooth segments for abrupt linear ones.
"""

import numpy as np

from prosody_gesture.emotion import QUADRANTS, centroid
from prosody_gesture.features import extract_features
from prosody_gesture.gesture import default_robot, generate_gesture, stochastic_gesture
from prosody_gesture.synthetic import synthetic_phrase

robot = default_robot()
phrase = synthetic_phrase(QUADRANTS[0], 3)
f = extract_features(phrase)
print(f"phrase: {len(phrase.notes)} notes, {phrase.total_duration_ms:.0f} ms, {f.tempo_bpm:.0f} bpm\n")
print("quadrant  torso span  foot taps  interpolation")
for q in QUADRANTS:
    plan = generate_gesture(phrase, f, centroid(q), robot)
    torso, foot = plan.trajectory("torso"), plan.trajectory("foot")
    taps = int(np.sum(np.diff(foot.positions) > 0))
    print(f"{q.value:<9} {np.ptp(torso.positions):10.3f} {taps:10d}  {torso.interpolation[0]}")

# the head counter-rotates the torso so the gaze stays on target
plan = generate_gesture(phrase, f, centroid(QUADRANTS[0]), robot)
t = np.arange(0, plan.duration_ms, 1.0)
gaze = plan.trajectory("head_pan").evaluate(t) + plan.trajectory("torso").evaluate(t)
print(f"\nmax gaze drift: {np.abs(gaze).max():.2e} rad")

s = stochastic_gesture("SGA-happy-1", phrase.total_duration_ms, robot)
moves = np.diff(s.trajectory("torso").times)
print(f"stochastic baseline: {len(moves)} torso moves, longest {moves.max():.0f} ms")
