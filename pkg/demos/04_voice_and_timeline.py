"""Render a phrase with the sample bank and check the robot can follow it.

Every note gets a sample, pitch-shifted and time-stretched to fit.  The
gesture plan and render plan are merged on one clock and the simulator
samples each joint at 5 ms against its velocity and acceleration limits.
"""

from prosody_gesture.emotion import Quadrant, centroid
from prosody_gesture.features import extract_features
from prosody_gesture.gesture import default_robot, generate_gesture
from prosody_gesture.synthetic import synthetic_phrase
from prosody_gesture.timeline import merge, simulate
from prosody_gesture.voice import build_render_plan, default_bank, preview_synth

robot = default_robot()
phrase = synthetic_phrase(Quadrant.ANGRY, 11)
render = build_render_plan(phrase, default_bank(), seed=4)
for e in render.events[:4]:
    print(f"sample {e.sample_id:3d}: base {e.base_pitch} {e.shift_semitones:+d} st, "
          f"stretch x{e.stretch_ratio:.2f} -> {e.duration_ms:.0f} ms")
audio = preview_synth(render, 22050)
print(f"preview: {len(audio)} samples, peak {abs(audio).max():.2f}\n")

gesture = generate_gesture(phrase, extract_features(phrase), centroid(Quadrant.ANGRY), robot)
report = simulate(merge(gesture, render), robot, dt_ms=5.0)
print(report.summary())
