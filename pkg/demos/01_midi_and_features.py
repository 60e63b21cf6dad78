"""Read a phrase from MIDI and look at what the feature extractor sees.

A short C-major motif is written to a Standard MIDI File, read back, and
summarized: tempo from the modal inter-onset interval, pitch range, the
contour as a sign sequence and a normalized curve, and the key.
"""

from prosody_gesture.features import extract_features
from prosody_gesture.midi import make_phrase, parse_smf, to_phrase, write_smf

motif = make_phrase([(60, 0, 400, 100), (64, 500, 400, 90), (67, 1000, 400, 80),
                     (65, 1500, 400, 70), (72, 2000, 500, 60)])

data = write_smf(motif, ticks_per_quarter=480, tempo_bpm=120)
print(f"SMF: {len(data)} bytes")
back = to_phrase(parse_smf(data))
print("round trip exact:", [(n.pitch, n.onset_ms, n.duration_ms) for n in back.notes]
      == [(n.pitch, n.onset_ms, n.duration_ms) for n in motif.notes])

f = extract_features(back)
print(f"tempo      {f.tempo_bpm:.1f} bpm")
print(f"range      {f.pitch_range_semitones} semitones")
print(f"contour    {' '.join(f.contour.signs)}")
print(f"curve      {', '.join(f'{c:.2f}' for c in f.contour.curve)}")
print(f"key        {f.key.name} (r = {f.key.confidence:.3f})")

# transposing moves the tonic and leaves everything else alone
up = extract_features(back.transposed(5))
print(f"up a fourth: {up.key.name}, same contour: {up.contour.signs == f.contour.signs}")
