import json
import random
import wave

import numpy as np
import pytest

from prosody_gesture.errors import EmptyBank
from prosody_gesture.midi import make_phrase
from prosody_gesture.voice import (
    CLIP_HEADROOM,
    MAX_SAMPLES,
    N_TIMBRES,
    RenderPlan,
    SampleBank,
    SampleEvent,
    SampleRecord,
    build_render_plan,
    default_bank,
    midi_to_hz,
    mix_events,
    oscillator,
    preview_synth,
    write_wav,
)


def random_bank(rng, n=None):
    ids = rng.sample(range(MAX_SAMPLES), n or rng.randint(1, MAX_SAMPLES))
    return SampleBank(tuple(SampleRecord(i, rng.randint(36, 84), rng.uniform(50, 900)) for i in ids))


def random_phrase(rng, n):
    onset, notes = 0.0, []
    for _ in range(n):
        d = rng.uniform(20, 1500)
        notes.append((rng.randint(0, 127), onset, d, rng.randint(1, 127)))
        onset += d + rng.uniform(0, 300)
    return make_phrase(notes)


def dominant_hz(x, sr):
    spec = np.abs(np.fft.rfft(x * np.hanning(len(x))))
    return np.fft.rfftfreq(len(x), 1 / sr)[np.argmax(spec)]


class TestRenderPlan:
    def test_shift_and_stretch_reconstruct_note(self):
        rng = random.Random(7)
        checked = 0
        while checked < 1000:
            bank = random_bank(rng)
            p = random_phrase(rng, 50)
            plan = build_render_plan(p, bank, rng.getrandbits(64))
            for n, e in zip(p.notes, plan.events):
                assert e.base_pitch + e.shift_semitones == n.pitch
                assert abs(e.base_duration_ms * e.stretch_ratio - n.duration_ms) <= 1e-9
                assert e.start_ms == n.onset_ms
                assert bank.get(e.sample_id).base_pitch == e.base_pitch
                checked += 1

    def test_deterministic(self):
        p = random_phrase(random.Random(1), 20)
        assert build_render_plan(p, default_bank(), 5) == build_render_plan(p, default_bank(), 5)

    def test_seeds_change_selection(self):
        p = random_phrase(random.Random(2), 20)
        ids = {tuple(e.sample_id for e in build_render_plan(p, default_bank(), s).events) for s in range(5)}
        assert len(ids) == 5

    def test_empty_bank(self):
        with pytest.raises(EmptyBank):
            build_render_plan(random_phrase(random.Random(3), 3), SampleBank(()), 0)

    def test_gain_from_velocity(self):
        plan = build_render_plan(make_phrase([(60, 0, 100, 127), (62, 100, 100, 1)]), default_bank(), 0)
        assert [e.gain for e in plan.events] == [1.0, 1 / 127]

    def test_dict_round_trip(self):
        plan = build_render_plan(random_phrase(random.Random(4), 8), default_bank(), 11)
        assert RenderPlan.from_dict(plan.to_dict()) == plan


class TestBank:
    def test_default_bank_full(self):
        bank = default_bank()
        assert len(bank) == MAX_SAMPLES == 112
        assert {s.timbre for s in bank.samples} == set(range(N_TIMBRES))

    def test_slot_bounds(self):
        with pytest.raises(ValueError):
            SampleRecord(MAX_SAMPLES, 60, 100)
        with pytest.raises(ValueError):
            SampleRecord(0, 60, 0)

    def test_duplicates(self):
        with pytest.raises(ValueError):
            SampleBank((SampleRecord(1, 60, 100), SampleRecord(1, 62, 100)))

    def test_round_trip(self, tmp_path):
        bank = random_bank(random.Random(9), 30)
        path = tmp_path / "bank.json"
        path.write_text(json.dumps(bank.to_dict()))
        assert SampleBank.load(path) == bank


class TestPreview:
    def test_midi_to_hz(self):
        assert midi_to_hz(69) == 440.0 and midi_to_hz(81) == 880.0

    @pytest.mark.parametrize("timbre", range(N_TIMBRES))
    @pytest.mark.parametrize("sr", [22050, 44100, 48000])
    def test_a4_peak(self, timbre, sr):
        ev = SampleEvent(timbre, 0.0, 1000.0, 1.0, 0, 0.8, 69, 1000.0)
        x = preview_synth(RenderPlan((ev,), 1000.0), sr)
        assert len(x) == sr
        assert abs(dominant_hz(x, sr) - 440.0) <= 1.0

    @pytest.mark.parametrize("timbre", range(N_TIMBRES))
    def test_oscillator_unit_peak(self, timbre):
        x = oscillator(timbre, 220.0, 44100, 44100)
        assert np.max(np.abs(x)) == pytest.approx(1.0, abs=1e-3)

    def test_band_limited(self):
        x = oscillator(3, 3000.0, 22050, 22050)
        spec = np.abs(np.fft.rfft(x))
        assert spec[11025 - 50:].max() < 1e-6 * spec.max()

    def test_no_normalization_without_clipping(self):
        ev = SampleEvent(0, 0.0, 500.0, 1.0, 0, 0.5, 69, 500.0)
        plan = RenderPlan((ev,), 500.0)
        assert np.array_equal(preview_synth(plan), mix_events(plan))

    def test_clipping_normalized(self):
        evs = tuple(SampleEvent(0, 0.0, 500.0, 1.0, 0, 1.0, 69, 500.0) for _ in range(3))
        x = preview_synth(RenderPlan(evs, 500.0))
        assert np.max(np.abs(x)) == pytest.approx(CLIP_HEADROOM)

    def test_bad_rate(self):
        with pytest.raises(ValueError):
            preview_synth(RenderPlan((), 100.0), 8000)

    def test_wav(self, tmp_path):
        plan = build_render_plan(random_phrase(random.Random(5), 4), default_bank(), 2)
        x = preview_synth(plan, 22050)
        write_wav(tmp_path / "a.wav", x, 22050)
        with wave.open(str(tmp_path / "a.wav")) as w:
            assert (w.getnchannels(), w.getsampwidth(), w.getframerate(), w.getnframes()) == (1, 2, 22050, len(x))
            pcm = np.frombuffer(w.readframes(len(x)), "<i2")
        assert np.max(np.abs(pcm / 32767.0 - x)) <= 1 / 32767
