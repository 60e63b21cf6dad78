import csv
import json
import random
from collections import Counter

import numpy as np
import pytest

from prosody_gesture.emotion import QUADRANTS, Quadrant
from prosody_gesture.errors import EmptyTrials, InsufficientPhrases, InvalidSurvey
from prosody_gesture.gesture import default_robot
from prosody_gesture.study import (
    CONDITIONS,
    Condition,
    Group,
    TrialRecord,
    TrustSurvey,
    analyze,
    build_stimuli,
    confusion_matrix,
    f1_macro,
    f1_micro,
    per_class_f1,
    read_surveys,
    read_trials,
    stimuli_manifest,
    trust_mean,
    write_confusion_csv,
)
from prosody_gesture.synthetic import synthetic_phrase

ROBOT = default_robot()


@pytest.fixture(scope="module")
def source():
    return {q: [synthetic_phrase(q, s) for s in range(5)] for q in QUADRANTS}


@pytest.fixture(scope="module")
def stimuli(source):
    return build_stimuli(source, ROBOT, 1234)


def random_trials(rng, n=200):
    return [TrialRecord(f"p{rng.randrange(12)}", f"s{i}", rng.choice(QUADRANTS), rng.choice(QUADRANTS))
            for i in range(n)]


class TestStimuli:
    def test_structure(self, stimuli):
        assert len(stimuli) == 40
        per_cond = Counter(s.condition for s in stimuli.stimuli)
        assert per_cond == {c: 8 for c in CONDITIONS}
        per_cell = Counter((s.condition, s.quadrant) for s in stimuli.stimuli)
        assert set(per_cell.values()) == {2} and len(per_cell) == 20
        assert len(set(stimuli.ids)) == 40

    def test_condition_contents(self, stimuli):
        for s in stimuli.stimuli:
            assert (s.render is not None) == s.condition.has_audio
            assert (s.gesture.source if s.gesture else None) == s.condition.gesture_source
            if s.render:
                assert s.render.phrase_duration_ms == s.phrase.total_duration_ms
            if s.gesture:
                assert s.gesture.duration_ms == s.phrase.total_duration_ms

    def test_same_phrases_across_conditions(self, stimuli):
        for q in QUADRANTS:
            sets = {c: [s.phrase for s in stimuli.stimuli if s.condition is c and s.quadrant is q] for c in CONDITIONS}
            assert all(v == sets[Condition.AUDIO_ONLY] for v in sets.values())

    def test_deterministic(self, source, stimuli):
        again = build_stimuli(source, ROBOT, 1234)
        assert again == stimuli
        assert json.dumps(stimuli_manifest(again)) == json.dumps(stimuli_manifest(stimuli))

    def test_stochastic_seeded_by_id(self, stimuli):
        a = stimuli.by_id("SGA-happy-1").gesture
        b = stimuli.by_id("SGN-happy-1").gesture
        assert a != b

    @pytest.mark.parametrize("pseed", range(5))
    def test_presentation_order_is_permutation(self, stimuli, pseed):
        order = stimuli.presentation_order(pseed)
        assert sorted(order) == sorted(stimuli.ids) and order != stimuli.ids

    def test_generator_source(self):
        class Fake:
            def __init__(self, q):
                self.q = q

            def sample(self, seed, target):
                return synthetic_phrase(self.q, seed % 1000)

        s = build_stimuli({q: Fake(q) for q in QUADRANTS}, ROBOT, 7)
        assert len(s) == 40

    def test_insufficient(self, source):
        short = dict(source)
        short[Quadrant.SAD] = source[Quadrant.SAD][:1]
        with pytest.raises(InsufficientPhrases):
            build_stimuli(short, ROBOT, 1)
        del short[Quadrant.SAD]
        with pytest.raises(InsufficientPhrases):
            build_stimuli(short, ROBOT, 1)


class TestConfusion:
    def test_diagonal(self):
        trials = [TrialRecord("p", str(i), q, q) for i, q in enumerate(QUADRANTS * 3)]
        assert np.array_equal(confusion_matrix(trials), 3 * np.eye(4, dtype=int))

    def test_all_happy(self):
        m = confusion_matrix([TrialRecord("p", str(i), q, Quadrant.HAPPY) for i, q in enumerate(QUADRANTS)])
        assert m[:, 0].tolist() == [1, 1, 1, 1] and m[:, 1:].sum() == 0

    @pytest.mark.parametrize("seed", range(10))
    def test_brute_force_tally(self, seed):
        trials = random_trials(random.Random(seed))
        m = confusion_matrix(trials)
        for i, t in enumerate(QUADRANTS):
            for j, p in enumerate(QUADRANTS):
                assert m[i, j] == sum(1 for tr in trials if tr.true is t and tr.predicted is p)
        assert m.sum(axis=1).tolist() == [sum(tr.true is q for tr in trials) for q in QUADRANTS]

    def test_empty(self):
        with pytest.raises(EmptyTrials):
            confusion_matrix([])


def brute_f1(trials):
    scores = []
    for q in QUADRANTS:
        tp = sum(tr.true is q and tr.predicted is q for tr in trials)
        fp = sum(tr.true is not q and tr.predicted is q for tr in trials)
        fn = sum(tr.true is q and tr.predicted is not q for tr in trials)
        if tp + fp + fn == 0:
            continue
        scores.append(2 * tp / (2 * tp + fp + fn))
    return sum(scores) / len(scores)


class TestF1:
    def test_hand_fixture(self):
        # P = (5/7, 4/5), R = (5/6, 4/6) -> F1 = (10/13, 8/11)
        m = [[5, 1], [2, 4]]
        assert per_class_f1(m) == pytest.approx([10 / 13, 8 / 11])
        assert per_class_f1(m).round(3).tolist() == [0.769, 0.727]
        assert round(f1_macro(m), 3) == 0.748

    def test_perfect(self):
        assert f1_macro(np.eye(4) * 5) == 1.0

    def test_absent_class_excluded(self):
        m = np.diag([3, 3, 3, 0])
        assert f1_macro(m) == 1.0
        assert np.isnan(per_class_f1(m)[3])

    def test_zero_when_never_right(self):
        m = [[0, 2], [0, 2]]
        assert per_class_f1(m).tolist() == [0.0, pytest.approx(2 / 3)]

    @pytest.mark.parametrize("m", [[[0, 0], [0, 0]], [[1, -1], [0, 1]]])
    def test_invalid(self, m):
        with pytest.raises(ValueError):
            f1_macro(m)

    @pytest.mark.parametrize("seed", range(10))
    def test_brute_force(self, seed):
        trials = random_trials(random.Random(100 + seed))
        m = confusion_matrix(trials)
        assert f1_macro(m) == pytest.approx(brute_f1(trials), abs=1e-15)
        assert f1_micro(m) == sum(tr.true is tr.predicted for tr in trials) / len(trials)


class TestTrust:
    def test_constant(self):
        assert trust_mean(TrustSurvey("a", Group.TTS, (50.0,) * 40)) == 50.0

    def test_alternating(self):
        assert trust_mean(TrustSurvey("a", Group.TTS, tuple(100.0 * (i % 2) for i in range(40)))) == 50.0

    def test_hand_sum(self):
        items = tuple(float(i) * 2.5 for i in range(40))  # 2.5 * 780 = 1950
        assert trust_mean(TrustSurvey("a", Group.SHIMI_VOICE, items)) == 1950 / 40

    @pytest.mark.parametrize("items", [(50.0,) * 39, (50.0,) * 39 + (100.5,), (-1.0,) + (50.0,) * 39])
    def test_invalid(self, items):
        with pytest.raises(InvalidSurvey):
            TrustSurvey("a", Group.TTS, items)


def _write_csvs(tmp_path, trials, surveys):
    with open(tmp_path / "trials.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["participant", "stimulus", "true", "predicted"])
        for t in trials:
            w.writerow([t.participant, t.stimulus, t.true.value, t.predicted.value])
    with open(tmp_path / "surveys.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["participant", "group", *[f"q{i}" for i in range(1, 41)]])
        for s in surveys:
            w.writerow([s.participant, s.group.value, *s.items])


class TestAnalyze:
    def _data(self, stimuli):
        rng = random.Random(3)
        trials = []
        for p in range(6):
            for sid in stimuli.ids:
                s = stimuli.by_id(sid)
                guess = s.quadrant if rng.random() < 0.6 else rng.choice(QUADRANTS)
                trials.append(TrialRecord(f"p{p}", sid, s.quadrant, guess))
        surveys = [TrustSurvey(f"p{p}", Group.TTS if p % 2 else Group.SHIMI_VOICE,
                               tuple(float(rng.randint(0, 100)) for _ in range(40))) for p in range(6)]
        return trials, surveys

    def test_csv_round_trip(self, tmp_path, stimuli):
        trials, surveys = self._data(stimuli)
        _write_csvs(tmp_path, trials, surveys)
        assert read_trials(tmp_path / "trials.csv") == trials
        assert read_surveys(tmp_path / "surveys.csv") == surveys

    def test_report(self, stimuli):
        trials, surveys = self._data(stimuli)
        r = analyze(trials, surveys, stimuli.condition_of())
        assert r["overall"]["n_trials"] == 240
        assert set(r["conditions"]) == {c.value for c in CONDITIONS}
        assert all(v["n_trials"] == 48 for v in r["conditions"].values())
        assert 0 <= r["gesture_comparison"]["p"] <= 1
        assert set(r["trust"]["group_means"]) == {"shimi_voice", "tts"}
        assert r["trust"]["participant_means"]["p0"] == trust_mean(surveys[0])
        json.dumps(r)

    def test_trust_only(self):
        r = analyze(surveys=[TrustSurvey("x", Group.TTS, (10.0,) * 40)])
        assert "overall" not in r and "t_test" not in r["trust"]

    def test_confusion_csv(self, tmp_path):
        write_confusion_csv(tmp_path / "c.csv", np.eye(4, dtype=int))
        rows = list(csv.reader(open(tmp_path / "c.csv")))
        assert rows[0] == ["true\\predicted", "happy", "angry", "sad", "calm"]
        assert rows[1] == ["happy", "1", "0", "0", "0"]
