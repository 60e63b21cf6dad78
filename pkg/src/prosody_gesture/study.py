"""Stimulus construction and analysis statistics for the emotion/trust study.

The stimulus design has five conditions (audio only, stochastic or
generated gestures, each with and without audio), each holding eight
stimuli: two per emotion quadrant.
"""

from __future__ import annotations

import csv
import enum
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Optional, Sequence, Union

import numpy as np

from .emotion import QUADRANTS, Quadrant, centroid
from .errors import EmptyTrials, InsufficientPhrases, InvalidSurvey
from .features import extract_features
from .gesture import GesturePlan, RobotModel, generate_gesture, stochastic_gesture
from .midi import Phrase
from .phrase_gen import PhraseGenerator
from .rng import SplitMix64, derive_seed
from .stats import TTestResult, t_test_two_sided
from .voice import RenderPlan, SampleBank, build_render_plan, default_bank

STIMULI_PER_QUADRANT = 2
N_TRUST_ITEMS = 40


class Condition(str, enum.Enum):
    AUDIO_ONLY = "audio_only"
    STOCHASTIC_GESTURE_AUDIO = "stochastic_gesture_audio"
    STOCHASTIC_GESTURE_NO_AUDIO = "stochastic_gesture_no_audio"
    EXPERIMENTAL_GESTURE_AUDIO = "experimental_gesture_audio"
    EXPERIMENTAL_GESTURE_NO_AUDIO = "experimental_gesture_no_audio"

    @property
    def has_audio(self) -> bool:
        return self in (Condition.AUDIO_ONLY, Condition.STOCHASTIC_GESTURE_AUDIO,
                        Condition.EXPERIMENTAL_GESTURE_AUDIO)

    @property
    def gesture_source(self) -> Optional[str]:
        if self is Condition.AUDIO_ONLY:
            return None
        return "stochastic" if self.value.startswith("stochastic") else "generated"

    @property
    def code(self) -> str:
        return {
            Condition.AUDIO_ONLY: "AO",
            Condition.STOCHASTIC_GESTURE_AUDIO: "SGA",
            Condition.STOCHASTIC_GESTURE_NO_AUDIO: "SGN",
            Condition.EXPERIMENTAL_GESTURE_AUDIO: "EGA",
            Condition.EXPERIMENTAL_GESTURE_NO_AUDIO: "EGN",
        }[self]


CONDITIONS = tuple(Condition)


@dataclass(frozen=True)
class Stimulus:
    id: str
    condition: Condition
    quadrant: Quadrant
    phrase: Phrase
    gesture: Optional[GesturePlan]
    render: Optional[RenderPlan]


@dataclass(frozen=True)
class StimulusSet:
    stimuli: tuple[Stimulus, ...]
    master_seed: int

    def __len__(self) -> int:
        return len(self.stimuli)

    @property
    def ids(self) -> list[str]:
        return [s.id for s in self.stimuli]

    def by_id(self, stimulus_id: str) -> Stimulus:
        for s in self.stimuli:
            if s.id == stimulus_id:
                return s
        raise KeyError(stimulus_id)

    def condition_of(self) -> dict[str, Condition]:
        return {s.id: s.condition for s in self.stimuli}

    def presentation_order(self, participant_seed: int) -> list[str]:
        """Per-participant random order of all stimulus ids."""
        ids = self.ids
        SplitMix64(derive_seed(self.master_seed, "order", participant_seed)).shuffle(ids)
        return ids


PhraseSource = Union[Mapping[Quadrant, Sequence[Phrase]], Mapping[Quadrant, PhraseGenerator]]


def _pick_phrases(source: PhraseSource, q: Quadrant, master_seed: int, target_ms: float) -> list[Phrase]:
    item = source.get(q)
    if item is None:
        raise InsufficientPhrases(f"no phrase source for {q}")
    if hasattr(item, "sample"):
        return [
            item.sample(derive_seed(master_seed, "phrase", q.value, k), target_ms)
            for k in range(STIMULI_PER_QUADRANT)
        ]
    phrases = list(item)
    if len(phrases) < STIMULI_PER_QUADRANT:
        raise InsufficientPhrases(f"{q}: need {STIMULI_PER_QUADRANT} phrases, have {len(phrases)}")
    idx = list(range(len(phrases)))
    SplitMix64(derive_seed(master_seed, "pick", q.value)).shuffle(idx)
    return [phrases[i].with_quadrant(q) for i in sorted(idx[:STIMULI_PER_QUADRANT])]


def build_stimuli(
    source: PhraseSource,
    robot: RobotModel,
    master_seed: int,
    bank: Optional[SampleBank] = None,
    target_duration_ms: float = 3000.0,
) -> StimulusSet:
    """Forty stimuli: 5 conditions x 4 quadrants x 2 phrases.

    ``source`` maps each quadrant either to a list of phrases (two are drawn
    with the master seed) or to a generator sampled with derived seeds.  The
    same two phrases per quadrant appear in every condition.
    """
    bank = bank or default_bank()
    chosen = {q: _pick_phrases(source, q, master_seed, target_duration_ms) for q in QUADRANTS}
    stimuli = []
    for cond in CONDITIONS:
        for q in QUADRANTS:
            for k, phrase in enumerate(chosen[q], start=1):
                sid = f"{cond.code}-{q.value}-{k}"
                gesture = None
                if cond.gesture_source == "stochastic":
                    gesture = stochastic_gesture(sid, phrase.total_duration_ms, robot)
                elif cond.gesture_source == "generated":
                    gesture = generate_gesture(phrase, extract_features(phrase), centroid(q), robot)
                render = None
                if cond.has_audio:
                    render = build_render_plan(phrase, bank, derive_seed(master_seed, "render", q.value, k))
                stimuli.append(Stimulus(sid, cond, q, phrase, gesture, render))
    return StimulusSet(tuple(stimuli), master_seed)


# -- classification statistics -------------------------------------------------

@dataclass(frozen=True)
class TrialRecord:
    participant: str
    stimulus: str
    true: Quadrant
    predicted: Quadrant


def confusion_matrix(trials: Iterable[TrialRecord]) -> np.ndarray:
    """4x4 counts, rows = true quadrant, columns = prediction (happy, angry, sad, calm)."""
    index = {q: i for i, q in enumerate(QUADRANTS)}
    m = np.zeros((4, 4), dtype=int)
    n = 0
    for tr in trials:
        m[index[tr.true], index[tr.predicted]] += 1
        n += 1
    if n == 0:
        raise EmptyTrials("no trials")
    return m


def per_class_f1(m) -> np.ndarray:
    """F1 per class; NaN for classes that are neither true nor predicted."""
    m = np.asarray(m, dtype=float)
    tp = np.diag(m)
    support = m.sum(axis=1)
    predicted = m.sum(axis=0)
    f1 = np.full(len(tp), np.nan)
    for i in range(len(tp)):
        if support[i] == 0 and predicted[i] == 0:
            continue
        p = tp[i] / predicted[i] if predicted[i] else 0.0
        r = tp[i] / support[i] if support[i] else 0.0
        f1[i] = 2 * p * r / (p + r) if p + r > 0 else 0.0
    return f1


def f1_macro(m) -> float:
    """Unweighted mean F1 over classes with any support or predictions."""
    m = np.asarray(m)
    if (m < 0).any() or m.sum() <= 0:
        raise ValueError("confusion matrix must be non-negative with a positive total")
    scores = [x for x in per_class_f1(m) if not math.isnan(x)]
    return math.fsum(scores) / len(scores)


def f1_micro(m) -> float:
    """Micro-averaged F1, equal to accuracy for single-label predictions."""
    m = np.asarray(m)
    return float(np.trace(m) / m.sum())


# -- trust ---------------------------------------------------------------------

class Group(str, enum.Enum):
    SHIMI_VOICE = "shimi_voice"
    TTS = "tts"


@dataclass(frozen=True)
class TrustSurvey:
    participant: str
    group: Group
    items: tuple[float, ...]

    def __post_init__(self):
        if len(self.items) != N_TRUST_ITEMS:
            raise InvalidSurvey(f"{self.participant}: expected {N_TRUST_ITEMS} items, got {len(self.items)}")
        if not all(0.0 <= x <= 100.0 for x in self.items):
            raise InvalidSurvey(f"{self.participant}: item scores must lie in [0, 100]")


def trust_mean(s: TrustSurvey) -> float:
    return math.fsum(s.items) / N_TRUST_ITEMS


# -- CSV ingest ----------------------------------------------------------------

def read_trials(path) -> list[TrialRecord]:
    """CSV with columns participant, stimulus, true, predicted."""
    with open(path, newline="", encoding="utf-8") as fh:
        return [
            TrialRecord(row["participant"], row["stimulus"], Quadrant.parse(row["true"]),
                        Quadrant.parse(row["predicted"]))
            for row in csv.DictReader(fh)
        ]


def read_surveys(path) -> list[TrustSurvey]:
    """CSV with columns participant, group, q1..q40."""
    out = []
    with open(path, newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            try:
                items = tuple(float(row[f"q{i}"]) for i in range(1, N_TRUST_ITEMS + 1))
            except (KeyError, TypeError, ValueError) as exc:
                raise InvalidSurvey(f"{row.get('participant')}: {exc}") from None
            out.append(TrustSurvey(row["participant"], Group(row["group"].strip().lower()), items))
    return out


# -- combined analysis ---------------------------------------------------------

def participant_accuracy(trials: Iterable[TrialRecord]) -> dict[str, float]:
    hits: dict[str, list[int]] = {}
    for tr in trials:
        hits.setdefault(tr.participant, []).append(int(tr.true == tr.predicted))
    return {p: sum(h) / len(h) for p, h in sorted(hits.items())}


def _ttest_dict(res: TTestResult) -> dict:
    return {"t": res.t, "df": res.df, "p": res.p}


def analyze(
    trials: Sequence[TrialRecord] = (),
    surveys: Sequence[TrustSurvey] = (),
    conditions: Optional[Mapping[str, Condition]] = None,
    variant: str = "welch",
) -> dict:
    """Confusion matrices, F1 scores and trust comparisons as one JSON-ready report.

    With a stimulus-to-condition map, trials are also broken down per
    condition and generated-gesture accuracy is compared with stochastic-
    gesture accuracy (audio conditions, per participant).
    """
    report: dict = {"labels": [q.value for q in QUADRANTS], "variant": variant}
    if trials:
        m = confusion_matrix(trials)
        report["overall"] = {"confusion": m.tolist(), "f1_macro": f1_macro(m), "f1_micro": f1_micro(m),
                             "n_trials": len(trials)}
        if conditions:
            per_cond = {}
            grouped: dict[Condition, list[TrialRecord]] = {}
            for tr in trials:
                if tr.stimulus in conditions:
                    grouped.setdefault(conditions[tr.stimulus], []).append(tr)
            for cond in CONDITIONS:
                if cond in grouped:
                    cm = confusion_matrix(grouped[cond])
                    per_cond[cond.value] = {"confusion": cm.tolist(), "f1_macro": f1_macro(cm),
                                            "f1_micro": f1_micro(cm), "n_trials": len(grouped[cond])}
            report["conditions"] = per_cond
            gen = participant_accuracy(grouped.get(Condition.EXPERIMENTAL_GESTURE_AUDIO, []))
            sto = participant_accuracy(grouped.get(Condition.STOCHASTIC_GESTURE_AUDIO, []))
            if len(gen) >= 2 and len(sto) >= 2:
                report["gesture_comparison"] = {
                    "generated_mean_accuracy": float(np.mean(list(gen.values()))),
                    "stochastic_mean_accuracy": float(np.mean(list(sto.values()))),
                    **_ttest_dict(t_test_two_sided(list(gen.values()), list(sto.values()), variant)),
                }
    if surveys:
        means = {s.participant: trust_mean(s) for s in surveys}
        by_group = {g: [trust_mean(s) for s in surveys if s.group is g] for g in Group}
        trust = {
            "participant_means": dict(sorted(means.items())),
            "group_means": {g.value: (math.fsum(v) / len(v) if v else None) for g, v in by_group.items()},
        }
        if all(len(v) >= 2 for v in by_group.values()):
            trust["t_test"] = _ttest_dict(
                t_test_two_sided(by_group[Group.SHIMI_VOICE], by_group[Group.TTS], variant)
            )
        report["trust"] = trust
    return report


def write_confusion_csv(path, m, labels: Sequence[str] = tuple(q.value for q in QUADRANTS)) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["true\\predicted", *labels])
        for label, row in zip(labels, np.asarray(m).tolist()):
            w.writerow([label, *row])


def stimuli_manifest(s: StimulusSet) -> dict:
    return {
        "master_seed": s.master_seed,
        "stimuli": [
            {"id": x.id, "condition": x.condition.value, "quadrant": x.quadrant.value,
             "has_gesture": x.gesture is not None, "gesture_source": x.gesture.source if x.gesture else None,
             "has_audio": x.render is not None, "phrase_duration_ms": x.phrase.total_duration_ms}
            for x in s.stimuli
        ],
    }
