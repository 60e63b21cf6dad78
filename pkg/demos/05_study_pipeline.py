"""The full study design on synthetic data.

Forty stimuli are built from the mini-corpus models, a simulated panel of
participants labels them, and the analysis reports confusion matrices,
F1 scores, the generated-versus-stochastic gesture comparison and trust.
The responses are invented here; only the pipeline is real.
"""

import random
from importlib import resources

from prosody_gesture.corpus import CorpusManifest, load_corpus
from prosody_gesture.emotion import QUADRANTS
from prosody_gesture.gesture import default_robot
from prosody_gesture.phrase_gen import train
from prosody_gesture.study import Group, TrialRecord, TrustSurvey, analyze, build_stimuli

root = resources.files("prosody_gesture") / "data" / "mini_corpus"
corpus = load_corpus(CorpusManifest.load(root / "manifest.json"))
models = {q: train(corpus, q) for q in QUADRANTS}
stimuli = build_stimuli(models, default_robot(), master_seed=2019)
print(f"{len(stimuli)} stimuli, first in participant 0's order: {stimuli.presentation_order(0)[:3]}")

rng = random.Random(0)
hit_rate = {"AO": 0.55, "SGA": 0.5, "SGN": 0.3, "EGA": 0.65, "EGN": 0.45}
trials = []
for p in range(24):
    for sid in stimuli.presentation_order(p):
        s = stimuli.by_id(sid)
        guess = s.quadrant if rng.random() < hit_rate[s.condition.code] else rng.choice(QUADRANTS)
        trials.append(TrialRecord(f"p{p}", sid, s.quadrant, guess))
surveys = [TrustSurvey(f"p{p}", Group.SHIMI_VOICE if p < 12 else Group.TTS,
                       tuple(min(100.0, max(0.0, rng.gauss(62 if p < 12 else 56, 15))) for _ in range(40)))
           for p in range(24)]

r = analyze(trials, surveys, stimuli.condition_of())
print(f"overall macro F1 {r['overall']['f1_macro']:.3f}")
for cond, v in r["conditions"].items():
    print(f"  {cond:<30} F1 {v['f1_macro']:.3f}")
g = r["gesture_comparison"]
print(f"generated {g['generated_mean_accuracy']:.3f} vs stochastic {g['stochastic_mean_accuracy']:.3f}, p = {g['p']:.3f}")
t = r["trust"]
print(f"trust: {t['group_means']}, p = {t['t_test']['p']:.3f}")
