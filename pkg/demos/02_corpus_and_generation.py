"""Validate the bundled mini-corpus and sample new phrases from it.

Each entry is checked against per-quadrant reference statistics; the
rejects show why.  A Markov model per quadrant then samples phrases whose
statistics should sit near the corpus they came from.
"""

from importlib import resources

import numpy as np

from prosody_gesture.corpus import CorpusManifest, load_corpus, phrase_stats
from prosody_gesture.emotion import QUADRANTS
from prosody_gesture.phrase_gen import sample, train

root = resources.files("prosody_gesture") / "data" / "mini_corpus"
corpus = load_corpus(CorpusManifest.load(root / "manifest.json"))
print(f"accepted {corpus.n_accepted}, rejected {len(corpus.rejected)}")
for r in corpus.rejected:
    worst = max(r.report.z_scores.items(), key=lambda kv: kv[1], default=None)
    extra = f" worst |z| {worst[0]} = {worst[1]:.2f}" if worst else ""
    print(f"  {r.source:<28} {r.report.reason}{extra}")

print("\nquadrant  corpus vel  sampled vel  corpus range  sampled range")
for q in QUADRANTS:
    model = train(corpus, q)
    c = np.array([phrase_stats(p).as_tuple()[:2] for p in corpus.accepted[q]])
    s = np.array([phrase_stats(sample(model, seed, 3000)).as_tuple()[:2] for seed in range(200)])
    print(f"{q.value:<9} {c[:, 1].mean():10.1f} {s[:, 1].mean():12.1f} {c[:, 0].mean():13.1f} {s[:, 0].mean():14.1f}")
