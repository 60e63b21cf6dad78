"""Regenerate the bundled sample bank and mini-corpus.

Run from the repository root:

    python3 tools/build_data.py

Output is deterministic; re-running rewrites identical files.
"""

from __future__ import annotations

import json
from pathlib import Path

from prosody_gesture.corpus import ReferenceStats, check_phrase
from prosody_gesture.emotion import QUADRANTS, Quadrant
from prosody_gesture.midi import make_phrase, parse_smf, to_phrase, write_smf
from prosody_gesture.rng import SplitMix64, derive_seed
from prosody_gesture.synthetic import synthetic_phrase
from prosody_gesture.voice import N_PHONEMES, N_TIMBRES

DATA = Path(__file__).resolve().parents[1] / "src" / "prosody_gesture" / "data"
SEED = 20190701
PER_QUADRANT = 9
CONTRIBUTORS = ("ana", "ben", "chloe")


def dump(path: Path, obj) -> None:
    path.write_text(json.dumps(obj, indent=1, sort_keys=True) + "\n", encoding="utf-8")


def build_bank() -> dict:
    rng = SplitMix64(derive_seed(SEED, "bank"))
    samples = []
    for phoneme in range(N_PHONEMES):
        base_pitch = 55 + rng.randbelow(13)
        base_ms = round(rng.uniform(180.0, 420.0), 1)
        for timbre in range(N_TIMBRES):
            samples.append([phoneme * N_TIMBRES + timbre, base_pitch, base_ms])
    return {"metadata": "28 phonemes x 4 timbres; abstract slots, no audio", "samples": samples}


def roundtrip(p):
    return to_phrase(parse_smf(write_smf(p)), p.quadrant)


def build_corpus() -> None:
    root = DATA / "mini_corpus"
    (root / "phrases").mkdir(parents=True, exist_ok=True)
    for old in (root / "phrases").iterdir():
        old.unlink()

    reference_groups = {
        q: [roundtrip(synthetic_phrase(q, derive_seed(SEED, "reference", q.value, k))) for k in range(80)]
        for q in QUADRANTS
    }
    ref = ReferenceStats.from_phrases(reference_groups)
    ref_doc = ref.to_dict()
    ref_doc["_about"] = "per-quadrant mean/std of prosody statistics over 80 reference phrases each"
    dump(root / "reference_stats.json", ref_doc)

    entries = []
    for q in QUADRANTS:
        k = 0
        taken = 0
        while taken < PER_QUADRANT:
            p = roundtrip(synthetic_phrase(q, derive_seed(SEED, "corpus", q.value, k)))
            k += 1
            # keep the bundled set clean; rejects are added explicitly below
            if not check_phrase(p, ref, q).accepted:
                continue
            name = f"phrases/{q.value}_{taken + 1:02d}.mid"
            (root / name).write_bytes(write_smf(p))
            entries.append({"path": name, "quadrant": q.value, "contributor": CONTRIBUTORS[taken % 3]})
            taken += 1

    # a phrase longer than six seconds
    long = make_phrase([(60 + (i % 3), i * 800.0, 700.0, 50) for i in range(9)], Quadrant.SAD)
    (root / "phrases/reject_too_long.mid").write_bytes(write_smf(long))
    entries.append({"path": "phrases/reject_too_long.mid", "quadrant": "sad", "contributor": "ben"})
    # loud, fast, wide phrase filed under sad: prosody far from the reference
    loud = make_phrase([(50 + 5 * i, i * 120.0, 100.0, 127) for i in range(8)], Quadrant.SAD)
    (root / "phrases/reject_loud_sad.mid").write_bytes(write_smf(loud))
    entries.append({"path": "phrases/reject_loud_sad.mid", "quadrant": "sad", "contributor": "chloe"})
    # header chunk cut short
    (root / "phrases/reject_truncated.mid").write_bytes(b"MThd\x00\x00\x00\x06\x00")
    entries.append({"path": "phrases/reject_truncated.mid", "quadrant": "happy", "contributor": "ana"})

    dump(root / "manifest.json", {"reference_stats": "reference_stats.json", "entries": entries})


def main() -> None:
    dump(DATA / "default_bank.json", build_bank())
    build_corpus()
    print(f"wrote {DATA}")


if __name__ == "__main__":
    main()
