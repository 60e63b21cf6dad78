"""Quadrant-tagged phrase corpora and prosody-based validation.

Each phrase is reduced to five prosody statistics (pitch range, velocity
mean and spread, contour slope and reversal rate) and compared with
per-quadrant reference statistics.  A phrase is kept when every statistic
lies within ``z_threshold`` reference standard deviations of the
reference mean.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Optional

import numpy as np

from .emotion import QUADRANTS, Quadrant
from .errors import (
    DegenerateReference,
    EmptyCorpus,
    EmptyPhrase,
    ManifestError,
    MissingReference,
    ProsodyGestureError,
)
from .midi import MAX_PHRASE_MS, MIN_PHRASE_MS, Phrase, read_phrase

DEFAULT_Z_THRESHOLD = 2.5

STAT_FIELDS = (
    "pitch_range_semitones",
    "mean_velocity",
    "velocity_std",
    "contour_slope",
    "contour_sign_changes_per_note",
)


@dataclass(frozen=True)
class ProsodyStats:
    pitch_range_semitones: int
    mean_velocity: float
    velocity_std: float
    contour_slope: float
    contour_sign_changes_per_note: float

    def as_tuple(self) -> tuple:
        return tuple(getattr(self, f) for f in STAT_FIELDS)

    def to_dict(self) -> dict:
        return {f: getattr(self, f) for f in STAT_FIELDS}


def direction_reversals(pitches) -> int:
    """Number of sign changes between successive non-zero pitch steps."""
    signs = [s for s in np.sign(np.diff(pitches)) if s != 0]
    return sum(1 for a, b in zip(signs, signs[1:]) if a != b)


def phrase_stats(p: Phrase) -> ProsodyStats:
    """Prosody statistics of a phrase.

    ``velocity_std`` is the population standard deviation.  The contour slope
    is the least-squares slope of pitch against onset time in semitones per
    second (0 when all onsets coincide).  The reversal rate divides the
    number of direction reversals by the number of successive intervals.
    """
    if not p.notes:
        raise EmptyPhrase("phrase has no notes")
    pitches = np.array([n.pitch for n in p.notes], dtype=float)
    vels = np.array([n.velocity for n in p.notes], dtype=float)
    onsets = np.array([n.onset_ms for n in p.notes]) / 1000.0

    slope = 0.0
    t = onsets - onsets.mean()
    sxx = float(t @ t)
    if len(pitches) > 1 and sxx > 0:
        slope = float(t @ (pitches - pitches.mean())) / sxx
    reversal_rate = 0.0
    if len(pitches) > 1:
        reversal_rate = direction_reversals(pitches) / (len(pitches) - 1)
    return ProsodyStats(
        pitch_range_semitones=int(pitches.max() - pitches.min()),
        mean_velocity=float(vels.mean()),
        velocity_std=float(vels.std()),
        contour_slope=slope,
        contour_sign_changes_per_note=reversal_rate,
    )


@dataclass(frozen=True)
class FieldReference:
    mean: float
    std: float


@dataclass(frozen=True)
class ReferenceStats:
    """Per-quadrant mean/std of every prosody statistic."""

    quadrants: Mapping[Quadrant, Mapping[str, FieldReference]]

    def __post_init__(self):
        for q, fields in self.quadrants.items():
            missing = [f for f in STAT_FIELDS if f not in fields]
            if missing:
                raise DegenerateReference(f"{q}: missing fields {missing}")
            for name, ref in fields.items():
                if not ref.std > 0:
                    raise DegenerateReference(f"{q}.{name}: standard deviation must be > 0")

    @classmethod
    def from_dict(cls, d: Mapping) -> "ReferenceStats":
        quadrants = {}
        for label, fields in d.items():
            if label.startswith("_"):
                continue
            quadrants[Quadrant.parse(label)] = {
                name: FieldReference(float(v["mean"]), float(v["std"])) for name, v in fields.items()
            }
        return cls(quadrants)

    @classmethod
    def load(cls, path) -> "ReferenceStats":
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))

    def to_dict(self) -> dict:
        return {
            q.value: {name: {"mean": r.mean, "std": r.std} for name, r in self.quadrants[q].items()}
            for q in QUADRANTS
            if q in self.quadrants
        }

    @classmethod
    def from_phrases(cls, groups: Mapping[Quadrant, Iterable[Phrase]], min_std: float = 1e-3) -> "ReferenceStats":
        """Reference built from the statistics of example phrases per quadrant."""
        quadrants = {}
        for q, phrases in groups.items():
            rows = np.array([phrase_stats(p).as_tuple() for p in phrases], dtype=float)
            quadrants[q] = {
                name: FieldReference(float(rows[:, i].mean()), max(float(rows[:, i].std()), min_std))
                for i, name in enumerate(STAT_FIELDS)
            }
        return cls(quadrants)


@dataclass(frozen=True)
class Validation:
    """Outcome of checking one phrase; ``reason`` is None when accepted."""

    accepted: bool
    z_scores: Mapping[str, float]
    violated: tuple[str, ...] = ()
    reason: Optional[str] = None
    detail: str = ""

    def to_dict(self) -> dict:
        return {
            "accepted": self.accepted,
            "reason": self.reason,
            "z_scores": dict(self.z_scores),
            "violated": list(self.violated),
            "detail": self.detail,
        }


# rejection reasons
Z_THRESHOLD = "z_threshold"
DURATION_OUT_OF_BOUNDS = "duration_out_of_bounds"
PARSE_ERROR = "parse_error"


def validate_phrase(
    s: ProsodyStats, ref: ReferenceStats, q: Quadrant, z_threshold: float = DEFAULT_Z_THRESHOLD
) -> Validation:
    """Max-norm z-score test of ``s`` against the reference for quadrant ``q``."""
    if z_threshold <= 0:
        raise ValueError("z_threshold must be positive")
    try:
        fields = ref.quadrants[Quadrant(q)]
    except KeyError:
        raise MissingReference(f"no reference statistics for {q}") from None
    z = {name: abs(getattr(s, name) - fields[name].mean) / fields[name].std for name in STAT_FIELDS}
    violated = tuple(name for name in STAT_FIELDS if z[name] > z_threshold)
    if violated:
        return Validation(False, z, violated, Z_THRESHOLD)
    return Validation(True, z)


# -- manifests -----------------------------------------------------------------

@dataclass(frozen=True)
class ManifestEntry:
    path: Path
    quadrant: Quadrant
    contributor: str
    source: str = ""

    def __post_init__(self):
        if not self.source:
            object.__setattr__(self, "source", str(self.path))


@dataclass(frozen=True)
class CorpusManifest:
    entries: tuple[ManifestEntry, ...]
    reference_stats_path: Optional[Path] = None

    @classmethod
    def load(cls, path) -> "CorpusManifest":
        """Read a JSON manifest or a CSV/TSV with ``path,quadrant,contributor`` columns.

        Relative paths are resolved against the manifest's directory.  JSON
        manifests may name the reference file under ``reference_stats``.
        """
        path = Path(path)
        base = path.parent
        text = path.read_text(encoding="utf-8")
        ref = None
        if path.suffix.lower() == ".json":
            doc = json.loads(text)
            rows = doc.get("entries", [])
            if doc.get("reference_stats"):
                ref = base / doc["reference_stats"]
        else:
            dialect = "excel-tab" if "\t" in text.splitlines()[0] else "excel"
            rows = list(csv.DictReader(text.splitlines(), dialect=dialect))
        entries = []
        for i, row in enumerate(rows):
            try:
                entries.append(
                    ManifestEntry(
                        base / row["path"], Quadrant.parse(row["quadrant"]), str(row["contributor"]), row["path"]
                    )
                )
            except (KeyError, ValueError) as exc:
                raise ManifestError(f"{path}: entry {i}: {exc}") from None
        return cls(tuple(entries), ref)


@dataclass(frozen=True)
class Rejection:
    source: str
    phrase: Optional[Phrase]
    report: Validation


@dataclass
class Corpus:
    accepted: dict[Quadrant, list[Phrase]] = field(default_factory=lambda: {q: [] for q in QUADRANTS})
    rejected: list[Rejection] = field(default_factory=list)
    counts: dict[str, dict[Quadrant, int]] = field(default_factory=dict)
    accepted_sources: dict[Quadrant, list[str]] = field(default_factory=lambda: {q: [] for q in QUADRANTS})

    @property
    def n_accepted(self) -> int:
        return sum(len(v) for v in self.accepted.values())

    def report(self) -> dict:
        """JSON-ready validation report."""
        return {
            "accepted": [
                {"source": src, "quadrant": q.value}
                for q in QUADRANTS
                for src in self.accepted_sources[q]
            ],
            "rejected": [{"source": r.source, **r.report.to_dict()} for r in self.rejected],
            "counts": {c: {q.value: n for q, n in per_q.items()} for c, per_q in sorted(self.counts.items())},
            "n_accepted": self.n_accepted,
            "n_rejected": len(self.rejected),
        }


def check_phrase(
    phrase: Phrase, ref: ReferenceStats, q: Quadrant, z_threshold: float = DEFAULT_Z_THRESHOLD
) -> Validation:
    """Duration bounds first, then the prosody z-test."""
    stats = phrase_stats(phrase)
    if not MIN_PHRASE_MS <= phrase.total_duration_ms <= MAX_PHRASE_MS:
        z = validate_phrase(stats, ref, q, z_threshold).z_scores
        return Validation(
            False, z, (), DURATION_OUT_OF_BOUNDS,
            f"duration {phrase.total_duration_ms:.3f} ms outside [{MIN_PHRASE_MS:g}, {MAX_PHRASE_MS:g}]",
        )
    return validate_phrase(stats, ref, q, z_threshold)


def build_corpus(
    items: Iterable[tuple[str, "Phrase | Exception", Quadrant, str]],
    ref: ReferenceStats,
    z_threshold: float = DEFAULT_Z_THRESHOLD,
) -> Corpus:
    """Validate ``(source, phrase, quadrant, contributor)`` items in order.

    An exception in place of the phrase records an entry that failed to
    parse; it is rejected with reason ``parse_error``.
    """
    corpus = Corpus()
    for source, phrase, q, contributor in items:
        per_q = corpus.counts.setdefault(contributor, {x: 0 for x in QUADRANTS})
        if isinstance(phrase, Exception):
            detail = f"{type(phrase).__name__}: {phrase}"
            corpus.rejected.append(Rejection(source, None, Validation(False, {}, (), PARSE_ERROR, detail)))
            continue
        verdict = check_phrase(phrase, ref, q, z_threshold)
        if verdict.accepted:
            corpus.accepted[q].append(phrase.with_quadrant(q))
            corpus.accepted_sources[q].append(source)
            per_q[q] += 1
        else:
            corpus.rejected.append(Rejection(source, phrase, verdict))
    if corpus.n_accepted == 0:
        raise EmptyCorpus("no phrase passed validation")
    return corpus


def load_corpus(
    manifest: CorpusManifest,
    z_threshold: float = DEFAULT_Z_THRESHOLD,
    ref: Optional[ReferenceStats] = None,
) -> Corpus:
    """Parse, duration-filter and validate every manifest entry.

    Parse failures become rejections rather than aborting the batch.
    """
    if ref is None:
        if manifest.reference_stats_path is None:
            raise ManifestError("manifest names no reference statistics")
        ref = ReferenceStats.load(manifest.reference_stats_path)

    def items():
        for e in manifest.entries:
            try:
                phrase = read_phrase(e.path, e.quadrant)
            except (ProsodyGestureError, OSError) as exc:
                phrase = exc
            yield e.source, phrase, e.quadrant, e.contributor

    return build_corpus(items(), ref, z_threshold)
