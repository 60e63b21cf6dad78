"""Quadrant-conditioned phrase generation.

Phrases are tokenized into (pitch, duration class, velocity class) symbols
and an order-k Markov chain is trained per quadrant.  Anything with a
``sample(seed, target_duration_ms) -> Phrase`` method satisfies
:class:`PhraseGenerator`, so a neural sequence model can replace the chain
without touching downstream stages.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import NamedTuple, Optional, Protocol, Sequence

import numpy as np

from .corpus import Corpus
from .emotion import Quadrant
from .errors import EmptyPhrase, EmptyQuadrantCorpus, ModelFormatError, TargetOutOfBounds
from .midi import MAX_PHRASE_MS, MIN_PHRASE_MS, NoteEvent, Phrase
from .rng import SplitMix64

MODEL_KIND = "markov-phrase-model"
MODEL_VERSION = 1

REST = -1
MIN_REST_MS = 50.0

N_DURATION_BINS = 16
DURATION_LO_MS = 50.0
DURATION_HI_MS = 2000.0
N_VELOCITY_BINS = 8

DURATION_EDGES = tuple(
    float(x) for x in DURATION_LO_MS * (DURATION_HI_MS / DURATION_LO_MS) ** (np.arange(N_DURATION_BINS + 1) / N_DURATION_BINS)
)
VELOCITY_EDGES = tuple(1.0 + k * 127.0 / N_VELOCITY_BINS for k in range(N_VELOCITY_BINS + 1))


class PhraseToken(NamedTuple):
    pitch: int  # 0..127, or REST
    duration_class: int
    velocity_class: int

    @property
    def is_rest(self) -> bool:
        return self.pitch == REST


def duration_class(ms: float) -> int:
    """Geometric bin index; durations outside 50-2000 ms land in the end bins."""
    if ms <= DURATION_LO_MS:
        return 0
    k = int(math.floor(N_DURATION_BINS * math.log(ms / DURATION_LO_MS) / math.log(DURATION_HI_MS / DURATION_LO_MS)))
    return min(max(k, 0), N_DURATION_BINS - 1)


def duration_of_class(k: int) -> float:
    """Geometric centre of duration bin ``k``."""
    return math.sqrt(DURATION_EDGES[k] * DURATION_EDGES[k + 1])


def velocity_class(v: int) -> int:
    k = int((v - 1) // (127.0 / N_VELOCITY_BINS))
    return min(max(k, 0), N_VELOCITY_BINS - 1)


def velocity_of_class(k: int) -> int:
    return int(round((VELOCITY_EDGES[k] + VELOCITY_EDGES[k + 1]) / 2))


def tokenize(p: Phrase) -> list[PhraseToken]:
    """One token per note in onset order, plus a REST for every gap of 50 ms or more."""
    if not p.notes:
        raise EmptyPhrase("cannot tokenize an empty phrase")
    tokens = []
    notes = p.notes
    for i, n in enumerate(notes):
        tokens.append(PhraseToken(n.pitch, duration_class(n.duration_ms), velocity_class(n.velocity)))
        if i + 1 < len(notes):
            gap = notes[i + 1].onset_ms - n.offset_ms
            if gap >= MIN_REST_MS:
                tokens.append(PhraseToken(REST, duration_class(gap), 0))
    return tokens


def detokenize(tokens: Sequence[PhraseToken], quadrant: Optional[Quadrant] = None) -> Phrase:
    """Lay tokens end to end, using each bin's centre as its duration."""
    notes = []
    cursor = 0.0
    for tok in tokens:
        dur = duration_of_class(tok.duration_class)
        if not tok.is_rest:
            notes.append(NoteEvent(tok.pitch, cursor, dur, velocity_of_class(tok.velocity_class)))
        cursor += dur
    return Phrase(tuple(notes), quadrant)


class PhraseGenerator(Protocol):
    quadrant: Quadrant

    def sample(self, seed: int, target_duration_ms: float) -> Phrase: ...


Context = tuple  # tuple[PhraseToken, ...]


@dataclass
class MarkovModel:
    """Order-k Markov chain over phrase tokens.

    ``transitions`` holds full-length contexts only; ``backoff`` holds the
    shorter suffix contexts used when a full context has no successor.
    """

    quadrant: Quadrant
    order: int
    transitions: dict[Context, dict[PhraseToken, int]] = field(default_factory=dict)
    start_contexts: dict[Context, int] = field(default_factory=dict)
    backoff: dict[Context, dict[PhraseToken, int]] = field(default_factory=dict)
    duration_edges: tuple[float, ...] = DURATION_EDGES
    velocity_edges: tuple[float, ...] = VELOCITY_EDGES

    @property
    def vocabulary(self) -> set[PhraseToken]:
        vocab = set()
        for ctx in self.start_contexts:
            vocab.update(ctx)
        for table in (self.transitions, self.backoff):
            for ctx, succ in table.items():
                vocab.update(ctx)
                vocab.update(succ)
        return vocab

    def sample(self, seed: int, target_duration_ms: float) -> Phrase:
        return sample(self, seed, target_duration_ms)

    # -- serialization --

    def to_dict(self) -> dict:
        def table(t):
            return [
                [[list(tok) for tok in ctx], [[list(tok), n] for tok, n in sorted(succ.items())]]
                for ctx, succ in sorted(t.items())
            ]

        return {
            "kind": MODEL_KIND,
            "version": MODEL_VERSION,
            "quadrant": self.quadrant.value,
            "order": self.order,
            "duration_edges_ms": list(self.duration_edges),
            "velocity_edges": list(self.velocity_edges),
            "start_contexts": [[[list(tok) for tok in ctx], n] for ctx, n in sorted(self.start_contexts.items())],
            "transitions": table(self.transitions),
            "backoff": table(self.backoff),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "MarkovModel":
        if d.get("kind") != MODEL_KIND or d.get("version") != MODEL_VERSION:
            raise ModelFormatError(f"unsupported model file (kind={d.get('kind')!r}, version={d.get('version')!r})")
        if tuple(d["duration_edges_ms"]) != DURATION_EDGES or tuple(d["velocity_edges"]) != VELOCITY_EDGES:
            raise ModelFormatError("model was trained with different bin tables")

        def ctx(rows):
            return tuple(PhraseToken(*r) for r in rows)

        def table(rows):
            return {ctx(c): {PhraseToken(*t): int(n) for t, n in succ} for c, succ in rows}

        return cls(
            quadrant=Quadrant(d["quadrant"]),
            order=int(d["order"]),
            transitions=table(d["transitions"]),
            start_contexts={ctx(c): int(n) for c, n in d["start_contexts"]},
            backoff=table(d["backoff"]),
        )

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), separators=(",", ":")) + "\n", encoding="utf-8")

    @classmethod
    def load(cls, path) -> "MarkovModel":
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def _count(table: dict, ctx: Context, tok: PhraseToken) -> None:
    succ = table.setdefault(ctx, {})
    succ[tok] = succ.get(tok, 0) + 1


def train_sequences(sequences: Sequence[Sequence[PhraseToken]], quadrant: Quadrant, order: int = 2) -> MarkovModel:
    if order < 1:
        raise ValueError("order must be >= 1")
    model = MarkovModel(Quadrant(quadrant), order)
    for seq in sequences:
        seq = tuple(seq)
        if not seq:
            continue
        start = seq[:order]
        model.start_contexts[start] = model.start_contexts.get(start, 0) + 1
        for i in range(order, len(seq)):
            _count(model.transitions, seq[i - order:i], seq[i])
        for k in range(1, order):
            for i in range(k, len(seq)):
                _count(model.backoff, seq[i - k:i], seq[i])
    return model


def train(c: Corpus, q: Quadrant, order: int = 2) -> MarkovModel:
    """Count context transitions over the accepted phrases of quadrant ``q``."""
    phrases = c.accepted.get(Quadrant(q), [])
    if not phrases:
        raise EmptyQuadrantCorpus(f"no accepted phrases for {q}")
    return train_sequences([tokenize(p) for p in phrases], q, order)


def _successors(model: MarkovModel, history: list[PhraseToken]) -> Optional[dict[PhraseToken, int]]:
    if len(history) >= model.order:
        succ = model.transitions.get(tuple(history[-model.order:]))
        if succ:
            return succ
    for k in range(min(model.order - 1, len(history)), 0, -1):
        succ = model.backoff.get(tuple(history[-k:]))
        if succ:
            return succ
    return None


def sample_tokens(model: MarkovModel, seed: int, target_duration_ms: float) -> list[PhraseToken]:
    """Draw tokens until their summed duration first reaches the target.

    Stops early when neither the full context nor any shorter suffix has
    a recorded successor.
    """
    if not MIN_PHRASE_MS <= target_duration_ms <= MAX_PHRASE_MS:
        raise TargetOutOfBounds(f"target {target_duration_ms} ms outside [{MIN_PHRASE_MS:g}, {MAX_PHRASE_MS:g}]")
    if not model.start_contexts:
        raise EmptyQuadrantCorpus("model has no start contexts")
    rng = SplitMix64(seed)
    starts = sorted(model.start_contexts)
    opening = starts[rng.weighted_index([model.start_contexts[s] for s in starts])]

    tokens: list[PhraseToken] = []
    total = 0.0
    for tok in opening:
        tokens.append(tok)
        total += duration_of_class(tok.duration_class)
        if total >= target_duration_ms:
            return tokens
    while total < target_duration_ms:
        succ = _successors(model, tokens)
        if succ is None:
            break
        keys = sorted(succ)
        tok = keys[rng.weighted_index([succ[k] for k in keys])]
        tokens.append(tok)
        total += duration_of_class(tok.duration_class)
    return tokens


def fit_duration_bounds(p: Phrase) -> Phrase:
    """Clip a phrase to 6000 ms and stretch its last note if it is under 100 ms."""
    notes = []
    for n in p.notes:
        if n.onset_ms >= MAX_PHRASE_MS:
            continue
        notes.append(NoteEvent(n.pitch, n.onset_ms, min(n.duration_ms, MAX_PHRASE_MS - n.onset_ms), n.velocity))
    out = Phrase(tuple(notes), p.quadrant)
    if out.total_duration_ms < MIN_PHRASE_MS:
        last = max(out.notes, key=lambda n: (n.offset_ms, n.onset_ms, n.pitch))
        stretched = NoteEvent(last.pitch, last.onset_ms, MIN_PHRASE_MS - last.onset_ms, last.velocity)
        out = Phrase(tuple(stretched if n is last else n for n in out.notes), p.quadrant)
    return out


def sample(m: MarkovModel, seed: int, target_duration_ms: float) -> Phrase:
    """Seeded phrase of roughly ``target_duration_ms``, tagged with the model's quadrant."""
    tokens = sample_tokens(m, seed, target_duration_ms)
    return fit_duration_bounds(detokenize(tokens, m.quadrant))
