"""Keyframe gesture generation for a low-DoF robot.

Each degree of freedom has a role that decides which musical feature
drives it:

``beat``
    taps between rest and tap-down on a subdivision of the phrase tempo
``contour``
    follows the normalized pitch curve
``onset``
    a nod per note onset, scaled by velocity, decaying back to neutral
``gaze``
    counter-moves its parent so the combined angle holds a gaze target

DoFs are generated one at a time in dependency order.  Each raw trajectory
is first limited so it stays within the joint's velocity and acceleration
limits for the profile it will receive, then conditioned on emotion:
arousal scales the range of motion about the joint midpoint and valence
picks smooth or linear segments (with short holds at reversals for very
negative valence).
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field, replace
from graphlib import CycleError, TopologicalSorter
from importlib import resources
from pathlib import Path
from typing import Callable, Optional, Sequence

import numpy as np

from .emotion import NEUTRAL, EmotionPoint
from .errors import CyclicDependency, EmptyPhrase, RobotModelError
from .features import FeatureVector, extract_contour
from .midi import Phrase
from .rng import SplitMix64, derive_seed, stable_hash64

ROLES = ("beat", "contour", "onset", "gaze")
SMOOTH = "smooth"
LINEAR = "linear"

# fraction of a "linear" segment spent in each parabolic blend
LINEAR_BLEND = 0.1
# peak |velocity| and |acceleration| of the unit profile s(u), u in [0, 1]
PROFILE_PEAKS = {
    SMOOTH: (1.5, 6.0),
    LINEAR: (1.0 / (1.0 - LINEAR_BLEND), 1.0 / (LINEAR_BLEND * (1.0 - LINEAR_BLEND))),
}

ONSET_DECAY_MS = 150.0
ONSET_RISE_MS = 50.0
DECAY_SAMPLE_MS = 50.0
REVERSAL_HOLD_MS = 20.0
ABRUPT_VALENCE = -0.5
LIMIT_SAFETY = 0.95


def amplitude_scale(e: EmotionPoint) -> float:
    """Range-of-motion factor: 0.3 at arousal -1, 1.0 at arousal +1."""
    return 0.3 + 0.7 * (e.arousal + 1.0) / 2.0


def speed_scale(e: EmotionPoint) -> float:
    """Time dilation factor, 1/0.6 at arousal -1 down to 1.0 at arousal +1."""
    return 1.0 / (0.6 + 0.4 * (e.arousal + 1.0) / 2.0)


def interpolation_for(e: EmotionPoint) -> str:
    return SMOOTH if e.valence >= 0 else LINEAR


def beat_subdivision(e: EmotionPoint) -> float:
    """Beats per tap cycle: half notes, quarters or eighths by arousal."""
    if e.arousal < -0.33:
        return 2.0
    if e.arousal > 0.33:
        return 0.5
    return 1.0


def unit_profile(kind: str, u):
    """Normalized position 0..1 along a segment at phase ``u``."""
    u = np.clip(u, 0.0, 1.0)
    if kind == SMOOTH:
        return u * u * (3.0 - 2.0 * u)
    b = LINEAR_BLEND
    acc = PROFILE_PEAKS[LINEAR][1]
    vc = PROFILE_PEAKS[LINEAR][0]
    return np.where(
        u < b,
        0.5 * acc * u * u,
        np.where(u > 1.0 - b, 1.0 - 0.5 * acc * (1.0 - u) ** 2, 0.5 * acc * b * b + vc * (u - b)),
    )


# -- robot description ---------------------------------------------------------

@dataclass(frozen=True)
class DofSpec:
    id: str
    position_min: float
    position_max: float
    max_velocity: float
    max_acceleration: float
    role: str
    parent: Optional[str] = None
    gaze_target: float = 0.0
    gaze_tolerance: float = 0.1  # fraction of the joint range

    def __post_init__(self):
        if not self.position_min < self.position_max:
            raise RobotModelError(f"{self.id}: position_min must be < position_max")
        if not (self.max_velocity > 0 and self.max_acceleration > 0):
            raise RobotModelError(f"{self.id}: velocity and acceleration limits must be positive")
        if self.role not in ROLES:
            raise RobotModelError(f"{self.id}: unknown role {self.role!r}")

    @property
    def midpoint(self) -> float:
        return 0.5 * (self.position_min + self.position_max)

    @property
    def half_range(self) -> float:
        return 0.5 * (self.position_max - self.position_min)

    def clamp(self, x: float) -> float:
        return min(self.position_max, max(self.position_min, x))

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "position_min": self.position_min,
            "position_max": self.position_max,
            "max_velocity": self.max_velocity,
            "max_acceleration": self.max_acceleration,
            "role": self.role,
            "parent": self.parent,
            "gaze_target": self.gaze_target,
            "gaze_tolerance": self.gaze_tolerance,
        }


@dataclass(frozen=True)
class RobotModel:
    name: str
    dofs: tuple[DofSpec, ...]
    generation_order: tuple[str, ...] = field(init=False)

    def __post_init__(self):
        ids = [d.id for d in self.dofs]
        if len(set(ids)) != len(ids):
            raise RobotModelError("duplicate DoF ids")
        for d in self.dofs:
            if d.parent is not None and d.parent not in ids:
                raise RobotModelError(f"{d.id}: unknown parent {d.parent!r}")
        # insertion sorted by id so the order ignores declaration order
        sorter = TopologicalSorter()
        for d in sorted(self.dofs, key=lambda d: d.id):
            sorter.add(d.id, *([d.parent] if d.parent else []))
        try:
            order = tuple(sorter.static_order())
        except CycleError as exc:
            raise CyclicDependency(f"DoF dependencies form a cycle: {exc.args[1]}") from None
        object.__setattr__(self, "generation_order", order)

    def dof(self, dof_id: str) -> DofSpec:
        for d in self.dofs:
            if d.id == dof_id:
                return d
        raise KeyError(dof_id)

    def to_dict(self) -> dict:
        return {"name": self.name, "dofs": [d.to_dict() for d in self.dofs]}

    @classmethod
    def from_dict(cls, d: dict) -> "RobotModel":
        return cls(d.get("name", "robot"), tuple(DofSpec(**spec) for spec in d["dofs"]))

    @classmethod
    def load(cls, path) -> "RobotModel":
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def default_robot() -> RobotModel:
    """Shimi-like four-DoF model shipped with the package (placeholder limits)."""
    text = resources.files("prosody_gesture").joinpath("data/default_robot.json").read_text(encoding="utf-8")
    return RobotModel.from_dict(json.loads(text))


# -- trajectories --------------------------------------------------------------

@dataclass(frozen=True)
class DofTrajectory:
    dof_id: str
    keyframes: tuple[tuple[float, float], ...]
    interpolation: tuple[str, ...]  # one entry per segment
    clamped_ms: tuple[float, ...] = ()

    def __post_init__(self):
        if len(self.keyframes) < 2:
            raise ValueError("a trajectory needs at least two keyframes")
        if len(self.interpolation) != len(self.keyframes) - 1:
            raise ValueError("need one interpolation mode per segment")
        times = [t for t, _ in self.keyframes]
        if times[0] != 0.0 or any(b <= a for a, b in zip(times, times[1:])):
            raise ValueError(f"{self.dof_id}: keyframe times must start at 0 and increase strictly")

    @property
    def times(self) -> np.ndarray:
        return np.array([t for t, _ in self.keyframes])

    @property
    def positions(self) -> np.ndarray:
        return np.array([p for _, p in self.keyframes])

    @property
    def duration_ms(self) -> float:
        return self.keyframes[-1][0]

    def evaluate(self, t_ms) -> np.ndarray:
        """Position at the given times (held constant outside the keyframe span)."""
        t = np.asarray(t_ms, dtype=float)
        times, pos = self.times, self.positions
        idx = np.clip(np.searchsorted(times, t, side="right") - 1, 0, len(times) - 2)
        u = (t - times[idx]) / (times[idx + 1] - times[idx])
        smooth = np.array([m == SMOOTH for m in self.interpolation])[idx]
        s = np.where(smooth, unit_profile(SMOOTH, u), unit_profile(LINEAR, u))
        return pos[idx] + (pos[idx + 1] - pos[idx]) * s

    def to_dict(self) -> dict:
        return {
            "dof": self.dof_id,
            "keyframes": [[t, p] for t, p in self.keyframes],
            "interpolation": list(self.interpolation),
            "clamped_ms": list(self.clamped_ms),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "DofTrajectory":
        return cls(
            d["dof"],
            tuple((float(t), float(p)) for t, p in d["keyframes"]),
            tuple(d["interpolation"]),
            tuple(float(t) for t in d.get("clamped_ms", ())),
        )


@dataclass(frozen=True)
class GesturePlan:
    trajectories: tuple[DofTrajectory, ...]
    duration_ms: float
    emotion: EmotionPoint
    source: str  # "generated" | "stochastic"

    def trajectory(self, dof_id: str) -> DofTrajectory:
        for t in self.trajectories:
            if t.dof_id == dof_id:
                return t
        raise KeyError(dof_id)

    def to_dict(self) -> dict:
        return {
            "source": self.source,
            "duration_ms": self.duration_ms,
            "emotion": self.emotion.to_dict(),
            "trajectories": [t.to_dict() for t in self.trajectories],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "GesturePlan":
        return cls(
            tuple(DofTrajectory.from_dict(t) for t in d["trajectories"]),
            float(d["duration_ms"]),
            EmotionPoint(d["emotion"]["valence"], d["emotion"]["arousal"]),
            d["source"],
        )

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1) + "\n"

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["dof", "time_ms", "position_rad", "interpolation"])
        for traj in self.trajectories:
            modes = list(traj.interpolation) + [""]
            for (t, p), m in zip(traj.keyframes, modes):
                w.writerow([traj.dof_id, repr(t), repr(p), m])
        return buf.getvalue()


# -- raw role generators -------------------------------------------------------

Keyframes = list  # list[tuple[float, float]]


def _close(frames: Keyframes, t_end: float, position: float) -> Keyframes:
    """Finish a keyframe list exactly at ``t_end``."""
    while frames and frames[-1][0] >= t_end - 1e-6:
        frames.pop()
    if not frames:
        frames.append((0.0, position))
    frames.append((t_end, position))
    return frames


def beat_keyframes(p: Phrase, f: FeatureVector, e: EmotionPoint, spec: DofSpec, duration: float) -> Keyframes:
    """Rest/tap-down alternation, one full cycle per subdivided beat."""
    period = 60000.0 / f.tempo_bpm * beat_subdivision(e)
    half = period / 2.0
    rest, down = spec.position_min, spec.position_max
    frames = [(0.0, rest)]
    k = 1
    while k * half < duration - 1e-6:
        frames.append((k * half, down if k % 2 else rest))
        k += 1
    return _close(frames, duration, rest)


def contour_keyframes(p: Phrase, f: FeatureVector, e: EmotionPoint, spec: DofSpec, duration: float) -> Keyframes:
    """Pitch curve mapped onto the joint range, one keyframe per distinct onset."""
    curve = f.contour if len(f.contour.curve) == len(p.notes) else extract_contour(p)
    lo, span = spec.position_min, spec.position_max - spec.position_min
    by_onset: dict[float, float] = {}
    for n, c in zip(p.notes, curve.curve):
        by_onset[n.onset_ms] = lo + c * span  # last (highest) note at an onset wins
    frames = sorted(by_onset.items())
    if frames[0][0] > 0:
        frames.insert(0, (0.0, frames[0][1]))
    return _close(frames, duration, frames[-1][1])


def onset_keyframes(p: Phrase, f: FeatureVector, e: EmotionPoint, spec: DofSpec, duration: float) -> Keyframes:
    """Velocity-scaled excursion per onset with exponential return to neutral."""
    neutral = spec.midpoint
    reach = spec.position_max - neutral
    groups: dict[float, int] = {}
    for n in p.notes:
        groups[n.onset_ms] = max(groups.get(n.onset_ms, 0), n.velocity)
    onsets = sorted(groups)

    def decayed(peak_t, peak_amp, t):
        return neutral + peak_amp * math.exp(-(t - peak_t) / ONSET_DECAY_MS)

    frames = [(0.0, neutral)]
    peak_t, peak_amp = 0.0, 0.0
    for i, t0 in enumerate(onsets):
        t_next = onsets[i + 1] if i + 1 < len(onsets) else duration
        if t0 > frames[-1][0]:
            frames.append((t0, decayed(peak_t, peak_amp, t0)))
        rise = min(ONSET_RISE_MS, 0.4 * (t_next - t0))
        peak_t, peak_amp = t0 + rise, groups[t0] / 127.0 * reach
        frames.append((peak_t, neutral + peak_amp))
        t = peak_t + DECAY_SAMPLE_MS
        while t < t_next - DECAY_SAMPLE_MS / 2:
            frames.append((t, decayed(peak_t, peak_amp, t)))
            t += DECAY_SAMPLE_MS
    return _close(frames, duration, decayed(peak_t, peak_amp, duration))


ROLE_GENERATORS: dict[str, Callable[..., Keyframes]] = {
    "beat": beat_keyframes,
    "contour": contour_keyframes,
    "onset": onset_keyframes,
}


# -- feasibility and conditioning ----------------------------------------------

def limit_keyframes(
    frames: Sequence[tuple[float, float]], spec: DofSpec, kind: str = SMOOTH, holds: bool = False
) -> Keyframes:
    """Shorten per-segment moves so the given profile respects joint limits.

    With ``holds`` each segment is budgeted as if a reversal hold had
    eaten into it.  Moves only ever shrink toward their target, so the
    result stays inside the joint range.
    """
    v_peak, a_peak = PROFILE_PEAKS[kind]
    out = [(frames[0][0], spec.clamp(frames[0][1]))]
    for (t0, _), (t1, target) in zip(frames, frames[1:]):
        d = t1 - t0
        if holds:
            d -= min(REVERSAL_HOLD_MS, d / 2.0)
        d_s = d / 1000.0
        step = LIMIT_SAFETY * min(spec.max_velocity * d_s / v_peak, spec.max_acceleration * d_s * d_s / a_peak)
        prev = out[-1][1]
        delta = min(step, max(-step, spec.clamp(target) - prev))
        out.append((t1, spec.clamp(prev + delta)))
    return out


def _insert_reversal_holds(frames: Keyframes, modes: list[str]) -> tuple[Keyframes, list[str]]:
    out_f = [frames[0]]
    out_m = []
    for i in range(1, len(frames)):
        out_f.append(frames[i])
        if i < len(frames) - 1:
            d_in = frames[i][1] - frames[i - 1][1]
            d_out = frames[i + 1][1] - frames[i][1]
            out_m.append(modes[i - 1])
            if d_in * d_out < 0:
                hold = min(REVERSAL_HOLD_MS, (frames[i + 1][0] - frames[i][0]) / 2.0)
                out_f.append((frames[i][0] + hold, frames[i][1]))
                out_m.append(LINEAR)
        else:
            out_m.append(modes[i - 1])
    return out_f, out_m


def condition_trajectory(t: DofTrajectory, e: EmotionPoint, spec: DofSpec) -> DofTrajectory:
    """Apply emotion to a trajectory.

    Positions become ``mid + A * (p - mid)`` with ``A = amplitude_scale(e)``.
    Keyframe times are dilated by ``speed_scale(e)`` and renormalized to the
    original duration; a uniform dilation cancels under renormalization so
    the times come back unchanged.  Segments are smooth for non-negative
    valence and linear otherwise; below valence -0.5 every direction
    reversal also gets a 20 ms hold.
    """
    a = amplitude_scale(e)
    mid = spec.midpoint
    frames = [(time, spec.clamp(mid + a * (p - mid))) for time, p in t.keyframes]
    modes = [interpolation_for(e)] * (len(frames) - 1)
    if e.valence < ABRUPT_VALENCE:
        frames, modes = _insert_reversal_holds(frames, modes)
    return DofTrajectory(t.dof_id, tuple(frames), tuple(modes), t.clamped_ms)


def gaze_trajectory(spec: DofSpec, parent: Optional[DofTrajectory], duration: float) -> DofTrajectory:
    """Counter-rotation keeping ``own + parent`` on the gaze target.

    Copies the parent's keyframe times and segment modes so the sum is
    exact between keyframes too, except where the joint limit clamps.
    """
    target = spec.gaze_target
    if parent is None:
        c = spec.clamp(target)
        return DofTrajectory(spec.id, ((0.0, c), (duration, c)), (SMOOTH,))
    frames = []
    clamped = []
    for t, pp in parent.keyframes:
        raw = target - pp
        c = spec.clamp(raw)
        if c != raw:
            clamped.append(t)
        frames.append((t, c))
    return DofTrajectory(spec.id, tuple(frames), parent.interpolation, tuple(clamped))


def generate_gesture(p: Phrase, f: FeatureVector, e: EmotionPoint, r: RobotModel) -> GesturePlan:
    """Build a full plan, one DoF at a time in dependency order."""
    if not p.notes:
        raise EmptyPhrase("cannot generate gestures for an empty phrase")
    duration = p.total_duration_ms
    kind = interpolation_for(e)
    holds = e.valence < ABRUPT_VALENCE
    done: dict[str, DofTrajectory] = {}
    for dof_id in r.generation_order:
        spec = r.dof(dof_id)
        if spec.role == "gaze":
            done[dof_id] = gaze_trajectory(spec, done.get(spec.parent), duration)
            continue
        raw = ROLE_GENERATORS[spec.role](p, f, e, spec, duration)
        frames = limit_keyframes(raw, spec, kind, holds)
        traj = DofTrajectory(dof_id, tuple(frames), (SMOOTH,) * (len(frames) - 1))
        done[dof_id] = condition_trajectory(traj, e, spec)
    return GesturePlan(tuple(done[i] for i in r.generation_order), duration, e, "generated")


# -- stochastic baseline -------------------------------------------------------

MIN_MOVE_MS = 50.0


def neutral_range(spec: DofSpec) -> tuple[float, float]:
    a = amplitude_scale(NEUTRAL)
    return spec.midpoint - a * spec.half_range, spec.midpoint + a * spec.half_range


def stochastic_gesture(stimulus_id: str, duration_ms: float, r: RobotModel) -> GesturePlan:
    """Random per-DoF movements, deterministic for a given ``stimulus_id``.

    Movement durations are uniform on (50 ms, duration/2] and targets uniform
    over the range the generator uses at neutral emotion.  The last movement
    is cut at the plan end.
    """
    if not duration_ms > 0:
        raise ValueError("duration_ms must be positive")
    seed = stable_hash64(stimulus_id)
    longest = duration_ms / 2.0
    shortest = min(MIN_MOVE_MS, longest)
    trajectories = []
    for dof_id in r.generation_order:
        spec = r.dof(dof_id)
        lo, hi = neutral_range(spec)
        rng = SplitMix64(derive_seed(seed, "dof", dof_id))
        t, pos = 0.0, spec.midpoint
        frames = [(t, pos)]
        while t < duration_ms:
            move = shortest + (longest - shortest) * (1.0 - rng.random())
            target = rng.uniform(lo, hi)
            if t + move >= duration_ms:
                frac = (duration_ms - t) / move
                frames.append((duration_ms, pos + (target - pos) * float(unit_profile(SMOOTH, frac))))
                break
            t += move
            pos = target
            frames.append((t, pos))
        frames = limit_keyframes(frames, spec, SMOOTH)
        trajectories.append(DofTrajectory(dof_id, tuple(frames), (SMOOTH,) * (len(frames) - 1)))
    return GesturePlan(tuple(trajectories), duration_ms, NEUTRAL, "stochastic")


def load_plan(path) -> GesturePlan:
    return GesturePlan.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))
