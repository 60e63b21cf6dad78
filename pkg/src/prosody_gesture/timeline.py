"""Voice/gesture synchronization and kinematic checking."""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import SyncToleranceExceeded
from .gesture import GesturePlan, RobotModel
from .voice import RenderPlan

SYNC_TOLERANCE_MS = 50.0
POSITION_EPS = 1e-9


@dataclass(frozen=True)
class Timeline:
    gesture: GesturePlan
    voice: RenderPlan
    offset_ms: float = 0.0

    @property
    def sync_error_ms(self) -> float:
        return abs(self.gesture.duration_ms - (self.voice.phrase_duration_ms + self.offset_ms))


def merge(g: GesturePlan, v: RenderPlan, tolerance_ms: float = SYNC_TOLERANCE_MS) -> Timeline:
    t = Timeline(g, v, 0.0)
    if t.sync_error_ms > tolerance_ms:
        raise SyncToleranceExceeded(
            f"gesture {g.duration_ms:.1f} ms vs voice {v.phrase_duration_ms:.1f} ms exceeds {tolerance_ms:g} ms"
        )
    return t


@dataclass(frozen=True)
class Violation:
    kind: str  # "position" | "velocity" | "acceleration"
    time_ms: float
    value: float
    limit: float


@dataclass
class DofReport:
    dof_id: str
    max_abs_velocity: float
    max_abs_acceleration: float
    violations: list[Violation] = field(default_factory=list)

    @property
    def n_violations(self) -> int:
        return len(self.violations)


@dataclass
class SimReport:
    dofs: list[DofReport]
    sync_error_ms: float
    sync_tolerance_ms: float = SYNC_TOLERANCE_MS

    @property
    def n_violations(self) -> int:
        return sum(d.n_violations for d in self.dofs)

    @property
    def passed(self) -> bool:
        return self.n_violations == 0 and self.sync_error_ms <= self.sync_tolerance_ms

    def to_dict(self) -> dict:
        return {
            "pass": self.passed,
            "sync_error_ms": self.sync_error_ms,
            "sync_tolerance_ms": self.sync_tolerance_ms,
            "dofs": [
                {
                    "dof": d.dof_id,
                    "max_abs_velocity": d.max_abs_velocity,
                    "max_abs_acceleration": d.max_abs_acceleration,
                    "n_violations": d.n_violations,
                    "violations": [[v.kind, v.time_ms, v.value, v.limit] for v in d.violations],
                }
                for d in self.dofs
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1) + "\n"

    def summary(self) -> str:
        lines = [f"{'PASS' if self.passed else 'FAIL'}  sync error {self.sync_error_ms:.3f} ms"]
        for d in self.dofs:
            lines.append(
                f"  {d.dof_id:<10} |v|max {d.max_abs_velocity:8.3f} rad/s  "
                f"|a|max {d.max_abs_acceleration:9.3f} rad/s^2  violations {d.n_violations}"
            )
        return "\n".join(lines)


def finite_differences(pos: np.ndarray, dt_s: float) -> tuple[np.ndarray, np.ndarray]:
    """Central-difference velocity and acceleration, one-sided at the ends."""
    vel = np.gradient(pos, dt_s, edge_order=1) if pos.size > 1 else np.zeros_like(pos)
    acc = np.zeros_like(pos)
    if pos.size > 2:
        acc[1:-1] = (pos[2:] - 2.0 * pos[1:-1] + pos[:-2]) / dt_s**2
        acc[0] = acc[1]
        acc[-1] = acc[-2]
    return vel, acc


def simulate(t: Timeline, r: RobotModel, dt_ms: float = 5.0, sync_tolerance_ms: float = SYNC_TOLERANCE_MS) -> SimReport:
    """Sample every trajectory at ``dt_ms`` and check it against the robot's limits."""
    if not 0 < dt_ms <= 10:
        raise ValueError("dt_ms must be in (0, 10]")
    dt_s = dt_ms / 1000.0
    reports = []
    for traj in t.gesture.trajectories:
        spec = r.dof(traj.dof_id)
        n = int(np.floor(traj.duration_ms / dt_ms + 1e-9)) + 1
        times = np.arange(n) * dt_ms
        pos = traj.evaluate(times)
        vel, acc = finite_differences(pos, dt_s)
        rep = DofReport(
            traj.dof_id,
            float(np.max(np.abs(vel))) if n else 0.0,
            float(np.max(np.abs(acc))) if n else 0.0,
        )
        low = pos < spec.position_min - POSITION_EPS
        high = pos > spec.position_max + POSITION_EPS
        for i in np.flatnonzero(low | high):
            rep.violations.append(Violation(
                "position", float(times[i]), float(pos[i]),
                spec.position_min if low[i] else spec.position_max,
            ))
        for i in np.flatnonzero(np.abs(vel) > spec.max_velocity):
            rep.violations.append(Violation("velocity", float(times[i]), float(vel[i]), spec.max_velocity))
        for i in np.flatnonzero(np.abs(acc) > spec.max_acceleration):
            rep.violations.append(Violation("acceleration", float(times[i]), float(acc[i]), spec.max_acceleration))
        rep.violations.sort(key=lambda v: (v.time_ms, v.kind))
        reports.append(rep)
    return SimReport(reports, t.sync_error_ms, sync_tolerance_ms)
