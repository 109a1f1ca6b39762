"""Trajectories, constant-velocity prediction and closest-encounter geometry.

Everything here works on plain numpy arrays. Functions that take a
``RelativeState`` also accept stacked states (leading batch dimensions with
the 2-vector on the last axis), which is how the evaluation harness runs a
whole scenario at once.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

from .errors import InvalidStepError, SamplingError

# Below this squared relative speed (m/s)^2 the closest encounter is "now".
V_EPS = 1e-9

# Relative tolerance on the spacing of sample times.
_UNIFORM_RTOL = 1e-6


def _vec(v) -> np.ndarray:
    arr = np.asarray(v, dtype=float)
    if arr.shape[-1:] != (2,):
        raise ValueError(f"expected 2-vector(s), got shape {arr.shape}")
    return arr


def grid_size(horizon: float, step: float) -> int:
    """Number of samples on ``[0, horizon]`` at ``step``, i.e. floor(horizon/step) + 1."""
    if step <= 0 or horizon <= 0:
        raise InvalidStepError(f"horizon and step must be positive (got {horizon}, {step})")
    if step > horizon:
        raise InvalidStepError(f"step {step} exceeds horizon {horizon}")
    # tolerate 6.0 / 0.02 == 299.99999999999994
    return int(np.floor(horizon / step + 1e-9)) + 1


def prediction_grid(horizon: float, step: float) -> np.ndarray:
    return np.arange(grid_size(horizon, step)) * step


@dataclass(frozen=True)
class KinematicState:
    time: float
    position: np.ndarray
    velocity: np.ndarray

    def __post_init__(self):
        pos = _vec(self.position)
        vel = _vec(self.velocity)
        if pos.shape != (2,) or vel.shape != (2,):
            raise ValueError("a KinematicState holds a single 2D position and velocity")
        if not (np.all(np.isfinite(pos)) and np.all(np.isfinite(vel))):
            raise ValueError("position and velocity must be finite")
        object.__setattr__(self, "position", pos)
        object.__setattr__(self, "velocity", vel)


@dataclass(frozen=True)
class RelativeState:
    """Position and velocity of participant b relative to participant a."""

    delta_x: np.ndarray
    delta_v: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "delta_x", _vec(self.delta_x))
        object.__setattr__(self, "delta_v", _vec(self.delta_v))

    @classmethod
    def between(cls, a: KinematicState, b: KinematicState) -> "RelativeState":
        return cls(b.position - a.position, b.velocity - a.velocity)


@dataclass(frozen=True)
class Encounter:
    """Time until (``s_e``) and distance at (``d_e``) the closest encounter."""

    s_e: float | np.ndarray
    d_e: float | np.ndarray


@dataclass(frozen=True)
class DistanceProfile:
    """Predicted inter-participant distance ``d`` sampled at look-ahead times ``s``.

    ``d`` may carry leading batch axes (one row per scene time); ``s`` is
    always one-dimensional and uniform, starting at 0.
    """

    s: np.ndarray
    d: np.ndarray

    @property
    def step(self) -> float:
        return float(self.s[1] - self.s[0]) if len(self.s) > 1 else 0.0

    @property
    def horizon(self) -> float:
        return float(self.s[-1])

    def __len__(self) -> int:
        return len(self.s)

    def __iter__(self) -> Iterator[tuple[float, float]]:
        if self.d.ndim != 1:
            raise TypeError("only a single (unbatched) profile can be iterated")
        return zip(self.s.tolist(), self.d.tolist())


class Trajectory:
    """Uniformly sampled 2D kinematic states of one traffic participant."""

    def __init__(self, participant_id: str, times, positions, velocities):
        times = np.asarray(times, dtype=float)
        positions = _vec(positions)
        velocities = _vec(velocities)
        if times.ndim != 1 or len(times) < 2:
            raise SamplingError("a trajectory needs at least 2 samples")
        if positions.shape != (len(times), 2) or velocities.shape != (len(times), 2):
            raise ValueError("times, positions and velocities disagree in length")
        if not (np.all(np.isfinite(positions)) and np.all(np.isfinite(velocities))):
            raise ValueError("positions and velocities must be finite")
        self.dt = check_uniform(times)
        self.participant_id = str(participant_id)
        self.times = times
        self.positions = positions
        self.velocities = velocities
        for arr in (self.times, self.positions, self.velocities):
            arr.setflags(write=False)

    def __len__(self) -> int:
        return len(self.times)

    def __repr__(self) -> str:
        return (
            f"Trajectory({self.participant_id!r}, n={len(self)}, "
            f"t=[{self.times[0]:.3f}, {self.times[-1]:.3f}], dt={self.dt:g})"
        )

    def state(self, i: int) -> KinematicState:
        return KinematicState(float(self.times[i]), self.positions[i], self.velocities[i])

    @property
    def samples(self) -> list[KinematicState]:
        return [self.state(i) for i in range(len(self))]

    def __iter__(self) -> Iterator[KinematicState]:
        return (self.state(i) for i in range(len(self)))

    def __eq__(self, other) -> bool:
        if not isinstance(other, Trajectory):
            return NotImplemented
        return (
            self.participant_id == other.participant_id
            and np.array_equal(self.times, other.times)
            and np.array_equal(self.positions, other.positions)
            and np.array_equal(self.velocities, other.velocities)
        )


def check_uniform(times: np.ndarray) -> float:
    """Return the common spacing of ``times`` or raise ``SamplingError``."""
    steps = np.diff(times)
    if len(steps) == 0:
        raise SamplingError("a trajectory needs at least 2 samples")
    dt = float(steps.mean())
    if dt <= 0 or np.any(steps <= 0):
        raise SamplingError("sample times must be strictly increasing")
    if np.max(np.abs(steps - dt)) > _UNIFORM_RTOL * dt:
        raise SamplingError("sample times are not uniformly spaced")
    return dt


def predict_cv(state: KinematicState, s: float) -> np.ndarray:
    """Position after ``s`` seconds of constant-velocity motion."""
    if s < 0:
        raise ValueError("prediction time must be non-negative")
    return state.position + state.velocity * s


def predicted_distances(rel: RelativeState, s: np.ndarray) -> np.ndarray:
    """||dx + dv*s|| for every look-ahead in ``s``; batch axes of ``rel`` lead."""
    s = np.asarray(s, dtype=float)
    dx = rel.delta_x[..., None, :]
    dv = rel.delta_v[..., None, :]
    return np.linalg.norm(dx + dv * s[:, None], axis=-1)


def distance_profile(
    a: KinematicState, b: KinematicState, horizon: float, dt: float
) -> DistanceProfile:
    """Constant-velocity distance between ``a`` and ``b`` on ``[0, horizon]``."""
    s = prediction_grid(horizon, dt)
    return DistanceProfile(s, predicted_distances(RelativeState.between(a, b), s))


def closest_encounter(rel: RelativeState) -> Encounter:
    """Closed-form closest encounter under constant velocities.

    The unconstrained minimiser ``-(dx.dv)/|dv|^2`` is clamped to ``s >= 0``:
    participants that are already separating have their closest encounter
    now. Relative speeds with ``|dv|^2 < V_EPS`` are treated the same way.
    Works elementwise on batched states.
    """
    dx, dv = rel.delta_x, rel.delta_v
    vv = np.sum(dv * dv, axis=-1)
    xv = np.sum(dx * dv, axis=-1)
    moving = vv >= V_EPS
    s_e = np.where(moving, -xv / np.where(moving, vv, 1.0), 0.0)
    s_e = np.maximum(s_e, 0.0)
    d_e = np.linalg.norm(dx + dv * s_e[..., None], axis=-1)
    if np.ndim(s_e) == 0:
        return Encounter(float(s_e), float(d_e))
    return Encounter(s_e, d_e)


def sin_angle(rel: RelativeState) -> np.ndarray | float:
    """|sin| of the angle between dx and dv (0 when either vanishes)."""
    dx, dv = rel.delta_x, rel.delta_v
    cross = dx[..., 0] * dv[..., 1] - dx[..., 1] * dv[..., 0]
    norms = np.linalg.norm(dx, axis=-1) * np.linalg.norm(dv, axis=-1)
    out = np.where(norms > 0, np.abs(cross) / np.where(norms > 0, norms, 1.0), 0.0)
    return float(out) if np.ndim(out) == 0 else out


def estimate_velocities(
    samples: Sequence[tuple[float, Sequence[float]]], participant_id: str = "tp"
) -> Trajectory:
    """Build a trajectory from ``(t, (x, y))`` samples using finite differences.

    Central differences inside, one-sided at the ends.
    """
    if len(samples) < 2:
        raise SamplingError("need at least 2 samples to estimate velocities")
    times = np.array([t for t, _ in samples], dtype=float)
    pos = np.array([p for _, p in samples], dtype=float)
    dt = check_uniform(times)
    vel = np.gradient(pos, dt, axis=0, edge_order=1)
    return Trajectory(participant_id, times, pos, vel)
