"""Synthetic two-participant scenarios: longitudinal and intersection,
each as crash, near-crash and non-crash variant.

Every instance is sampled on a uniform grid that ends exactly at the moment
of maximal criticality ``t = 0``. Paths are straight lines; speed changes
come from piecewise-constant acceleration segments, integrated in closed
form from the ``t = 0`` anchor.

Conventions per kind (``speeds = (v_a, v_b)``):

* longitudinal: ``a`` follows ``b`` along +x. Speeds are the speeds at
  ``t = 0``. Crash: both at x = 0 at ``t = 0``. Near/non-crash: ``a``
  drives on a path shifted by ``lateral_offset`` (7 m / 12 m by default),
  so the distance at ``t = 0`` is exactly that offset.
* intersection: ``a`` drives along +x, ``b`` along +y, paths cross at the
  origin. Crash: both at the origin at ``t = 0``. Near-crash: ``b`` starts
  on the crash course at speed ``v_b`` and brakes at ``yield_decel`` from
  ``t = -yield_trigger`` on until it stops; by default the deceleration
  is chosen so ``b`` comes to rest ``lateral_offset`` metres before the
  crossing. Non-crash: constant speeds, crossing times ``pass_gap`` apart
  and placed so the closest approach falls on ``t = 0``.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Any, Iterable, Sequence

import numpy as np

from .errors import SpecError
from .kinematics import Trajectory

KINDS = ("longitudinal", "intersection")
CASES = ("crash", "near_crash", "non_crash")

DEFAULT_DT = 0.02
DEFAULT_START_OFFSET = 5.5
NEAR_CRASH_OFFSET = 7.0
NON_CRASH_OFFSET = 12.0
DEFAULT_PASS_GAP = 2.0
DEFAULT_YIELD_TRIGGER = 2.5

# one segment: acceleration (m/s^2) applying from t_start until the next segment
Segment = tuple[float, float]


@dataclass(frozen=True)
class ScenarioSpec:
    kind: str
    case: str
    speeds: tuple[float, float]
    start_offset: float = DEFAULT_START_OFFSET
    accel: tuple[tuple[Segment, ...], tuple[Segment, ...]] = ((), ())
    lateral_offset: float | None = None
    pass_gap: float = DEFAULT_PASS_GAP
    yield_trigger: float = DEFAULT_YIELD_TRIGGER
    yield_decel: float | None = None
    dt: float = DEFAULT_DT
    seed: int = 0
    name: str = ""

    def __post_init__(self):
        if self.kind not in KINDS:
            raise SpecError(f"kind must be one of {KINDS}, got {self.kind!r}")
        if self.case not in CASES:
            raise SpecError(f"case must be one of {CASES}, got {self.case!r}")
        if len(self.speeds) != 2:
            raise SpecError("speeds needs exactly two entries")
        speeds = tuple(float(v) for v in self.speeds)
        if any(not math.isfinite(v) or v < 0 for v in speeds):
            raise SpecError("speeds must be finite and >= 0")
        if not self.start_offset > 0:
            raise SpecError("start_offset must be positive")
        if not self.dt > 0 or self.dt > self.start_offset:
            raise SpecError("dt must be positive and below start_offset")
        if len(self.accel) != 2:
            raise SpecError("accel needs one segment list per participant")
        accel = tuple(
            tuple(sorted((float(t0), float(a)) for t0, a in segs)) for segs in self.accel
        )
        object.__setattr__(self, "speeds", speeds)
        object.__setattr__(self, "accel", accel)
        if self.lateral_offset is not None and self.lateral_offset < 0:
            raise SpecError("lateral_offset must be >= 0")
        if self.pass_gap <= 0:
            raise SpecError("pass_gap must be positive")
        if self.yield_decel is not None and self.yield_decel <= 0:
            raise SpecError("yield_decel must be positive")
        if not self.name:
            object.__setattr__(self, "name", f"{self.kind[:3]}_{self.case}_{self.seed}")

    @property
    def offset(self) -> float:
        if self.lateral_offset is not None:
            return self.lateral_offset
        return NON_CRASH_OFFSET if self.case == "non_crash" else NEAR_CRASH_OFFSET

    def to_dict(self) -> dict[str, Any]:
        out = asdict(self)
        out["speeds"] = list(self.speeds)
        out["accel"] = [[list(seg) for seg in segs] for segs in self.accel]
        return out

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "ScenarioSpec":
        known = set(cls.__dataclass_fields__)
        unknown = set(data) - known
        if unknown:
            raise SpecError(f"unknown field(s): {', '.join(sorted(unknown))}")
        for key in ("kind", "case", "speeds"):
            if key not in data:
                raise SpecError(f"missing required field {key!r}")
        kwargs = dict(data)
        try:
            kwargs["speeds"] = tuple(float(v) for v in data["speeds"])
            if "accel" in data:
                kwargs["accel"] = tuple(
                    tuple((float(t0), float(a)) for t0, a in segs) for segs in data["accel"]
                )
            for key in ("start_offset", "pass_gap", "yield_trigger", "dt"):
                if key in data:
                    kwargs[key] = float(data[key])
            for key in ("lateral_offset", "yield_decel"):
                if data.get(key) is not None:
                    kwargs[key] = float(data[key])
            if "seed" in data:
                kwargs["seed"] = int(data["seed"])
        except (TypeError, ValueError) as exc:
            raise SpecError(f"malformed value: {exc}") from None
        return cls(**kwargs)


@dataclass(frozen=True)
class ScenarioInstance:
    spec: ScenarioSpec
    traj_a: Trajectory
    traj_b: Trajectory
    t_event: float = 0.0

    @property
    def name(self) -> str:
        return self.spec.name

    @property
    def times(self) -> np.ndarray:
        return self.traj_a.times

    @property
    def distances(self) -> np.ndarray:
        return np.linalg.norm(self.traj_b.positions - self.traj_a.positions, axis=1)

    def min_distance(self) -> tuple[float, float]:
        """``(t, d)`` of the smallest sampled inter-participant distance."""
        d = self.distances
        i = int(np.argmin(d))
        return float(self.times[i]), float(d[i])


def _time_grid(spec: ScenarioSpec) -> np.ndarray:
    n = int(round(spec.start_offset / spec.dt))
    return (np.arange(n + 1) - n) * spec.dt


def _accel_at(segments: Sequence[Segment], t: float) -> float:
    a = 0.0
    for t0, value in segments:
        if t0 <= t:
            a = value
    return a


def integrate_path(
    times: np.ndarray,
    speed_at_zero: float,
    segments: Sequence[Segment] = (),
) -> tuple[np.ndarray, np.ndarray]:
    """Arc length and speed along a straight path, both anchored at t = 0.

    Arc length is 0 at ``t = 0``. Acceleration is piecewise constant per
    ``segments``; integration is exact. Raises ``SpecError`` when the speed
    would have to be negative at some sample.
    """
    breaks = sorted({t0 for t0, _ in segments if times[0] < t0 < 0.0})
    s_out = np.empty_like(times)
    v_out = np.empty_like(times)
    for i, t in enumerate(times):
        # walk from 0 back to t (or forward, for t > 0) through the breakpoints
        knots = [0.0] + [b for b in reversed(breaks) if b > t] + [t] if t <= 0 else [0.0, t]
        pos, vel = 0.0, speed_at_zero
        for left, right in zip(knots[:-1], knots[1:]):
            mid = 0.5 * (left + right)
            a = _accel_at(segments, mid)
            h = right - left
            pos += vel * h + 0.5 * a * h * h
            vel += a * h
        s_out[i] = pos
        v_out[i] = vel
    if np.any(v_out < -1e-9):
        raise SpecError("acceleration profile implies a negative speed")
    return s_out, np.maximum(v_out, 0.0)


def _yield_path(times: np.ndarray, speed: float, trigger: float, decel: float):
    """Constant speed toward arc length 0 at t = 0, braking from ``-trigger`` to a stop."""
    t_b = -trigger
    t_stop = t_b + speed / decel
    tau = np.clip(times - t_b, 0.0, t_stop - t_b)
    # arc length measured so that the unbraked path would reach 0 at t = 0
    s = np.where(times <= t_b, speed * times, speed * t_b + speed * tau - 0.5 * decel * tau**2)
    v = np.where(times <= t_b, speed, np.maximum(speed - decel * tau, 0.0))
    return s, v


def _make_traj(pid, times, origin, direction, arc, speed) -> Trajectory:
    direction = np.asarray(direction, dtype=float)
    pos = np.asarray(origin, dtype=float) + arc[:, None] * direction
    vel = speed[:, None] * direction
    return Trajectory(pid, times, pos, vel)


def gen_longitudinal(spec: ScenarioSpec) -> ScenarioInstance:
    if spec.kind != "longitudinal":
        raise SpecError(f"gen_longitudinal got a {spec.kind} spec")
    times = _time_grid(spec)
    v_a, v_b = spec.speeds
    s_a, sp_a = integrate_path(times, v_a, spec.accel[0])
    s_b, sp_b = integrate_path(times, v_b, spec.accel[1])
    if not np.all(s_b[:-1] > s_a[:-1]):
        raise SpecError("follower must be behind the leader before t = 0")
    lateral = 0.0 if spec.case == "crash" else spec.offset
    traj_a = _make_traj("a", times, (0.0, lateral), (1.0, 0.0), s_a, sp_a)
    traj_b = _make_traj("b", times, (0.0, 0.0), (1.0, 0.0), s_b, sp_b)
    return ScenarioInstance(spec, traj_a, traj_b)


def gen_intersection(spec: ScenarioSpec) -> ScenarioInstance:
    if spec.kind != "intersection":
        raise SpecError(f"gen_intersection got a {spec.kind} spec")
    times = _time_grid(spec)
    v_a, v_b = spec.speeds
    if spec.case == "non_crash":
        if any(spec.accel):
            raise SpecError("intersection non_crash uses constant speeds; drop accel")
        if v_a <= 0 or v_b <= 0:
            raise SpecError("intersection non_crash needs positive speeds")
        # a crosses g_a before t = 0, b crosses g_b after; closest approach at t = 0
        g_a = spec.pass_gap * v_b**2 / (v_a**2 + v_b**2)
        g_b = spec.pass_gap - g_a
        s_a, sp_a = v_a * (times + g_a), np.full_like(times, v_a)
        s_b, sp_b = v_b * (times - g_b), np.full_like(times, v_b)
    else:
        s_a, sp_a = integrate_path(times, v_a, spec.accel[0])
        if spec.case == "crash":
            s_b, sp_b = integrate_path(times, v_b, spec.accel[1])
        else:
            if any(spec.accel[1]):
                raise SpecError("the yielding participant's profile is set by yield_* fields")
            if spec.yield_trigger >= spec.start_offset:
                raise SpecError("yield_trigger must lie inside the scenario window")
            travel = v_b * spec.yield_trigger - spec.offset
            if spec.yield_decel is None and travel <= 0:
                raise SpecError("yielder cannot stop short of the crossing; raise speed or trigger")
            decel = spec.yield_decel or v_b**2 / (2.0 * travel)
            s_b, sp_b = _yield_path(times, v_b, spec.yield_trigger, decel)
    traj_a = _make_traj("a", times, (0.0, 0.0), (1.0, 0.0), s_a, sp_a)
    traj_b = _make_traj("b", times, (0.0, 0.0), (0.0, 1.0), s_b, sp_b)
    return ScenarioInstance(spec, traj_a, traj_b)


def generate(spec: ScenarioSpec) -> ScenarioInstance:
    if spec.kind == "longitudinal":
        return gen_longitudinal(spec)
    return gen_intersection(spec)


@dataclass(frozen=True)
class BaseScenario:
    """Speeds and acceleration shared by the three variants of one scenario."""

    kind: str
    speeds: tuple[float, float]
    accel: tuple[tuple[Segment, ...], tuple[Segment, ...]] = ((), ())
    yield_trigger: float = DEFAULT_YIELD_TRIGGER
    index: int = 0
    seed: int = 0

    def variant(self, case: str, **overrides) -> ScenarioSpec:
        accel = self.accel
        if self.kind == "intersection" and case == "non_crash":
            accel = ((), ())
        elif self.kind == "intersection" and case == "near_crash":
            accel = (self.accel[0], ())
        fields = dict(
            kind=self.kind,
            case=case,
            speeds=self.speeds,
            accel=accel,
            yield_trigger=self.yield_trigger,
            seed=self.seed,
            name=f"{self.kind[:3]}_{case}_{self.index}",
        )
        fields.update(overrides)
        return ScenarioSpec(**fields)


def _draw_longitudinal(rng: np.random.Generator, index: int, seed: int) -> BaseScenario:
    while True:
        closing = round(float(rng.uniform(6.0, 21.5)), 2)
        v_lead = round(float(rng.uniform(0.0, 14.0)), 2)
        accel: tuple[Segment, ...] = ()
        if rng.random() < 0.5:
            # leader brakes late; speeds are anchored at the crash so it was faster before
            t0 = round(float(rng.uniform(-3.0, -1.0)), 2)
            a = round(float(rng.uniform(-4.0, -1.5)), 2)
            accel = ((t0, a),)
        base = BaseScenario(
            "longitudinal", (v_lead + closing, v_lead), ((), accel), index=index, seed=seed
        )
        try:
            inst = generate(base.variant("crash"))
        except SpecError:
            continue
        if 20.0 <= inst.distances[0] <= 120.0:
            return base


def _draw_intersection(rng: np.random.Generator, index: int, seed: int) -> BaseScenario:
    while True:
        v_a = round(float(rng.uniform(7.0, 15.0)), 2)
        v_b = round(float(rng.uniform(7.0, 15.0)), 2)
        a_a = round(float(rng.uniform(-1.0, 1.0)), 2)
        trigger = round(float(rng.uniform(2.0, 3.0)), 2)
        base = BaseScenario(
            "intersection",
            (v_a, v_b),
            (((-DEFAULT_START_OFFSET - 1.0, a_a),), ()),
            yield_trigger=trigger,
            index=index,
            seed=seed,
        )
        try:
            insts = [generate(base.variant(case)) for case in CASES]
        except SpecError:
            continue
        if max(i.distances[0] for i in insts) <= 120.0:
            return base


def default_specs(seed: int = 0, per_kind: int = 7) -> list[ScenarioSpec]:
    """The standard set: ``per_kind`` base scenarios per kind, three cases each.

    With the default ``per_kind=7`` this is 42 specs. Speeds and accelerations
    are drawn from a Philox stream seeded with ``seed``; initial distances stay
    at or below 120 m (and at least 20 m for longitudinal crashes).
    """
    rng = np.random.Generator(np.random.Philox(seed))
    specs: list[ScenarioSpec] = []
    for draw in (_draw_longitudinal, _draw_intersection):
        for k in range(per_kind):
            base = draw(rng, k, seed)
            specs.extend(base.variant(case) for case in CASES)
    return specs


def generate_all(specs: Iterable[ScenarioSpec]) -> list[ScenarioInstance]:
    return [generate(s) for s in specs]
