"""Risk traces over scenarios, threshold detection and summary statistics.

At every scene time the current states of both participants are extrapolated
with constant velocity over the prediction horizon, and each measure turns
that prediction into one risk value. A measure "detects" a crash the first
time its trace reaches the threshold.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import Iterable, Mapping, Union

import numpy as np

from .errors import EmptyGroupError, HorizonTooShortError
from .kinematics import DistanceProfile, RelativeState, closest_encounter, predicted_distances, prediction_grid, sin_angle
from .measures import GaussParams, TtceParams, risk_gauss, risk_ttc, risk_ttce
from .scenarios import CASES, KINDS, ScenarioInstance
from .survival import SurvivalParams, risk_sa

MEASURES = ("TTC", "TTCE", "Gauss", "SA")
DEFAULT_RTH = 0.7
DEFAULT_HORIZON = 6.0

# TTC only makes sense for (near) collinear closing motion
TTC_MAX_SIN = 0.05
# relative distance below which two participants count as touching
COLLISION_EPS = 1e-9

MeasureParams = Union[TtceParams, GaussParams, SurvivalParams]


def default_params() -> dict[str, MeasureParams]:
    ttce = TtceParams()
    return {"TTC": ttce, "TTCE": ttce, "Gauss": GaussParams(), "SA": SurvivalParams()}


@dataclass(frozen=True)
class RiskTrace:
    """Risk per scene time. NaN marks times where the measure does not apply."""

    measure: str
    times: np.ndarray
    values: np.ndarray
    instance: str = ""

    def __post_init__(self):
        finite = self.values[~np.isnan(self.values)]
        if np.any(finite < 0) or np.any(finite > 1):
            raise ValueError("risk values must lie in [0, 1]")

    @property
    def applicable(self) -> bool:
        return bool(np.any(~np.isnan(self.values)))

    @property
    def r_max(self) -> float:
        return float(np.nanmax(self.values)) if self.applicable else math.nan


class TraceInputs:
    """Per-scene-time relative states of one instance, with cached predictions."""

    def __init__(self, instance: ScenarioInstance, horizon: float = DEFAULT_HORIZON):
        if horizon <= instance.spec.start_offset:
            raise HorizonTooShortError(
                f"horizon {horizon:g} s must exceed the scenario start offset "
                f"{instance.spec.start_offset:g} s"
            )
        keep = instance.times <= instance.t_event + 1e-9
        a, b = instance.traj_a, instance.traj_b
        self.instance = instance
        self.horizon = horizon
        self.times = instance.times[keep] - instance.t_event
        self.rel = RelativeState(
            b.positions[keep] - a.positions[keep], b.velocities[keep] - a.velocities[keep]
        )
        self._profiles: dict[float, DistanceProfile] = {}

    def profile(self, step: float) -> DistanceProfile:
        """Distance predictions for all scene times at look-ahead ``step``."""
        key = round(step, 12)
        if key not in self._profiles:
            s = prediction_grid(self.horizon, step)
            self._profiles[key] = DistanceProfile(s, predicted_distances(self.rel, s))
        return self._profiles[key]

    @cached_property
    def encounter(self):
        return closest_encounter(self.rel)

    @cached_property
    def ttc_seconds(self) -> np.ndarray:
        """Time to collision where TTC applies, NaN elsewhere."""
        dx, dv = self.rel.delta_x, self.rel.delta_v
        xv = np.sum(dx * dv, axis=-1)
        vv = np.sum(dv * dv, axis=-1)
        touching = np.linalg.norm(dx, axis=-1) < COLLISION_EPS
        ok = (sin_angle(self.rel) < TTC_MAX_SIN) & (xv < 0) & (vv > 0)
        with np.errstate(divide="ignore", invalid="ignore"):
            ttc = np.where(ok, -xv / np.where(vv > 0, vv, 1.0), np.nan)
        return np.where(touching, 0.0, ttc)


def trace_values(
    inputs: TraceInputs, measure: str, params: MeasureParams, gauss_step: float | None = None
) -> np.ndarray:
    if measure == "TTC":
        ttc = inputs.ttc_seconds
        out = np.full(len(ttc), np.nan)
        ok = ~np.isnan(ttc)
        out[ok] = risk_ttc(ttc[ok], params)
        return out
    if measure == "TTCE":
        return np.asarray(risk_ttce(inputs.encounter, params), dtype=float)
    if measure == "Gauss":
        step = gauss_step or inputs.instance.spec.dt
        risk, _ = risk_gauss(inputs.profile(step), params)
        return np.asarray(risk, dtype=float)
    if measure == "SA":
        p = params if math.isclose(params.horizon, inputs.horizon) else replace(params, horizon=inputs.horizon)
        return np.asarray(risk_sa(inputs.profile(p.dt_int), p), dtype=float)
    raise ValueError(f"unknown measure {measure!r}; expected one of {MEASURES}")


def compute_trace(
    instance: ScenarioInstance | TraceInputs,
    measure: str,
    params: MeasureParams | None = None,
    horizon: float = DEFAULT_HORIZON,
    gauss_step: float | None = None,
) -> RiskTrace:
    """Risk trace of one measure over one scenario instance.

    TTC is evaluated only where the motion is collinear and closing; other
    times carry NaN. Gaussian risk is maximised over a look-ahead grid with
    the scenario's sample step unless ``gauss_step`` is given. The SA
    integration horizon follows ``horizon``.
    """
    inputs = instance if isinstance(instance, TraceInputs) else TraceInputs(instance, horizon)
    params = params if params is not None else default_params()[measure]
    values = trace_values(inputs, measure, params, gauss_step)
    return RiskTrace(measure, inputs.times.copy(), values, inputs.instance.name)


def detect(trace: RiskTrace, r_th: float = DEFAULT_RTH) -> float | None:
    """First scene time (relative to the event) where the risk reaches ``r_th``."""
    if not 0 < r_th < 1:
        raise ValueError("r_th must lie strictly between 0 and 1")
    hits = np.flatnonzero(np.nan_to_num(trace.values, nan=-1.0) >= r_th)
    return float(trace.times[hits[0]]) if len(hits) else None


@dataclass(frozen=True)
class DetectionStats:
    """One row of the summary table.

    Crash rows carry detection-time statistics; near- and non-crash rows
    carry peak-risk statistics and false positives. Spreads are population
    standard deviations. Crashes never detected are excluded from the
    detection-time mean and counted in ``misses``.
    """

    measure: str
    kind: str
    case: str
    n: int
    t_d_mean: float | None = None
    sigma_t: float | None = None
    misses: int | None = None
    r_max_mean: float | None = None
    sigma_r: float | None = None
    fp: int | None = None


def _group_stats(measure, kind, case, traces: list[RiskTrace], r_th: float) -> DetectionStats:
    if not traces:
        raise EmptyGroupError(f"no traces for {measure}/{kind}/{case}")
    n = len(traces)
    if case == "crash":
        hits = [detect(t, r_th) for t in traces]
        t_d = np.array([h for h in hits if h is not None])
        misses = n - len(t_d)
        if len(t_d) == 0:
            return DetectionStats(measure, kind, case, n, misses=misses)
        return DetectionStats(
            measure, kind, case, n, float(t_d.mean()), float(t_d.std()), misses=misses
        )
    r_max = np.array([t.r_max for t in traces])
    return DetectionStats(
        measure,
        kind,
        case,
        n,
        r_max_mean=float(r_max.mean()),
        sigma_r=float(r_max.std()),
        fp=int(np.sum(r_max > r_th)),
    )


GroupKey = tuple[str, str, str]


def aggregate(
    groups: Mapping[GroupKey, Iterable[RiskTrace]], r_th: float = DEFAULT_RTH
) -> list[DetectionStats]:
    """Summary statistics per ``(measure, kind, case)`` group.

    Rows come out in a fixed order (measures, then kinds, then cases) so
    the table is reproducible.
    """
    if not 0 < r_th < 1:
        raise ValueError("r_th must lie strictly between 0 and 1")
    order = {m: i for i, m in enumerate(MEASURES)}
    kinds = {k: i for i, k in enumerate(KINDS)}
    cases = {c: i for i, c in enumerate(CASES)}
    keys = sorted(
        groups,
        key=lambda k: (order.get(k[0], 99), k[0], kinds.get(k[1], 99), cases.get(k[2], 99)),
    )
    return [_group_stats(*key, list(groups[key]), r_th) for key in keys]


@dataclass
class Evaluation:
    """Traces of several measures over a scenario set, grouped for ``aggregate``."""

    traces: dict[GroupKey, list[RiskTrace]] = field(default_factory=dict)

    def add(self, instance: ScenarioInstance, trace: RiskTrace) -> None:
        key = (trace.measure, instance.spec.kind, instance.spec.case)
        self.traces.setdefault(key, []).append(trace)

    def stats(self, r_th: float = DEFAULT_RTH) -> list[DetectionStats]:
        return aggregate(self.traces, r_th)


def evaluate(
    instances: Iterable[ScenarioInstance],
    params: Mapping[str, MeasureParams] | None = None,
    measures: Iterable[str] = MEASURES,
    horizon: float = DEFAULT_HORIZON,
) -> Evaluation:
    """Compute traces for every instance and measure.

    TTC traces are kept only for instances where TTC applies at every scene
    time (collinear closing throughout).
    """
    params = {**default_params(), **(params or {})}
    result = Evaluation()
    for inst in instances:
        inputs = TraceInputs(inst, horizon)
        for m in measures:
            trace = compute_trace(inputs, m, params[m])
            if m == "TTC" and np.any(np.isnan(trace.values)):
                continue
            result.add(inst, trace)
    return result
