"""Grid-search calibration of each measure's free constants.

Instances are split per (kind, case) group by position: even positions form
the calibration half, odd positions the held-out half. A parameter set is
feasible when

* every crash in the calibration half is detected,
* every near-crash in the calibration half peaks above ``near_bound``,
* the held-out near- and non-crash instances produce at most ``max_fp``
  false positives (peak risk above ``r_th``).

Among feasible sets the one with the earliest mean detection time on the
calibration crashes wins; ties go to fewer held-out false positives, then to
grid order. Grids are fixed lists, so reruns give identical parameters.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .evaluation import (
    DEFAULT_HORIZON,
    DEFAULT_RTH,
    MeasureParams,
    TraceInputs,
    trace_values,
)
from .measures import GaussParams, TtceParams
from .scenarios import ScenarioInstance
from .survival import SurvivalParams

DEFAULT_NEAR_BOUND = 0.5
DEFAULT_MAX_FP = 0

CALIBRATED_MEASURES = ("TTCE", "Gauss", "SA")


def _logspace(lo: float, hi: float, n: int) -> list[float]:
    return [float(f"{v:.6g}") for v in np.logspace(np.log10(lo), np.log10(hi), n)]


def default_grid(measure: str, survival_base: SurvivalParams | None = None) -> list[MeasureParams]:
    """Two free constants per measure, 16 x 16 log-spaced values each."""
    if measure == "TTCE":
        return [
            TtceParams(d_c=a, diffusion=b)
            for a in _logspace(0.01, 3.0, 16)
            for b in _logspace(1.0, 1000.0, 16)
        ]
    if measure == "Gauss":
        return [
            GaussParams(epsilon=e, d1=d / 2, d2=d / 2)
            for e in _logspace(1.0, 3000.0, 16)
            for d in _logspace(1.0, 1000.0, 16)
        ]
    if measure == "SA":
        base = survival_base or SurvivalParams()
        return [
            SurvivalParams(
                tau0_inv=a,
                beta_coll=b,
                tau_coll0_inv=base.tau_coll0_inv,
                dt_int=base.dt_int,
                horizon=base.horizon,
            )
            for a in _logspace(0.02, 2.0, 16)
            for b in _logspace(0.1, 1.0, 16)
        ]
    raise ValueError(f"no calibration grid for {measure!r}")


@dataclass
class Candidate:
    params: MeasureParams
    feasible: bool
    t_d_mean: float
    near_min: float
    heldout_fp: int
    misses: int
    reasons: list[str] = field(default_factory=list)


@dataclass
class CalibrationResult:
    measure: str
    feasible: bool
    params: MeasureParams | None
    best: Candidate | None
    n_candidates: int
    n_feasible: int
    settings: dict

    def report(self) -> str:
        lines = [f"calibration of {self.measure}: {self.n_feasible}/{self.n_candidates} grid points feasible"]
        if self.feasible:
            b = self.best
            lines.append(f"  params: {asdict(self.params)}")
            lines.append(
                f"  mean t_d {b.t_d_mean:.3f} s, min near-crash R_max {b.near_min:.3f}, "
                f"held-out FP {b.heldout_fp}"
            )
        else:
            lines.append("  INFEASIBLE: no grid point satisfies all constraints")
            if self.best is not None:
                b = self.best
                lines.append(
                    f"  closest miss: {asdict(b.params)} ({'; '.join(b.reasons)})"
                )
        return "\n".join(lines)


def split_halves(
    instances: Sequence[ScenarioInstance],
) -> tuple[list[ScenarioInstance], list[ScenarioInstance]]:
    """Alternate instances of each (kind, case) group into calibration / held-out."""
    seen: dict[tuple[str, str], int] = {}
    calib, held = [], []
    for inst in instances:
        key = (inst.spec.kind, inst.spec.case)
        k = seen.get(key, 0)
        seen[key] = k + 1
        (calib if k % 2 == 0 else held).append(inst)
    return calib, held


def _score(
    measure: str,
    params: MeasureParams,
    calib: list[TraceInputs],
    held: list[TraceInputs],
    r_th: float,
    near_bound: float,
    max_fp: int,
) -> Candidate:
    t_d, near, misses = [], [], 0
    for inp in calib:
        case = inp.instance.spec.case
        if case == "non_crash":
            continue
        v = trace_values(inp, measure, params)
        if case == "crash":
            hits = np.flatnonzero(np.nan_to_num(v, nan=-1.0) >= r_th)
            if len(hits):
                t_d.append(inp.times[hits[0]])
            else:
                misses += 1
        else:
            near.append(np.nanmax(v))
    fp = 0
    for inp in held:
        if inp.instance.spec.case == "crash":
            continue
        fp += int(np.nanmax(trace_values(inp, measure, params)) > r_th)
    near_min = float(min(near)) if near else float("nan")
    reasons = []
    if misses:
        reasons.append(f"{misses} calibration crash(es) missed")
    if near and not near_min > near_bound:
        reasons.append(f"near-crash R_max {near_min:.3f} <= {near_bound}")
    if fp > max_fp:
        reasons.append(f"held-out FP {fp} > {max_fp}")
    return Candidate(
        params=params,
        feasible=not reasons,
        t_d_mean=float(np.mean(t_d)) if t_d else float("nan"),
        near_min=near_min,
        heldout_fp=fp,
        misses=misses,
        reasons=reasons,
    )


def calibrate(
    instances: Sequence[ScenarioInstance],
    measure: str,
    grid: Iterable[MeasureParams] | None = None,
    r_th: float = DEFAULT_RTH,
    near_bound: float = DEFAULT_NEAR_BOUND,
    max_fp: int = DEFAULT_MAX_FP,
    horizon: float = DEFAULT_HORIZON,
    inputs: dict[str, TraceInputs] | None = None,
) -> CalibrationResult:
    """Pick the grid point with the earliest crash detection that meets the constraints.

    ``inputs`` may carry precomputed ``TraceInputs`` keyed by instance name
    so several measures share the distance predictions.
    """
    grid = list(grid) if grid is not None else default_grid(measure)
    inputs = inputs if inputs is not None else {}
    for inst in instances:
        if inst.name not in inputs:
            inputs[inst.name] = TraceInputs(inst, horizon)
    calib_inst, held_inst = split_halves(instances)
    calib = [inputs[i.name] for i in calib_inst]
    held = [inputs[i.name] for i in held_inst]

    candidates = [_score(measure, p, calib, held, r_th, near_bound, max_fp) for p in grid]
    feasible = [c for c in candidates if c.feasible]
    settings = dict(r_th=r_th, near_bound=near_bound, max_fp=max_fp, horizon=horizon)
    if feasible:
        best = min(feasible, key=lambda c: (c.t_d_mean, c.heldout_fp))
        return CalibrationResult(measure, True, best.params, best, len(grid), len(feasible), settings)
    closest = min(candidates, key=lambda c: (len(c.reasons), c.misses, -np.nan_to_num(c.near_min), c.heldout_fp))
    return CalibrationResult(measure, False, None, closest, len(grid), 0, settings)
