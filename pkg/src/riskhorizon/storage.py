"""Reading and writing scenario, trace, statistics and parameter files.

Floats are written with ``repr`` (shortest round-trip form, ``.`` decimal),
so a value read back is bit-identical to the one written and reruns
produce identical bytes. Every file goes to a temporary name in the target
directory first and is renamed into place.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
import tempfile
from dataclasses import asdict, fields
from pathlib import Path
from typing import Any, Iterable, Mapping

import numpy as np

from .errors import RiskHorizonError, SpecError
from .evaluation import MEASURES, DetectionStats, MeasureParams, RiskTrace
from .kinematics import Trajectory
from .measures import GaussParams, TtceParams
from .scenarios import ScenarioInstance, ScenarioSpec, default_specs
from .survival import SurvivalParams

FORMAT_VERSION = 1
TRAJ_HEADER = ("t", "x", "y", "vx", "vy")
TRAJ_UNITS = "# units: t s, x m, y m, vx m/s, vy m/s"
TRACE_HEADER = ("t", "measure", "R")
TRACE_UNITS = "# units: t s (relative to the event), R dimensionless; empty R = not applicable"
STATS_HEADER = ("measure", "kind", "case", "t_d", "sigma_t", "R_max", "sigma_R", "FP", "N")

PARAM_TYPES: dict[str, type] = {
    "TTC": TtceParams,
    "TTCE": TtceParams,
    "Gauss": GaussParams,
    "SA": SurvivalParams,
}


class ConfigError(RiskHorizonError):
    """A config or manifest file is malformed. The message names line or field."""


# -- low-level helpers -------------------------------------------------------


def atomic_write(path: str | os.PathLike, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def fmt(x: float | None) -> str:
    """Round-trip float text; empty for ``None`` and NaN."""
    if x is None or (isinstance(x, float) and math.isnan(x)):
        return ""
    return repr(float(x))


def _csv_text(rows: Iterable[Iterable[Any]], comment: str | None = None) -> str:
    buf = io.StringIO()
    if comment:
        buf.write(comment + "\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerows(rows)
    return buf.getvalue()


def _read_csv(path: Path, header: tuple[str, ...]) -> list[list[str]]:
    with open(path, encoding="utf-8", newline="") as fh:
        lines = [ln for ln in fh if not ln.startswith("#")]
    rows = list(csv.reader(lines))
    if not rows or tuple(rows[0]) != header:
        raise ConfigError(f"{path}: expected header {','.join(header)}")
    return rows[1:]


def dump_json(obj: Any) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def load_json(path: str | os.PathLike) -> Any:
    text = Path(path).read_text(encoding="utf-8")
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from None


# -- scenario specs ------------------------------------------------------------


def specs_from_config(cfg: Any, source: str = "config") -> list[ScenarioSpec]:
    """Specs from a parsed scenario config.

    Accepted shapes: a list of spec objects; ``{"specs": [...]}``; or
    ``{"default": {"seed": 0, "per_kind": 7}}`` for the generated set.
    """
    if isinstance(cfg, dict) and "default" in cfg:
        extra = set(cfg) - {"default"}
        if extra:
            raise ConfigError(f"{source}: unknown top-level field(s) {sorted(extra)}")
        d = cfg["default"] or {}
        if not isinstance(d, dict) or set(d) - {"seed", "per_kind"}:
            raise ConfigError(f"{source}: 'default' takes only 'seed' and 'per_kind'")
        try:
            return default_specs(int(d.get("seed", 0)), int(d.get("per_kind", 7)))
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"{source}: default: {exc}") from None
    if isinstance(cfg, dict):
        extra = set(cfg) - {"specs"}
        if extra or "specs" not in cfg:
            raise ConfigError(f"{source}: expected a list of specs or an object with 'specs'")
        cfg = cfg["specs"]
    if not isinstance(cfg, list):
        raise ConfigError(f"{source}: 'specs' must be a list")
    specs, names = [], set()
    for i, item in enumerate(cfg):
        if not isinstance(item, dict):
            raise ConfigError(f"{source}: specs[{i}] must be an object")
        try:
            spec = ScenarioSpec.from_dict(item)
        except SpecError as exc:
            raise ConfigError(f"{source}: specs[{i}]: {exc}") from None
        if spec.name in names:
            raise ConfigError(f"{source}: specs[{i}]: duplicate name {spec.name!r}")
        names.add(spec.name)
        specs.append(spec)
    return specs


# -- trajectories and instance manifests --------------------------------------


def trajectory_csv(traj: Trajectory) -> str:
    rows = [TRAJ_HEADER]
    for t, (x, y), (vx, vy) in zip(traj.times, traj.positions, traj.velocities):
        rows.append((fmt(t), fmt(x), fmt(y), fmt(vx), fmt(vy)))
    return _csv_text(rows, TRAJ_UNITS)


def read_trajectory(path: Path, participant_id: str) -> Trajectory:
    rows = _read_csv(path, TRAJ_HEADER)
    try:
        data = np.array([[float(v) for v in r] for r in rows], dtype=float)
    except ValueError as exc:
        raise ConfigError(f"{path}: {exc}") from None
    if data.ndim != 2 or len(data) < 2:
        raise ConfigError(f"{path}: needs at least two samples")
    return Trajectory(participant_id, data[:, 0], data[:, 1:3], data[:, 3:5])


def write_instances(instances: list[ScenarioInstance], out: Path) -> Path:
    """Two trajectory CSVs per instance plus ``manifest.json``."""
    entries = []
    for inst in instances:
        files = {}
        for pid, traj in (("a", inst.traj_a), ("b", inst.traj_b)):
            fname = f"{inst.name}_{pid}.csv"
            atomic_write(out / fname, trajectory_csv(traj))
            files[pid] = fname
        entries.append({"spec": inst.spec.to_dict(), "files": files, "t_event": inst.t_event})
    manifest = out / "manifest.json"
    atomic_write(manifest, dump_json({"version": FORMAT_VERSION, "instances": entries}))
    return manifest


def read_instances(manifest: str | os.PathLike) -> list[ScenarioInstance]:
    """Instances listed in a manifest; trajectories come from the CSV files."""
    manifest = Path(manifest)
    data = load_json(manifest)
    if not isinstance(data, dict) or "instances" not in data:
        raise ConfigError(f"{manifest}: missing 'instances'")
    out = []
    for i, entry in enumerate(data["instances"]):
        where = f"{manifest}: instances[{i}]"
        try:
            spec = ScenarioSpec.from_dict(entry["spec"])
            files = entry["files"]
            trajs = [read_trajectory(manifest.parent / files[p], p) for p in ("a", "b")]
        except KeyError as exc:
            raise ConfigError(f"{where}: missing field {exc}") from None
        except SpecError as exc:
            raise ConfigError(f"{where}.spec: {exc}") from None
        out.append(ScenarioInstance(spec, *trajs, t_event=float(entry.get("t_event", 0.0))))
    return out


# -- traces -------------------------------------------------------------------


def trace_csv(trace: RiskTrace) -> str:
    rows = [TRACE_HEADER]
    rows += [(fmt(t), trace.measure, fmt(r)) for t, r in zip(trace.times, trace.values)]
    return _csv_text(rows, TRACE_UNITS)


def read_trace(path: Path, name: str = "") -> RiskTrace:
    rows = _read_csv(path, TRACE_HEADER)
    if not rows:
        raise ConfigError(f"{path}: no samples")
    measures = {r[1] for r in rows}
    if len(measures) != 1:
        raise ConfigError(f"{path}: one measure per file expected, got {sorted(measures)}")
    t = np.array([float(r[0]) for r in rows])
    v = np.array([float(r[2]) if r[2] else math.nan for r in rows])
    return RiskTrace(measures.pop(), t, v, name)


def write_traces(
    items: list[tuple[ScenarioInstance, RiskTrace]], out: Path, settings: Mapping[str, Any]
) -> Path:
    entries = []
    for inst, trace in items:
        fname = f"{inst.name}__{trace.measure}.csv"
        atomic_write(out / fname, trace_csv(trace))
        entries.append(
            {
                "instance": inst.name,
                "kind": inst.spec.kind,
                "case": inst.spec.case,
                "measure": trace.measure,
                "file": fname,
            }
        )
    manifest = out / "traces.json"
    atomic_write(
        manifest,
        dump_json({"version": FORMAT_VERSION, "settings": dict(settings), "traces": entries}),
    )
    return manifest


def read_traces(manifest: str | os.PathLike) -> list[tuple[dict, RiskTrace]]:
    manifest = Path(manifest)
    data = load_json(manifest)
    if not isinstance(data, dict) or "traces" not in data:
        raise ConfigError(f"{manifest}: missing 'traces'")
    out = []
    for i, entry in enumerate(data["traces"]):
        try:
            trace = read_trace(manifest.parent / entry["file"], entry["instance"])
            meta = {k: entry[k] for k in ("instance", "kind", "case", "measure")}
        except KeyError as exc:
            raise ConfigError(f"{manifest}: traces[{i}]: missing field {exc}") from None
        if trace.measure != meta["measure"]:
            raise ConfigError(f"{manifest}: traces[{i}]: file holds {trace.measure}")
        out.append((meta, trace))
    return out


# -- statistics -----------------------------------------------------------------


def stats_csv(rows: list[DetectionStats]) -> str:
    lines = [STATS_HEADER]
    for r in rows:
        lines.append(
            (
                r.measure,
                r.kind,
                r.case,
                fmt(r.t_d_mean),
                fmt(r.sigma_t),
                fmt(r.r_max_mean),
                fmt(r.sigma_r),
                "" if r.fp is None else str(r.fp),
                str(r.n),
            )
        )
    return _csv_text(lines)


# -- measure parameters ---------------------------------------------------------


def params_to_json(params: Mapping[str, MeasureParams]) -> dict:
    out = {}
    for m, p in params.items():
        d = asdict(p)
        if isinstance(p, GaussParams):
            d.pop("alpha")
        out[m] = d
    return out


def params_from_json(data: Any, source: str = "params") -> dict[str, MeasureParams]:
    if not isinstance(data, dict):
        raise ConfigError(f"{source}: expected an object keyed by measure")
    out: dict[str, MeasureParams] = {}
    for m, values in data.items():
        if m not in PARAM_TYPES:
            raise ConfigError(f"{source}: unknown measure {m!r}; expected one of {MEASURES}")
        cls = PARAM_TYPES[m]
        allowed = {f.name for f in fields(cls) if f.init}
        if not isinstance(values, dict):
            raise ConfigError(f"{source}.{m}: expected an object")
        unknown = set(values) - allowed
        if unknown:
            raise ConfigError(f"{source}.{m}: unknown field(s) {sorted(unknown)}")
        try:
            out[m] = cls(**{k: None if v is None else float(v) for k, v in values.items()})
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"{source}.{m}: {exc}") from None
    return out
