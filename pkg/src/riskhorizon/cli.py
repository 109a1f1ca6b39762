"""Command-line front end.

    riskhorizon gen [--config SPECS.json] [--seed N] --out DIR
    riskhorizon run MANIFEST [--params P.json] [--measures ...] [--horizon S] --out DIR
    riskhorizon stats TRACES.json [--rth R] --out STATS.csv [--figures DIR]
    riskhorizon calibrate MANIFEST [--measures ...] [--near-bound B] --out P.json
    riskhorizon oracle {encounter,gaussian,survival,normalization,all}

``run`` also accepts ``--config RUN.json`` holding any of ``manifest``,
``measures``, ``params``, ``rth``, ``horizon``, ``out``; flags on the
command line win. Exit status is 0 only when every requested output was
written and every oracle check passed.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Callable, Iterable, Sequence, TypeVar

import numpy as np

from . import report, storage
from .calibration import (
    CALIBRATED_MEASURES,
    DEFAULT_MAX_FP,
    DEFAULT_NEAR_BOUND,
    calibrate,
)
from .errors import RiskHorizonError
from .evaluation import (
    DEFAULT_HORIZON,
    DEFAULT_RTH,
    MEASURES,
    DetectionStats,
    TraceInputs,
    aggregate,
    compute_trace,
    default_params,
)
from .scenarios import CASES, KINDS, generate
from .storage import ConfigError
from .validation import CHECKS

log = logging.getLogger("riskhorizon")

T = TypeVar("T")
R = TypeVar("R")

RUN_KEYS = {"manifest", "measures", "params", "rth", "horizon", "out"}


def n_threads() -> int:
    raw = os.environ.get("RISKHORIZON_THREADS", "")
    if raw.strip():
        try:
            n = int(raw)
        except ValueError:
            raise ConfigError(f"RISKHORIZON_THREADS must be an integer, got {raw!r}") from None
        if n < 1:
            raise ConfigError("RISKHORIZON_THREADS must be >= 1")
        return n
    return min(8, os.cpu_count() or 1)


def pmap(fn: Callable[[T], R], items: Iterable[T]) -> list[R]:
    """Ordered map over a thread pool capped by ``RISKHORIZON_THREADS``."""
    items = list(items)
    n = n_threads()
    if n == 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))


def _measures(raw: str | Sequence[str] | None, default: Sequence[str]) -> list[str]:
    if raw is None:
        return list(default)
    names = raw.split(",") if isinstance(raw, str) else list(raw)
    names = [n.strip() for n in names if n.strip()]
    bad = [n for n in names if n not in MEASURES]
    if bad or not names:
        raise ConfigError(f"unknown measure(s) {bad}; choose from {', '.join(MEASURES)}")
    return names


def _check_rth(r_th: float) -> float:
    if not 0 < r_th < 1:
        raise ConfigError(f"--rth must lie strictly between 0 and 1, got {r_th}")
    return r_th


def _load_params(path: str | None) -> dict:
    params = default_params()
    if path:
        loaded = storage.params_from_json(storage.load_json(path), source=str(path))
        params.update(loaded)
        if "TTCE" in loaded and "TTC" not in loaded:
            params["TTC"] = loaded["TTCE"]
    return params


# -- subcommands ----------------------------------------------------------------


def cmd_gen(args) -> int:
    if args.config:
        specs = storage.specs_from_config(storage.load_json(args.config), source=args.config)
    else:
        specs = storage.specs_from_config({"default": {"seed": args.seed}})
    if not specs:
        log.error("spec list is empty; nothing generated")
        return 1
    instances = pmap(generate, specs)
    manifest = storage.write_instances(instances, Path(args.out))
    print(f"wrote {len(instances)} instances ({2 * len(instances)} trajectory files) and {manifest}")
    return 0


def _run_settings(args) -> dict:
    cfg = {}
    if args.config:
        cfg = storage.load_json(args.config)
        if not isinstance(cfg, dict):
            raise ConfigError(f"{args.config}: expected an object")
        unknown = set(cfg) - RUN_KEYS
        if unknown:
            raise ConfigError(f"{args.config}: unknown field(s) {sorted(unknown)}")
        base = Path(args.config).parent
        for key in ("manifest", "params", "out"):
            if cfg.get(key):
                cfg[key] = str(base / cfg[key])
    merged = {
        "manifest": args.manifest or cfg.get("manifest"),
        "measures": _measures(args.measures or cfg.get("measures"), MEASURES),
        "params": args.params or cfg.get("params"),
        "horizon": float(args.horizon if args.horizon is not None else cfg.get("horizon", DEFAULT_HORIZON)),
        "out": args.out or cfg.get("out"),
        "rth": _check_rth(float(args.rth if args.rth is not None else cfg.get("rth", DEFAULT_RTH))),
    }
    for key in ("manifest", "out"):
        if not merged[key]:
            raise ConfigError(f"run needs a {key} (argument or config field)")
    if not merged["horizon"] > 0:
        raise ConfigError("horizon must be positive")
    return merged


def cmd_run(args) -> int:
    s = _run_settings(args)
    instances = storage.read_instances(s["manifest"])
    params = _load_params(s["params"])

    def one(inst):
        inputs = TraceInputs(inst, s["horizon"])
        out = []
        for m in s["measures"]:
            tr = compute_trace(inputs, m, params[m])
            if m == "TTC" and np.any(np.isnan(tr.values)):
                log.info("%s: TTC not applicable throughout, no trace written", inst.name)
                continue
            out.append((inst, tr))
        return out

    items = [pair for group in pmap(one, instances) for pair in group]
    settings = {
        "rth": s["rth"],
        "horizon": s["horizon"],
        "measures": s["measures"],
        "params": storage.params_to_json({m: params[m] for m in s["measures"]}),
    }
    manifest = storage.write_traces(items, Path(s["out"]), settings)
    print(f"wrote {len(items)} traces and {manifest}")
    return 0


def cmd_stats(args) -> int:
    traces = storage.read_traces(args.traces)
    if args.rth is None:
        args.rth = storage.load_json(args.traces).get("settings", {}).get("rth", DEFAULT_RTH)
    r_th = _check_rth(float(args.rth))
    if not traces:
        log.error("%s lists no traces", args.traces)
        return 1
    groups: dict = {}
    for meta, tr in traces:
        groups.setdefault((meta["measure"], meta["kind"], meta["case"]), []).append(tr)
    rows = {(r.measure, r.kind, r.case): r for r in aggregate(groups, r_th)}
    present = [m for m in MEASURES if any(key[0] == m for key in groups)]
    # groups without traces (TTC off the collinear cases) keep their row, N = 0
    rows = [
        rows.get((m, k, c)) or DetectionStats(m, k, c, 0)
        for m in present
        for k in KINDS
        for c in CASES
    ]
    for r in rows:
        if r.misses:
            log.warning("%s %s crash: %d of %d never detected", r.measure, r.kind, r.misses, r.n)
    storage.atomic_write(args.out, storage.stats_csv(rows))
    print(f"wrote {len(rows)} rows to {args.out}")
    if args.figures:
        paths = report.render(traces, rows, Path(args.figures), r_th)
        print(f"wrote {len(paths)} figures to {args.figures}")
    return 0


def cmd_calibrate(args) -> int:
    r_th = _check_rth(args.rth)
    instances = storage.read_instances(args.manifest)
    measures = _measures(args.measures, CALIBRATED_MEASURES)
    if "TTC" in measures:
        raise ConfigError("TTC takes the TTCE constants; calibrate TTCE instead")
    inputs: dict = {}
    params = {}
    ok = True
    for m in measures:
        res = calibrate(
            instances,
            m,
            r_th=r_th,
            near_bound=args.near_bound,
            max_fp=args.max_fp,
            horizon=args.horizon,
            inputs=inputs,
        )
        print(res.report())
        if res.feasible:
            params[m] = res.params
        else:
            ok = False
    if not ok:
        log.error("calibration infeasible for at least one measure; no parameter file written")
        return 1
    if "TTCE" in params:
        params["TTC"] = params["TTCE"]
    storage.atomic_write(args.out, storage.dump_json(storage.params_to_json(params)))
    print(f"wrote {args.out}")
    return 0


def cmd_oracle(args) -> int:
    names = list(CHECKS) if args.name == "all" else [args.name]
    kwargs = {"seed": args.seed}
    ok = True
    for name in names:
        extra = dict(kwargs)
        if args.samples and name in ("gaussian", "survival"):
            extra["samples"] = args.samples
        res = CHECKS[name](**extra)
        print(res.line())
        ok &= res.passed
    return 0 if ok else 1


# -- entry point ------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="riskhorizon", description=__doc__.split("\n\n")[0])
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress details")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate scenario trajectories")
    p.add_argument("--config", help="scenario spec JSON (list, {'specs': [...]}, or {'default': {...}})")
    p.add_argument("--seed", type=int, default=0, help="seed of the default set (ignored with --config)")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("run", help="compute risk traces")
    p.add_argument("manifest", nargs="?", help="instance manifest written by gen")
    p.add_argument("--config", help="run config JSON")
    p.add_argument("--params", help="parameter JSON (e.g. from calibrate)")
    p.add_argument("--measures", help=f"comma-separated subset of {','.join(MEASURES)}")
    p.add_argument("--horizon", type=float, help=f"prediction horizon in s (default {DEFAULT_HORIZON:g})")
    p.add_argument("--rth", type=float, help="threshold recorded for stats (default 0.7)")
    p.add_argument("--out", help="output directory")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("stats", help="aggregate traces into the summary table")
    p.add_argument("traces", help="traces.json written by run")
    p.add_argument("--rth", type=float,
                   help=f"detection threshold (default: the run's, else {DEFAULT_RTH:g})")
    p.add_argument("--out", required=True, help="statistics CSV path")
    p.add_argument("--figures", help="also render PNG figures into this directory")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("calibrate", help="grid-search measure constants")
    p.add_argument("manifest", help="instance manifest written by gen")
    p.add_argument("--measures", help=f"comma-separated subset of {','.join(CALIBRATED_MEASURES)}")
    p.add_argument("--rth", type=float, default=DEFAULT_RTH)
    p.add_argument("--near-bound", type=float, default=DEFAULT_NEAR_BOUND,
                   help="every calibration near-crash must peak above this")
    p.add_argument("--max-fp", type=int, default=DEFAULT_MAX_FP,
                   help="false positives allowed on the held-out half")
    p.add_argument("--horizon", type=float, default=DEFAULT_HORIZON)
    p.add_argument("--out", required=True, help="parameter JSON path")
    p.set_defaults(func=cmd_calibrate)

    p = sub.add_parser("oracle", help="compare closed forms with oracles")
    p.add_argument("name", choices=[*CHECKS, "all"])
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--samples", type=int, help="Monte Carlo sample count")
    p.set_defaults(func=cmd_oracle)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s: %(message)s",
    )
    try:
        return args.func(args)
    except FileNotFoundError as exc:
        log.error("file not found: %s", exc.filename or exc)
        return 2
    except RiskHorizonError as exc:
        log.error("%s", exc)
        return 2


if __name__ == "__main__":
    sys.exit(main())
