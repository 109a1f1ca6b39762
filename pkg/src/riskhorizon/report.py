"""PNG figures for trace sets and summary tables.

Figures are drawn on ``matplotlib.figure.Figure`` with the Agg canvas, so no
display or global pyplot state is involved. Output files carry no timestamp
metadata.
"""

from __future__ import annotations

from collections import defaultdict
from pathlib import Path
from typing import Iterable

import numpy as np
from matplotlib.backends.backend_agg import FigureCanvasAgg
from matplotlib.figure import Figure

from .evaluation import DEFAULT_RTH, MEASURES, DetectionStats, RiskTrace
from .scenarios import KINDS

STYLE = {
    "TTC": dict(color="0.45", linestyle=":"),
    "TTCE": dict(color="tab:blue", linestyle="--"),
    "Gauss": dict(color="tab:orange", linestyle="-."),
    "SA": dict(color="tab:green", linestyle="-"),
}


def _save(fig: Figure, path: Path) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    FigureCanvasAgg(fig)
    fig.savefig(path, dpi=120, metadata={"Software": None})
    return path


def plot_traces(
    instance: str, traces: Iterable[RiskTrace], path: Path, r_th: float = DEFAULT_RTH
) -> Path:
    """Risk over scene time for every measure of one instance."""
    fig = Figure(figsize=(6.0, 3.4))
    ax = fig.add_subplot()
    for tr in sorted(traces, key=lambda t: MEASURES.index(t.measure)):
        ax.plot(tr.times, tr.values, label=tr.measure, **STYLE.get(tr.measure, {}))
    ax.axhline(r_th, color="crimson", linewidth=0.8, label=f"R_th = {r_th:g}")
    ax.set_xlabel("t - t_event [s]")
    ax.set_ylabel("risk R")
    ax.set_ylim(-0.02, 1.02)
    ax.set_title(instance, fontsize=10)
    ax.grid(alpha=0.3)
    ax.legend(fontsize=8, loc="upper left")
    fig.tight_layout()
    return _save(fig, path)


def plot_summary(rows: list[DetectionStats], path: Path) -> Path:
    """Mean detection time on crashes (left) and false positives (right)."""
    measures = [m for m in MEASURES if any(r.measure == m for r in rows)]
    x = np.arange(len(KINDS))
    width = 0.8 / max(len(measures), 1)
    fig = Figure(figsize=(8.0, 3.4))
    ax_t, ax_fp = fig.subplots(1, 2)
    fp = defaultdict(int)
    n_other = defaultdict(int)
    for k, m in enumerate(measures):
        t_d = np.full(len(KINDS), np.nan)
        sig = np.zeros(len(KINDS))
        for r in rows:
            if r.measure != m:
                continue
            if r.case == "crash" and r.t_d_mean is not None:
                i = KINDS.index(r.kind)
                t_d[i], sig[i] = r.t_d_mean, r.sigma_t
            elif r.fp is not None:
                fp[m] += r.fp
                n_other[m] += r.n
        ax_t.bar(x + k * width, t_d, width, yerr=sig, label=m, color=STYLE[m]["color"])
    ax_t.set_xticks(x + width * (len(measures) - 1) / 2, KINDS)
    ax_t.set_ylabel("mean t_d [s] (crash)")
    ax_t.axhline(0.0, color="black", linewidth=0.6)
    ax_t.legend(fontsize=8)
    fp_measures = [m for m in measures if n_other[m]]
    ax_fp.bar(fp_measures, [fp[m] for m in fp_measures], color=[STYLE[m]["color"] for m in fp_measures])
    ax_fp.set_ylabel("false positives (near + non-crash)")
    for i, m in enumerate(fp_measures):
        ax_fp.annotate(f"{fp[m]}/{n_other[m]}", (i, fp[m]), ha="center", va="bottom", fontsize=8)
    fig.tight_layout()
    return _save(fig, path)


def render(
    traces: list[tuple[dict, RiskTrace]],
    rows: list[DetectionStats],
    out: Path,
    r_th: float = DEFAULT_RTH,
) -> list[Path]:
    """One trace figure per instance plus ``summary.png``; returns the paths."""
    by_instance: dict[str, list[RiskTrace]] = defaultdict(list)
    order = []
    for meta, tr in traces:
        if meta["instance"] not in by_instance:
            order.append(meta["instance"])
        by_instance[meta["instance"]].append(tr)
    paths = [plot_traces(name, by_instance[name], out / f"{name}.png", r_th) for name in order]
    paths.append(plot_summary(rows, out / "summary.png"))
    return paths

