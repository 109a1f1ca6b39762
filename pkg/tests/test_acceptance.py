"""Acceptance criteria 1-10, one PASS/FAIL line each.

Run with ``pytest tests/test_acceptance.py -v``; the lines are repeated in
the "acceptance criteria" section of the terminal summary.
"""

import time
from pathlib import Path

import numpy as np
import pytest

from riskhorizon import storage
from riskhorizon.calibration import CALIBRATED_MEASURES, calibrate
from riskhorizon.cli import main
from riskhorizon.evaluation import MEASURES, TraceInputs, compute_trace, detect, evaluate, trace_values
from riskhorizon.kinematics import (
    V_EPS,
    DistanceProfile,
    RelativeState,
    Trajectory,
    closest_encounter,
    predicted_distances,
    prediction_grid,
    sin_angle,
)
from riskhorizon.measures import GaussParams, TtceParams, risk_gauss, risk_ttc, risk_ttce
from riskhorizon.scenarios import ScenarioInstance, ScenarioSpec, default_specs, generate_all
from riskhorizon.validation import (
    check_encounter,
    check_gaussian,
    check_normalization,
    check_survival,
    random_relative_states,
)

R_TH = 0.7


def test_criterion_1_geometry_oracle(criterion):
    res = check_encounter(n=1000, seed=0, tol_s=1e-3, tol_d=1e-6)
    ok = res.passed and res.seconds < 5.0
    criterion("1", ok, f"{res.detail}; {res.seconds:.2f} s (limit 5 s)")


def test_criterion_2_sine_identity(criterion):
    rel = random_relative_states(1000, seed=0)
    dx, dv = rel.delta_x, rel.delta_v
    approaching = (np.sum(dv * dv, axis=1) >= V_EPS) & (np.sum(dx * dv, axis=1) < 0)
    d_e = closest_encounter(rel).d_e[approaching]
    expected = (np.linalg.norm(dx, axis=1) * sin_angle(rel))[approaching]
    worst = float(np.max(np.abs(d_e - expected) / np.abs(expected)))
    criterion("2", worst <= 1e-9, f"{approaching.sum()} approaching cases, worst relative error {worst:.1e} (tol 1e-9)")


def test_criterion_3_gaussian_overlap(criterion):
    res = check_gaussian(n=50, seed=0, samples=1_000_000, n_se=3.0)
    criterion("3", res.passed and res.seconds < 30.0, f"{res.detail}; {res.seconds:.1f} s (limit 30 s)")


def test_criterion_4_normalization(criterion):
    res = check_normalization(n=20, seed=0, step=1e-3, tol=1e-4)
    criterion("4", res.passed, res.detail)


def test_criterion_5_closed_form_sa(criterion):
    res = check_survival(0.2, 0.8, samples=1_000_000, seed=0, tol=1e-3, n_se=3.0)
    criterion("5", res.passed and res.seconds < 60.0, f"{res.detail}; {res.seconds:.1f} s (limit 60 s)")


def _receding_instance():
    # b 100 m ahead and pulling away at 5 m/s
    spec = ScenarioSpec("longitudinal", "non_crash", (10.0, 15.0))
    times = np.arange(-275, 1) * 0.02
    a_pos = np.column_stack([10.0 * times, np.zeros_like(times)])
    b_pos = np.column_stack([100.0 + 15.0 * times, np.zeros_like(times)])
    a = Trajectory("a", times, a_pos, np.tile([10.0, 0.0], (len(times), 1)))
    b = Trajectory("b", times, b_pos, np.tile([15.0, 0.0], (len(times), 1)))
    return ScenarioInstance(spec, a, b)


def test_criterion_6_limit_contracts(criterion, default_set, calibrated):
    crashes = [i for i in default_set if i.spec.case == "crash"]
    receding = TraceInputs(_receding_instance())
    low, high, parts = {}, {}, []
    for m in MEASURES:
        before = []
        for inst in crashes:
            v = compute_trace(inst, m, calibrated[m]).values
            if not np.isnan(v[-2]):
                before.append(v[-2])
        low[m] = min(before)
        r = trace_values(receding, m, calibrated[m])
        high[m] = float(r[-1]) if not np.isnan(r[-1]) else 0.0
        parts.append(f"{m} min R(-dt) {low[m]:.4f} over {len(before)}, receding {high[m]:.2g}")
    ok = all(v >= 0.99 for v in low.values()) and all(v <= 0.05 for v in high.values())
    criterion("6", ok, "; ".join(parts) + " (need >= 0.99 and <= 0.05)")


def test_criterion_7_ttc_reduction(criterion):
    rng = np.random.Generator(np.random.Philox(7))
    angle = rng.uniform(0, 2 * np.pi, 1000)
    u = np.column_stack([np.cos(angle), np.sin(angle)])
    gap = rng.uniform(0.5, 150.0, 1000)[:, None]
    closing = rng.uniform(0.1, 40.0, 1000)[:, None]
    rel = RelativeState(gap * u, -closing * u)
    enc = closest_encounter(rel)
    ttce = risk_ttce(enc, _ttce_params())
    ttc = risk_ttc(gap[:, 0] / closing[:, 0], _ttce_params())
    worst = float(np.max(np.abs(ttce - ttc) / ttc))
    criterion("7", worst <= 1e-12, f"1000 collinear closing cases, worst relative gap {worst:.1e} (tol 1e-12)")


def _ttce_params():
    return TtceParams(epsilon=0.8, alpha=1.5, d_c=0.6)


def test_criterion_8_gauss_argmax_convergence(criterion):
    # slow crash course: 5 m gap closing at 1 m/s, s_e = 5 s
    rel = RelativeState(np.array([4.0, 3.0]), np.array([-0.8, -0.6]))
    step = 0.02
    s = prediction_grid(6.0, step)
    prof = DistanceProfile(s, predicted_distances(rel, s))
    s_ttce = closest_encounter(rel).s_e
    gaps, d_c = [], 1.0
    for _ in range(9):
        _, s_g = risk_gauss(prof, GaussParams(d1=d_c / 2, d2=d_c / 2))
        gaps.append(abs(float(s_g) - s_ttce))
        d_c /= 2
    ok = all(b <= a + 1e-12 for a, b in zip(gaps, gaps[1:])) and gaps[-1] < step
    criterion("8", ok, "gaps " + ", ".join(f"{g:.3g}" for g in gaps) + f" s; final < step {step}")


@pytest.fixture(scope="module")
def pipeline():
    """Generate, calibrate and evaluate the default set from scratch, timed."""
    start = time.perf_counter()
    instances = generate_all(default_specs(seed=0))
    inputs = {i.name: TraceInputs(i) for i in instances}
    results = {m: calibrate(instances, m, inputs=inputs) for m in CALIBRATED_MEASURES}
    params = {m: r.params for m, r in results.items()}
    params["TTC"] = params["TTCE"]
    ev = evaluate(instances, params)
    seconds = time.perf_counter() - start
    crash = {m: [detect(t, R_TH) for (mm, _, c), ts in ev.traces.items() if mm == m and c == "crash" for t in ts] for m in ("TTCE", "Gauss", "SA")}
    fp = {m: sum(int(t.r_max > R_TH) for (mm, _, c), ts in ev.traces.items() if mm == m and c != "crash" for t in ts) for m in ("TTCE", "Gauss", "SA")}
    return results, crash, fp, seconds


def test_criterion_9a_detection_time_order(criterion, pipeline):
    results, crash, _, _ = pipeline
    assert all(r.feasible for r in results.values())
    mean = {m: float(np.mean([abs(t) for t in v if t is not None])) for m, v in crash.items()}
    ok = mean["SA"] >= mean["Gauss"] >= mean["TTCE"]
    detail = ", ".join(f"{m} {mean[m]:.3f} s" for m in ("SA", "Gauss", "TTCE"))
    criterion("9(a)", ok, f"mean |t_d| {detail} (need SA >= Gauss >= TTCE)")


def test_criterion_9b_false_positives(criterion, pipeline):
    _, _, fp, _ = pipeline
    ok = fp["SA"] <= fp["Gauss"] and fp["SA"] <= fp["TTCE"]
    criterion("9(b)", ok, f"total FP SA {fp['SA']}, Gauss {fp['Gauss']}, TTCE {fp['TTCE']} (need SA <= both)")


def test_criterion_9c_every_crash_detected(criterion, pipeline):
    _, crash, _, _ = pipeline
    bad = {m: sum(t is None or t >= 0 for t in v) for m, v in crash.items()}
    ok = not any(bad.values())
    n = len(next(iter(crash.values())))
    criterion("9(c)", ok, f"{n} crashes per measure, late or missed: " + ", ".join(f"{m} {k}" for m, k in bad.items()))


def test_criterion_9_runtime(criterion, pipeline):
    seconds = pipeline[3]
    criterion("9(runtime)", seconds < 120.0, f"generate + calibrate + evaluate {seconds:.1f} s (limit 120 s)")


def _gen_run_stats(root: Path, params: Path) -> list[Path]:
    assert main(["gen", "--seed", "0", "--out", str(root / "scen")]) == 0
    assert main(["run", str(root / "scen" / "manifest.json"), "--params", str(params), "--out", str(root / "traces")]) == 0
    assert main(["stats", str(root / "traces" / "traces.json"), "--out", str(root / "stats.csv")]) == 0
    return sorted(p.relative_to(root) for p in root.rglob("*.csv"))


def test_criterion_10_determinism(criterion, tmp_path, calibrated):
    params = tmp_path / "params.json"
    params.write_text(storage.dump_json(storage.params_to_json(calibrated)))
    first = _gen_run_stats(tmp_path / "one", params)
    second = _gen_run_stats(tmp_path / "two", params)
    same = first == second and all(
        (tmp_path / "one" / p).read_bytes() == (tmp_path / "two" / p).read_bytes() for p in first
    )
    criterion("10", same, f"{len(first)} CSV files compared byte for byte")
