"""Closed form vs. oracle comparisons on seeded random inputs.

Each check returns a ``CheckResult`` with the worst observed deviation, so
the same code backs the ``oracle`` CLI subcommand and the test suite.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np

from .kinematics import RelativeState, closest_encounter
from .measures import gaussian_product
from .oracle import OracleConfig, brute_force_encounter, mc_gaussian_overlap, mc_survival
from .survival import RateProfile, integrate_survival, risk_from_rates


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str
    seconds: float

    def line(self) -> str:
        return f"{'PASS' if self.passed else 'FAIL'}  {self.name}: {self.detail} ({self.seconds:.2f} s)"


def random_relative_states(n: int = 1000, seed: int = 0) -> RelativeState:
    """Offsets within 50 m per axis, relative speeds 0.5 to 20 m/s in any direction."""
    rng = np.random.Generator(np.random.Philox(seed))
    dx = rng.uniform(-50.0, 50.0, size=(n, 2))
    angle = rng.uniform(0.0, 2.0 * math.pi, size=n)
    speed = rng.uniform(0.5, 20.0, size=n)
    dv = np.stack([speed * np.cos(angle), speed * np.sin(angle)], axis=1)
    return RelativeState(dx, dv)


def check_encounter(
    n: int = 1000, seed: int = 0, tol_s: float = 1e-3, tol_d: float = 1e-6
) -> CheckResult:
    t0 = time.perf_counter()
    rel = random_relative_states(n, seed)
    cf = closest_encounter(rel)
    bf = brute_force_encounter(rel, OracleConfig(grid_step=1e-3))
    ds = float(np.max(np.abs(cf.s_e - bf.s_e)))
    dd = float(np.max(np.abs(cf.d_e - bf.d_e)))
    return CheckResult(
        "encounter",
        ds <= tol_s and dd <= tol_d,
        f"{n} states, max |ds_e| = {ds:.2e} s (tol {tol_s:g}), max |dd_e| = {dd:.2e} m (tol {tol_d:g})",
        time.perf_counter() - t0,
    )


def random_gaussian_pairs(n: int = 50, seed: int = 0) -> np.ndarray:
    """Rows ``(mu1, var1, mu2, var2)`` with means in [-3, 3] and variances in [0.1, 4]."""
    rng = np.random.Generator(np.random.Philox(seed))
    mu = rng.uniform(-3.0, 3.0, size=(n, 2))
    var = rng.uniform(0.1, 4.0, size=(n, 2))
    return np.column_stack([mu[:, 0], var[:, 0], mu[:, 1], var[:, 1]])


def check_gaussian(
    n: int = 50, seed: int = 0, samples: int = 1_000_000, n_se: float = 3.0
) -> CheckResult:
    t0 = time.perf_counter()
    worst = 0.0
    for k, (m1, v1, m2, v2) in enumerate(random_gaussian_pairs(n, seed)):
        exact = gaussian_product(m1, v1, m2, v2).s_c
        est, se = mc_gaussian_overlap(m1, v1, m2, v2, OracleConfig(mc_samples=samples, rng_seed=seed + k))
        worst = max(worst, abs(est - exact) / se)
    return CheckResult(
        "gaussian",
        worst <= n_se,
        f"{n} pairs, worst deviation {worst:.2f} standard errors (tol {n_se:g})",
        time.perf_counter() - t0,
    )


def check_survival(
    escape: float = 0.2,
    critical: float = 0.8,
    samples: int = 1_000_000,
    seed: int = 0,
    tol: float = 1e-3,
    n_se: float = 3.0,
) -> CheckResult:
    """Constant rates: quadrature and simulation against ``critical / (escape + critical)``."""
    t0 = time.perf_counter()
    total = escape + critical
    horizon = 25.0 / total
    expected = critical / total
    quad = risk_from_rates(RateProfile.constant(escape, critical, horizon, 1e-3))
    mc_step = min(0.1 / total, 0.01)
    est, se = mc_survival(
        RateProfile.constant(escape, critical, horizon, mc_step),
        OracleConfig(mc_samples=samples, rng_seed=seed),
    )
    ok = abs(quad - expected) <= tol and abs(est - expected) <= n_se * se
    return CheckResult(
        "survival",
        ok,
        f"expected {expected:.6f}, quadrature {quad:.6f} (tol {tol:g}), "
        f"simulation {est:.5f} +- {se:.1e} (tol {n_se:g} SE)",
        time.perf_counter() - t0,
    )


def check_normalization(n: int = 20, seed: int = 0, step: float = 1e-3, tol: float = 1e-4) -> CheckResult:
    """Accumulated event probability plus the survival tail equals 1 for constant rates."""
    t0 = time.perf_counter()
    rng = np.random.Generator(np.random.Philox(seed))
    worst = 0.0
    for _ in range(n):
        escape = float(rng.uniform(0.05, 2.0))
        critical = float(rng.uniform(0.0, 20.0))
        rates = RateProfile.constant(escape, critical, 20.0 / (escape + critical), step)
        curve = integrate_survival(rates)
        worst = max(worst, abs(curve.accumulated[-1] + curve.survival[-1] - 1.0))
    return CheckResult(
        "normalization",
        worst <= tol,
        f"{n} constant-rate profiles, max |A + S_tail - 1| = {worst:.2e} (tol {tol:g})",
        time.perf_counter() - t0,
    )


CHECKS = {
    "encounter": check_encounter,
    "gaussian": check_gaussian,
    "survival": check_survival,
    "normalization": check_normalization,
}
