"""Brute-force and Monte Carlo cross-checks for the closed-form measures.

None of these share code paths with the quantities they check: encounters
come from scanning the distance along a grid, Gaussian overlaps from sampling,
and survival risk from simulating the event process step by step.

Random numbers come from numpy's counter-based Philox generator so a seed
fixes the result on every platform numpy supports.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import StepTooCoarseError, VarianceError
from .kinematics import Encounter, RelativeState
from .survival import RateProfile

_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0
_CHUNK = 4_000_000  # grid points evaluated per batch


@dataclass(frozen=True)
class OracleConfig:
    grid_step: float = 1e-3
    grid_max: float = 150.0
    mc_samples: int = 1_000_000
    rng_seed: int = 0

    def __post_init__(self):
        if self.grid_step <= 0 or self.grid_max <= 0:
            raise ValueError("grid_step and grid_max must be positive")
        if self.mc_samples < 10_000:
            raise ValueError("mc_samples must be at least 1e4")

    def rng(self) -> np.random.Generator:
        return np.random.Generator(np.random.Philox(self.rng_seed))


def _sq_dist(dx, dv, s):
    px = dx[..., 0] + dv[..., 0] * s
    py = dx[..., 1] + dv[..., 1] * s
    return px * px + py * py


def brute_force_encounter(rel: RelativeState, cfg: OracleConfig = OracleConfig()) -> Encounter:
    """Scan ||dx + dv*s|| over ``[0, grid_max]``, then polish the minimum.

    The coarse argmin brackets the true minimum to one grid step on either
    side; a golden-section search inside that bracket (the squared distance
    is convex in ``s``) brings it to floating-point resolution. Batched
    states are scanned together.
    """
    dx = np.atleast_2d(rel.delta_x)
    dv = np.atleast_2d(rel.delta_v)
    n_grid = int(math.floor(cfg.grid_max / cfg.grid_step)) + 1
    s_grid = np.arange(n_grid) * cfg.grid_step

    k_best = np.empty(len(dx), dtype=int)
    per_batch = max(1, _CHUNK // n_grid)
    for lo in range(0, len(dx), per_batch):
        hi = lo + per_batch
        sq = _sq_dist(dx[lo:hi, None, :], dv[lo:hi, None, :], s_grid[None, :])
        k_best[lo:hi] = np.argmin(sq, axis=1)

    a = s_grid[np.maximum(k_best - 1, 0)]
    b = s_grid[np.minimum(k_best + 1, n_grid - 1)]
    for _ in range(100):
        c = b - _GOLDEN * (b - a)
        d = a + _GOLDEN * (b - a)
        left = _sq_dist(dx, dv, c) <= _sq_dist(dx, dv, d)
        b = np.where(left, d, b)
        a = np.where(left, a, c)
    s_best = 0.5 * (a + b)
    # the polished point must not be worse than the grid point it came from
    s_grid_best = s_grid[k_best]
    use_grid = _sq_dist(dx, dv, s_grid_best) <= _sq_dist(dx, dv, s_best)
    s_best = np.where(use_grid, s_grid_best, s_best)
    d_best = np.sqrt(_sq_dist(dx, dv, s_best))

    if np.ndim(rel.delta_x) == 1:
        return Encounter(float(s_best[0]), float(d_best[0]))
    return Encounter(s_best, d_best)


def mc_gaussian_overlap(
    mu1: float, var1: float, mu2: float, var2: float, cfg: OracleConfig = OracleConfig()
) -> tuple[float, float]:
    """Estimate the overlap integral of two normal densities by sampling.

    Draws from the first density and averages the second density at the
    draws. Returns ``(estimate, standard_error)``.
    """
    if var1 <= 0 or var2 <= 0:
        raise VarianceError("variances must be positive")
    x = cfg.rng().normal(mu1, math.sqrt(var1), size=cfg.mc_samples)
    f2 = np.exp(-((x - mu2) ** 2) / (2.0 * var2)) / math.sqrt(2.0 * math.pi * var2)
    return float(f2.mean()), float(f2.std(ddof=1) / math.sqrt(cfg.mc_samples))


def mc_survival(
    rates: RateProfile, cfg: OracleConfig = OracleConfig(), grid_step: float | None = None
) -> tuple[float, float]:
    """Simulate the escape/critical event process and count critical outcomes.

    Each run walks the look-ahead grid. In every step an event fires with
    probability ``total_rate * step``; a fired event is critical with
    probability ``critical_rate / total_rate``. Runs that reach the end of
    the horizon without an event escape. The population is advanced as a
    whole with binomial draws, which has the same distribution as walking
    ``mc_samples`` runs one by one.

    ``grid_step`` defaults to the rate profile's own step; a finer step
    interpolates the rates linearly. Step rates are the mean of the two
    endpoint rates. Returns ``(risk_estimate, standard_error)``.
    """
    crit_rate = np.asarray(rates.critical_rate, dtype=float)
    if crit_rate.ndim != 1:
        raise ValueError("mc_survival takes a single (unbatched) rate profile")
    s = np.asarray(rates.s_grid, dtype=float)
    if grid_step is not None and not math.isclose(grid_step, rates.step):
        fine = np.arange(int(math.floor(s[-1] / grid_step + 1e-9)) + 1) * grid_step
        crit_rate = np.interp(fine, s, crit_rate)
        s = fine
    h = float(s[1] - s[0])
    crit_step = 0.5 * (crit_rate[1:] + crit_rate[:-1])
    total_step = crit_step + rates.escape_rate
    p_fire = total_step * h
    if np.max(p_fire) > 0.1 + 1e-12:
        raise StepTooCoarseError(
            f"rate * step reaches {np.max(p_fire):.3g}; refine the step below "
            f"{0.1 / np.max(total_step):.3g} s"
        )
    with np.errstate(divide="ignore", invalid="ignore"):
        p_crit = np.where(total_step > 0, crit_step / total_step, 0.0)

    rng = cfg.rng()
    alive = cfg.mc_samples
    critical = 0
    for pf, pc in zip(p_fire, p_crit):
        if alive == 0:
            break
        fired = int(rng.binomial(alive, pf))
        if fired:
            critical += int(rng.binomial(fired, pc)) if pc > 0 else 0
            alive -= fired
    n = cfg.mc_samples
    r = critical / n
    return r, math.sqrt(max(r * (1.0 - r), 0.0) / n)
