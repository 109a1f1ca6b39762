"""Survival-analysis risk: event rates, survival curves and escape accounting.

Events arrive as an inhomogeneous Poisson process whose rate is an escape
rate plus critical (collision) rates driven by the predicted distance. The
risk is the probability that the first event to fire is a critical one.
Predictions stop at the horizon; beyond it the critical rates are taken as
zero, so whatever survival mass remains there counts as escaped.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Mapping

import numpy as np

from .errors import InvalidStepError, ProfileTooShortError
from .kinematics import DistanceProfile, grid_size

RateTerm = Callable[[np.ndarray], np.ndarray]

_GRID_TOL = 1e-9


@dataclass(frozen=True)
class SurvivalParams:
    tau0_inv: float = 0.3
    tau_coll0_inv: float = 20.0
    beta_coll: float = 0.3
    dt_int: float = 0.05
    horizon: float = 6.0

    def __post_init__(self):
        if self.tau0_inv <= 0 or self.tau_coll0_inv <= 0 or self.beta_coll <= 0:
            raise ValueError("rates and beta_coll must be positive")
        if not 0 < self.dt_int <= self.horizon:
            raise InvalidStepError("need 0 < dt_int <= horizon")
        if self.tau_coll0_inv * self.dt_int > 1.0 + 1e-12:
            raise ValueError(
                "tau_coll0_inv * dt_int must not exceed 1 "
                f"(got {self.tau_coll0_inv} * {self.dt_int})"
            )

    @property
    def grid(self) -> np.ndarray:
        return np.arange(grid_size(self.horizon, self.dt_int)) * self.dt_int


@dataclass(frozen=True)
class RateProfile:
    """Critical rate per grid point plus a constant escape rate.

    ``critical_rate`` may carry leading batch axes; ``s_grid`` is 1-D.
    """

    s_grid: np.ndarray
    critical_rate: np.ndarray
    escape_rate: float

    def __post_init__(self):
        if np.any(np.asarray(self.critical_rate) < 0) or self.escape_rate < 0:
            raise ValueError("rates must be non-negative")
        if np.shape(self.critical_rate)[-1] != len(self.s_grid):
            raise ValueError("critical_rate does not match s_grid")

    @property
    def step(self) -> float:
        return float(self.s_grid[1] - self.s_grid[0])

    @property
    def total_rate(self) -> np.ndarray:
        return self.critical_rate + self.escape_rate

    @classmethod
    def constant(cls, escape: float, critical: float, horizon: float, step: float):
        s = np.arange(grid_size(horizon, step)) * step
        return cls(s, np.full(len(s), float(critical)), float(escape))


@dataclass(frozen=True)
class SurvivalCurve:
    s_grid: np.ndarray
    survival: np.ndarray
    event_density: np.ndarray
    accumulated: np.ndarray


def collision_rate(d, p: SurvivalParams):
    """tau_coll0 * exp(-beta * d): the collision event rate at distance ``d``."""
    out = p.tau_coll0_inv * np.exp(-p.beta_coll * np.asarray(d, dtype=float))
    return float(out) if np.ndim(out) == 0 else out


def cumulative_trapezoid(y: np.ndarray, step: float) -> np.ndarray:
    """Running trapezoidal integral along the last axis, starting at 0."""
    y = np.asarray(y, dtype=float)
    out = np.zeros_like(y)
    out[..., 1:] = np.cumsum(0.5 * step * (y[..., 1:] + y[..., :-1]), axis=-1)
    return out


def trapezoid(y: np.ndarray, step: float) -> np.ndarray:
    y = np.asarray(y, dtype=float)
    return step * (y.sum(axis=-1) - 0.5 * (y[..., 0] + y[..., -1]))


def _resample(profile: DistanceProfile, p: SurvivalParams) -> np.ndarray:
    target = p.grid
    if profile.horizon < target[-1] - _GRID_TOL * max(1.0, target[-1]):
        raise ProfileTooShortError(
            f"distance profile ends at {profile.horizon:g} s, horizon is {p.horizon:g} s"
        )
    step = profile.step
    if len(profile.s) < 2 or step <= 0:
        raise ProfileTooShortError("distance profile needs at least 2 samples")
    idx = np.rint(target / step).astype(int)
    idx = np.minimum(idx, len(profile.s) - 1)
    return np.asarray(profile.d)[..., idx]


def build_rate_profile(
    profile: DistanceProfile,
    p: SurvivalParams,
    extra_terms: Mapping[str, RateTerm] | None = None,
) -> RateProfile:
    """Event rates on the integration grid for a predicted distance profile.

    The profile is resampled onto ``p.grid`` by nearest grid point. Any
    ``extra_terms`` (name -> function of distance) add further critical
    rates on top of the collision term.
    """
    d = _resample(profile, p)
    critical = collision_rate(d, p)
    for term in (extra_terms or {}).values():
        critical = critical + np.asarray(term(d), dtype=float)
    return RateProfile(p.grid, np.asarray(critical, dtype=float), p.tau0_inv)


def integrate_survival(rates: RateProfile) -> SurvivalCurve:
    h = rates.step
    total = rates.total_rate
    survival = np.exp(-cumulative_trapezoid(total, h))
    density = total * survival
    accumulated = cumulative_trapezoid(density, h)
    return SurvivalCurve(rates.s_grid, survival, density, accumulated)


def escape_probability(rates: RateProfile, curve: SurvivalCurve | None = None):
    """Escape events inside the horizon plus all survival mass left at its end."""
    curve = curve or integrate_survival(rates)
    return rates.escape_rate * trapezoid(curve.survival, rates.step) + curve.survival[..., -1]


def risk_from_rates(rates: RateProfile):
    r = np.clip(1.0 - escape_probability(rates), 0.0, 1.0)
    return float(r) if np.ndim(r) == 0 else r


def risk_sa(profile: DistanceProfile, p: SurvivalParams):
    """Survival-analysis risk for a predicted distance profile."""
    return risk_from_rates(build_rate_profile(profile, p))
