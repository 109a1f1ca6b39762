"""TTC, TTCE and Gaussian-overlap risk measures.

All functions broadcast over numpy arrays. Every measure maps into [0, 1],
equals 1 for an imminent collision and decays to 0 for events far ahead.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import EmptyProfileError, VarianceError
from .kinematics import DistanceProfile, Encounter


@dataclass(frozen=True)
class TtceParams:
    """Constants of the TTC/TTCE measures.

    ``d_c`` scales time inside the temporal factor ``eps/(eps + d_c*s)``.
    ``diffusion`` is the variance growth rate (m^2/s) of the spatial factor;
    it defaults to ``d_c`` so the single-constant form is the default.
    """

    epsilon: float = 1.0
    alpha: float = 1.0
    d_c: float = 1.0
    diffusion: float | None = None

    def __post_init__(self):
        if self.epsilon <= 0 or self.alpha <= 0 or self.d_c <= 0:
            raise ValueError("epsilon, alpha and d_c must be positive")
        if self.diffusion is not None and self.diffusion <= 0:
            raise ValueError("diffusion must be positive")

    @property
    def spatial_diffusion(self) -> float:
        return self.d_c if self.diffusion is None else self.diffusion


@dataclass(frozen=True)
class GaussParams:
    """Per-participant diffusion constants; the exponent is fixed at 1/2."""

    epsilon: float = 1.0
    d1: float = 0.5
    d2: float = 0.5
    alpha: float = field(default=0.5, init=False)

    def __post_init__(self):
        if self.epsilon <= 0:
            raise ValueError("epsilon must be positive")
        if self.d1 < 0 or self.d2 < 0 or self.d1 + self.d2 <= 0:
            raise ValueError("diffusion constants must be >= 0 with a positive sum")

    @property
    def d_c(self) -> float:
        return self.d1 + self.d2


@dataclass(frozen=True)
class GaussianProduct:
    mu_c: float
    sigma_c_sq: float
    s_c: float


def temporal_factor(s, epsilon: float, scale: float, alpha: float):
    """(eps / (eps + scale*s))**alpha"""
    return (epsilon / (epsilon + scale * np.asarray(s, dtype=float))) ** alpha


def spatial_factor(d, s, diffusion: float):
    """exp(-d^2 / (2*diffusion*s)) with the s -> 0+ limit at s == 0.

    The limit is 1 when d == 0 and 0 otherwise.
    """
    d = np.asarray(d, dtype=float)
    s = np.asarray(s, dtype=float)
    d, s = np.broadcast_arrays(d, s)
    var = 2.0 * diffusion * s
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        expo = np.where(var > 0, d * d / np.where(var > 0, var, 1.0), np.where(d > 0, np.inf, 0.0))
    out = np.exp(-expo)
    return float(out) if out.ndim == 0 else out


def risk_ttc(s_e, p: TtceParams):
    """Time-to-collision risk; 1 at ``s_e == 0``, strictly decreasing after."""
    out = temporal_factor(s_e, p.epsilon, p.d_c, p.alpha)
    return float(out) if np.ndim(out) == 0 else out


def risk_ttce(enc: Encounter, p: TtceParams):
    """TTC risk damped by how far apart the participants pass.

    Reduces exactly to ``risk_ttc`` when ``d_e == 0``.
    """
    out = temporal_factor(enc.s_e, p.epsilon, p.d_c, p.alpha) * spatial_factor(
        enc.d_e, enc.s_e, p.spatial_diffusion
    )
    return float(out) if np.ndim(out) == 0 else out


def gaussian_product(mu1: float, var1: float, mu2: float, var2: float) -> GaussianProduct:
    """Scale, mean and variance of the product of two normal densities.

    ``s_c`` is the overlap integral of the two densities, i.e. the normal
    density of ``mu1 - mu2`` with variance ``var1 + var2``.
    """
    if var1 <= 0 or var2 <= 0:
        raise VarianceError(f"variances must be positive (got {var1}, {var2})")
    total = var1 + var2
    s_c = math.exp(-((mu1 - mu2) ** 2) / (2.0 * total)) / math.sqrt(2.0 * math.pi * total)
    sigma_c_sq = var1 * var2 / total
    mu_c = (mu1 * var2 + mu2 * var1) / total
    return GaussianProduct(mu_c=mu_c, sigma_c_sq=sigma_c_sq, s_c=s_c)


def event_prob_gauss(d, s, p: GaussParams):
    """Probability-like overlap of two diffusing positions ``d`` apart after ``s``."""
    out = temporal_factor(s, p.epsilon, p.d_c, p.alpha) * spatial_factor(d, s, p.d_c)
    return float(out) if np.ndim(out) == 0 else out


def risk_gauss(profile: DistanceProfile, p: GaussParams):
    """Maximum of ``event_prob_gauss`` over the sampled look-ahead grid.

    Returns ``(risk, s_e)``. Ties go to the earliest grid point. Batched
    profiles (``d`` with leading axes) give arrays of the same leading shape.
    """
    if len(profile.s) == 0 or np.size(profile.d) == 0:
        raise EmptyProfileError("distance profile is empty")
    probs = event_prob_gauss(profile.d, profile.s, p)
    idx = np.argmax(probs, axis=-1)
    risk = np.take_along_axis(np.asarray(probs), np.expand_dims(idx, -1), axis=-1)[..., 0]
    s_e = profile.s[idx]
    if np.ndim(risk) == 0:
        return float(risk), float(s_e)
    return risk, s_e
