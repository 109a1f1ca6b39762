"""Continuous collision-risk measures on constant-velocity predictions.

TTC and TTCE score the closest predicted encounter, the Gaussian measure
scores the overlap of diffusing position uncertainties, and the survival
measure weighs collision events against escape events along the whole
predicted distance profile.
"""

from .calibration import calibrate
from .evaluation import (
    MEASURES,
    DetectionStats,
    RiskTrace,
    aggregate,
    compute_trace,
    default_params,
    detect,
    evaluate,
)
from .kinematics import (
    DistanceProfile,
    Encounter,
    KinematicState,
    RelativeState,
    Trajectory,
    closest_encounter,
    distance_profile,
    predict_cv,
)
from .measures import GaussParams, TtceParams, risk_gauss, risk_ttc, risk_ttce
from .scenarios import ScenarioInstance, ScenarioSpec, default_specs, generate
from .survival import SurvivalParams, risk_sa

__version__ = "0.1.0"

__all__ = [
    "MEASURES",
    "DetectionStats",
    "DistanceProfile",
    "Encounter",
    "GaussParams",
    "KinematicState",
    "RelativeState",
    "RiskTrace",
    "ScenarioInstance",
    "ScenarioSpec",
    "SurvivalParams",
    "Trajectory",
    "TtceParams",
    "aggregate",
    "calibrate",
    "closest_encounter",
    "compute_trace",
    "default_params",
    "default_specs",
    "detect",
    "distance_profile",
    "evaluate",
    "generate",
    "predict_cv",
    "risk_gauss",
    "risk_sa",
    "risk_ttc",
    "risk_ttce",
]
