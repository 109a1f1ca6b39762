import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from riskhorizon.errors import InvalidStepError, SamplingError
from riskhorizon.kinematics import (
    V_EPS,
    KinematicState,
    RelativeState,
    closest_encounter,
    distance_profile,
    estimate_velocities,
    predict_cv,
    predicted_distances,
    sin_angle,
)
from riskhorizon.oracle import OracleConfig, brute_force_encounter

coord = st.floats(-100, 100, allow_nan=False)
vel = st.floats(-30, 30, allow_nan=False)


def rel(dx, dv):
    return RelativeState(np.array(dx, float), np.array(dv, float))


@pytest.mark.parametrize(
    "pos, v, s, expected",
    [
        ((0, 0), (2, 0), 3.0, (6, 0)),
        ((4, -2), (3, 1), 0.0, (4, -2)),
        ((1, 1), (-1, 2), 0.5, (0.5, 2)),
    ],
)
def test_predict_cv(pos, v, s, expected):
    out = predict_cv(KinematicState(0.0, pos, v), s)
    np.testing.assert_allclose(out, expected, rtol=0, atol=1e-15)


def test_predict_cv_rejects_negative_time():
    with pytest.raises(ValueError):
        predict_cv(KinematicState(0.0, (0, 0), (1, 0)), -1.0)


def test_distance_profile_head_on():
    a = KinematicState(0.0, (0, 0), (1, 0))
    b = KinematicState(0.0, (10, 0), (0, 0))
    assert list(distance_profile(a, b, horizon=2, dt=1)) == [(0.0, 10.0), (1.0, 9.0), (2.0, 8.0)]


def test_distance_profile_coincident_and_parallel():
    a = KinematicState(0.0, (1, 2), (3, -1))
    prof = distance_profile(a, a, horizon=4, dt=0.5)
    assert np.all(prof.d == 0)
    b = KinematicState(0.0, (3, 4), (1, 0))
    prof = distance_profile(KinematicState(0.0, (0, 0), (1, 0)), b, horizon=7, dt=0.1)
    np.testing.assert_allclose(prof.d, 5.0, rtol=0, atol=1e-12)


def test_distance_profile_sample_count():
    a = KinematicState(0.0, (0, 0), (0, 0))
    assert len(distance_profile(a, a, horizon=6.0, dt=0.05).s) == 121
    assert len(distance_profile(a, a, horizon=1.0, dt=0.3).s) == 4


@pytest.mark.parametrize("horizon, dt", [(0, 0.1), (-1, 0.1), (1, 0), (1, -0.5)])
def test_distance_profile_invalid_step(horizon, dt):
    a = KinematicState(0.0, (0, 0), (0, 0))
    with pytest.raises(InvalidStepError):
        distance_profile(a, a, horizon, dt)


@pytest.mark.parametrize(
    "dx, dv, s_e, d_e",
    [
        ((10, 0), (-2, 0), 5.0, 0.0),
        ((3, 4), (0, -1), 4.0, 3.0),
        ((5, 0), (1, 0), 0.0, 5.0),
        ((5, 0), (0, 0), 0.0, 5.0),
    ],
)
def test_closest_encounter_examples(dx, dv, s_e, d_e):
    enc = closest_encounter(rel(dx, dv))
    assert enc.s_e == pytest.approx(s_e, abs=1e-12)
    assert enc.d_e == pytest.approx(d_e, abs=1e-12)


def test_closest_encounter_grid_scan_oracle():
    # the (3,4),(0,-1) example against a fine scan over [0, 20]
    s = np.arange(0, 20 + 1e-9, 1e-4)
    d = predicted_distances(rel((3, 4), (0, -1)), s)
    k = int(np.argmin(d))
    assert s[k] == pytest.approx(4.0, abs=1e-4)
    assert d[k] == pytest.approx(3.0, abs=1e-6)


def test_tiny_relative_speed_is_treated_as_static():
    enc = closest_encounter(rel((3, 4), (math.sqrt(V_EPS) / 2, 0)))
    assert enc.s_e == 0.0
    assert enc.d_e == pytest.approx(5.0)


def test_batched_encounter_matches_single():
    dx = np.array([[10, 0], [3, 4], [5, 0]], float)
    dv = np.array([[-2, 0], [0, -1], [1, 0]], float)
    batch = closest_encounter(RelativeState(dx, dv))
    for i in range(3):
        one = closest_encounter(RelativeState(dx[i], dv[i]))
        assert batch.s_e[i] == one.s_e and batch.d_e[i] == one.d_e


@settings(max_examples=200, deadline=None)
@given(coord, coord, vel, vel)
def test_encounter_invariants(x, y, vx, vy):
    r = rel((x, y), (vx, vy))
    enc = closest_encounter(r)
    assert enc.s_e >= 0 and enc.d_e >= 0
    assert enc.d_e <= math.hypot(x, y) + 1e-9
    # no grid point beats the closed form
    s = np.linspace(0, max(2 * enc.s_e, 1.0), 2001)
    assert predicted_distances(r, s).min() >= enc.d_e - 1e-6


@settings(max_examples=200, deadline=None)
@given(coord, coord, vel, vel)
def test_sine_identity_when_approaching(x, y, vx, vy):
    r = rel((x, y), (vx, vy))
    if vx * vx + vy * vy < V_EPS or x * vx + y * vy > 0:
        return
    enc = closest_encounter(r)
    expected = math.hypot(x, y) * sin_angle(r)
    assert abs(enc.d_e - expected) <= 1e-9 * (1 + math.hypot(x, y))


@settings(max_examples=100, deadline=None)
@given(st.floats(0.5, 200), st.floats(0.1, 40), st.floats(0, 2 * math.pi))
def test_collinear_closing_reduces_to_ttc(gap, closing, angle):
    u = np.array([math.cos(angle), math.sin(angle)])
    enc = closest_encounter(RelativeState(gap * u, -closing * u))
    assert enc.s_e == pytest.approx(gap / closing, rel=1e-12)


def test_brute_force_oracle_examples():
    enc = brute_force_encounter(rel((10, 0), (-2, 0)))
    assert enc.s_e == pytest.approx(5.0, abs=1e-3) and enc.d_e < 1e-6
    enc = brute_force_encounter(rel((3, 4), (0, 0)), OracleConfig(grid_max=10))
    assert enc.s_e == 0.0 and enc.d_e == 5.0


def test_estimate_velocities_uniform_motion():
    traj = estimate_velocities([(0, (0, 0)), (1, (2, 0)), (2, (4, 0))])
    np.testing.assert_allclose(traj.velocities, [[2, 0]] * 3)


def test_estimate_velocities_errors():
    with pytest.raises(SamplingError):
        estimate_velocities([(0, (0, 0))])
    with pytest.raises(SamplingError):
        estimate_velocities([(0, (0, 0)), (1, (1, 0)), (3, (3, 0))])


def test_trajectory_arrays_are_read_only():
    traj = estimate_velocities([(0, (0, 0)), (1, (2, 0)), (2, (4, 0))])
    with pytest.raises(ValueError):
        traj.positions[0, 0] = 1.0
