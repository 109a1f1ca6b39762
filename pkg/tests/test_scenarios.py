import math

import numpy as np
import pytest

from riskhorizon.errors import SpecError
from riskhorizon.scenarios import (
    CASES,
    KINDS,
    ScenarioSpec,
    default_specs,
    gen_intersection,
    gen_longitudinal,
    generate,
    integrate_path,
)


def lon(case, speeds=(20.0, 10.0), **kw):
    return ScenarioSpec("longitudinal", case, speeds, **kw)


def inter(case, speeds=(10.0, 10.0), **kw):
    return ScenarioSpec("intersection", case, speeds, **kw)


def test_longitudinal_crash_gap():
    inst = gen_longitudinal(lon("crash"))
    assert inst.distances[0] == pytest.approx(55.0, abs=1e-9)
    assert inst.distances[-1] == pytest.approx(0.0, abs=1e-9)
    assert inst.times[0] == pytest.approx(-5.5) and inst.times[-1] == 0.0


@pytest.mark.parametrize("case, offset", [("near_crash", 7.0), ("non_crash", 12.0)])
def test_longitudinal_offsets(case, offset):
    inst = gen_longitudinal(lon(case))
    _, d_min = inst.min_distance()
    assert abs(d_min - offset) <= inst.spec.dt * 10.0
    custom = gen_longitudinal(lon(case, lateral_offset=3.5))
    assert custom.min_distance()[1] == pytest.approx(3.5, abs=0.2)


def test_longitudinal_with_braking_leader():
    spec = lon("crash", accel=((), ((-2.0, -3.0),)))
    inst = generate(spec)
    # leader was 6 m/s faster before braking; still collides at t = 0
    assert inst.traj_b.velocities[0, 0] == pytest.approx(16.0)
    assert inst.distances[-1] == pytest.approx(0.0, abs=1e-9)
    assert np.all(inst.traj_b.velocities[:, 0] >= 0)


def test_intersection_crash():
    inst = gen_intersection(inter("crash"))
    np.testing.assert_allclose(inst.traj_a.positions[0], (-55.0, 0.0))
    np.testing.assert_allclose(inst.traj_b.positions[0], (0.0, -55.0))
    assert inst.distances[-1] == pytest.approx(0.0, abs=1e-9)


def test_intersection_non_crash_grid_scan():
    inst = gen_intersection(inter("non_crash"))
    # continuous scan of the same straight-line motion, 1e-3 s step
    t = np.arange(-5.5, 3.0, 1e-3)
    a0, b0 = inst.traj_a.positions[-1], inst.traj_b.positions[-1]
    d = np.hypot(a0[0] + 10.0 * t - b0[0], a0[1] - (b0[1] + 10.0 * t))
    k = int(np.argmin(d))
    assert inst.min_distance()[1] == pytest.approx(d[k], abs=1e-6)
    assert d[k] == pytest.approx(10.0 * math.sqrt(2), abs=1e-4)
    assert t[k] == pytest.approx(0.0, abs=1e-3)


def test_intersection_non_crash_crossing_gap():
    inst = gen_intersection(inter("non_crash", speeds=(8.0, 13.0), pass_gap=2.0))
    xa, yb = inst.traj_a.positions[:, 0], inst.traj_b.positions[:, 1]
    t = inst.times
    t_a = np.interp(0.0, xa, t)
    t_b = -yb[-1] / 13.0
    assert t_b - t_a == pytest.approx(2.0, abs=1e-9)


def test_intersection_near_crash_yields():
    inst = gen_intersection(inter("near_crash"))
    assert inst.min_distance()[1] > 0.5
    assert np.all(inst.traj_b.velocities[:, 1] >= 0)
    # braking from 10 m/s over 25 - 7 m; stops 7 m short, after the window ends
    decel = 10.0**2 / (2 * 18.0)
    y, v = inst.traj_b.positions[-1, 1], inst.traj_b.velocities[-1, 1]
    assert v > 0
    assert y + v * v / (2 * decel) == pytest.approx(-7.0, abs=1e-9)


def test_intersection_near_crash_explicit_decel():
    inst = gen_intersection(inter("near_crash", yield_decel=9.0))
    assert np.all(inst.traj_b.velocities[:, 1] >= 0)
    assert inst.min_distance()[1] > 0


@pytest.mark.parametrize(
    "kw",
    [
        dict(kind="highway"),
        dict(case="almost"),
        dict(speeds=(1.0,)),
        dict(speeds=(-1.0, 2.0)),
        dict(start_offset=0.0),
        dict(dt=0.0),
        dict(pass_gap=-1.0),
        dict(lateral_offset=-2.0),
    ],
)
def test_spec_validation(kw):
    base = dict(kind="longitudinal", case="crash", speeds=(20.0, 10.0))
    base.update(kw)
    with pytest.raises(SpecError):
        ScenarioSpec(**base)


def test_inconsistent_specs():
    with pytest.raises(SpecError):
        generate(lon("crash", speeds=(10.0, 20.0)))  # follower slower: never closes
    with pytest.raises(SpecError):
        generate(inter("non_crash", accel=(((-3.0, 1.0),), ())))
    with pytest.raises(SpecError):
        generate(inter("near_crash", speeds=(10.0, 2.0)))  # cannot stop short
    with pytest.raises(SpecError):
        gen_longitudinal(inter("crash"))


def test_negative_speed_rejected():
    with pytest.raises(SpecError):
        integrate_path(np.linspace(-5, 0, 11), 1.0, ((-5.0, 2.0),))


def test_integrate_path_exact():
    t = np.linspace(-4, 0, 41)
    s, v = integrate_path(t, 10.0, ((-2.0, -2.0),))
    # v(t) = 10 - 2t for t > -2, 14 before
    assert v[0] == pytest.approx(14.0) and v[-1] == 10.0
    assert s[0] == pytest.approx(-(2 * 14.0 + (10.0 * 2 + 0.5 * 2.0 * 4)))


def test_spec_round_trip():
    spec = lon("near_crash", accel=((), ((-2.0, -3.0),)), lateral_offset=6.0, seed=4)
    again = ScenarioSpec.from_dict(spec.to_dict())
    assert again == spec
    with pytest.raises(SpecError, match="unknown"):
        ScenarioSpec.from_dict({**spec.to_dict(), "colour": "red"})
    with pytest.raises(SpecError, match="missing"):
        ScenarioSpec.from_dict({"kind": "longitudinal", "case": "crash"})


def test_default_set_shape():
    specs = default_specs()
    assert len(specs) == 42
    for kind in KINDS:
        for case in CASES:
            assert sum(s.kind == kind and s.case == case for s in specs) == 7
    assert len({s.name for s in specs}) == 42


def test_default_set_geometry():
    for spec in default_specs():
        inst = generate(spec)
        assert inst.distances[0] <= 120.0 + 1e-9
        assert inst.traj_a.dt == inst.traj_b.dt
        assert np.array_equal(inst.traj_a.times, inst.traj_b.times)
        closing = np.linalg.norm(inst.traj_a.velocities - inst.traj_b.velocities, axis=1).max()
        t_min, d_min = inst.min_distance()
        if spec.case == "crash":
            assert d_min <= 0.1 and abs(t_min) <= spec.dt
        elif spec.kind == "longitudinal":
            assert abs(d_min - spec.offset) <= 2 * spec.dt * closing
        elif spec.case == "non_crash":
            assert d_min > 12.0
        else:
            assert d_min > 0.5


def test_generation_is_deterministic():
    a = [generate(s) for s in default_specs(seed=3)]
    b = [generate(s) for s in default_specs(seed=3)]
    for x, y in zip(a, b):
        assert x.spec == y.spec and x.traj_a == y.traj_a and x.traj_b == y.traj_b
    assert default_specs(seed=3) != default_specs(seed=4)
