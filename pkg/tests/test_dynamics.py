"""Rigid-body pipe dynamics: hand-derived oracles, closed forms, and invariants.

Frozen reference values, each derived independently of the implementation:

* drag at 1 m/s relative flow:      0.5 * 1000 * 1 * 0.01 * 1 * |1| = 5.0 N
* axial accel, forces (1,1,1), rest: (3 - 0 - 0) / 3 = 1.0 m/s^2
* pitch accel, theta=0, f3=1 only:  (sqrt(3)/2) * 0.2 * 1 / 0.05 = 2*sqrt(3)
* yaw accel,   theta=0, f2=1 only:  (sqrt(3)/2) * 0.2 * 1 / 0.05 = 2*sqrt(3)
* arm angle, 14-inch bore:          asin((0.1778 - 0.05) / 0.2) = 0.6931975218725805
* gravity yaw moment at that seat:  -(3 * 9.81 * 0.2 * sin(theta)) / 0.05 = -75.22308
* axial ODE with total thrust 3 N, level pipe, still water, v(0)=0:
      v' = 1 - (5/3) v^2   =>   v(t) = sqrt(3/5) tanh(sqrt(5/3) t)
                                x(t) = (3/5) ln cosh(sqrt(5/3) t)
      v(1) = 0.6656781246047648,  x(1) = 0.40244862744633325
"""

from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pipenav import (
    ArmConfig,
    Environment,
    GeometryError,
    InvariantError,
    NonFinite,
    RobotParams,
    RobotState,
    WheelForces,
    arm_angle_from_diameter,
    axial_accel,
    drag_force,
    gravity_feedforward,
    linearize,
    pitch_accel,
    step,
    yaw_accel,
)

SQRT3 = math.sqrt(3.0)
PIPE = 0.3556
THETA_14IN = 0.6931975218725805


@pytest.fixture
def flat_arms() -> ArmConfig:
    # degenerate seat with arms along the axis: cos(theta) = 1 for all wheels
    return ArmConfig(theta=(0.0, 0.0, 0.0))


# ---------------------------------------------------------------------------
# wheel-force container
# ---------------------------------------------------------------------------


def test_wheel_forces_indexing_and_clamp():
    f = WheelForces((1.0, -25.0, 6.0))
    assert len(f) == 3
    assert f[1] == -25.0
    assert list(f) == [1.0, -25.0, 6.0]
    assert not f.within_limit(20.0)
    g = f.clamped(20.0)
    assert tuple(g) == (1.0, -20.0, 6.0)
    assert g.within_limit(20.0)


def test_wheel_forces_rejects_nonfinite():
    with pytest.raises(InvariantError):
        WheelForces((1.0, float("nan"), 0.0))


# ---------------------------------------------------------------------------
# force and moment terms
# ---------------------------------------------------------------------------


def test_drag_at_unit_relative_speed(params, env):
    assert drag_force(params, env, 1.0) == pytest.approx(5.0, abs=1e-12)


def test_drag_is_odd_in_relative_speed(params, env):
    assert drag_force(params, env, -1.0) == pytest.approx(-5.0, abs=1e-12)


def test_drag_uses_relative_flow(params):
    env = Environment(flow_velocity=0.4, inclination=0.0)
    # robot at rest in moving water is pushed: rel = 0 - 0.4
    assert drag_force(params, env, 0.0) == pytest.approx(-0.5 * 1000 * 0.01 * 0.16, abs=1e-12)


def test_axial_accel_at_rest(params, env):
    assert axial_accel(params, env, (1.0, 1.0, 1.0), 0.0) == pytest.approx(1.0, abs=1e-12)


def test_axial_accel_includes_incline(params):
    env = Environment(flow_velocity=0.0, inclination=math.pi / 2)
    # vertical climb: thrust 3 N minus full weight
    expected = (3.0 - 3.0 * 9.81) / 3.0
    assert axial_accel(params, env, (1.0, 1.0, 1.0), 0.0) == pytest.approx(expected, abs=1e-12)


def test_pitch_accel_single_wheel(params, flat_arms):
    assert pitch_accel(params, flat_arms, (0.0, 0.0, 1.0)) == pytest.approx(2 * SQRT3, abs=1e-12)
    assert pitch_accel(params, flat_arms, (0.0, 1.0, 0.0)) == pytest.approx(-2 * SQRT3, abs=1e-12)
    # wheel 1 exerts no pitch moment
    assert pitch_accel(params, flat_arms, (5.0, 0.0, 0.0)) == pytest.approx(0.0, abs=1e-12)


def test_yaw_accel_single_wheel(params, env, flat_arms):
    assert yaw_accel(params, env, flat_arms, (0.0, 1.0, 0.0)) == pytest.approx(2 * SQRT3, abs=1e-12)
    assert yaw_accel(params, env, flat_arms, (0.0, 0.0, 1.0)) == pytest.approx(2.0, abs=1e-12)
    assert yaw_accel(params, env, flat_arms, (1.0, 0.0, 0.0)) == pytest.approx(-4.0, abs=1e-12)


def test_yaw_gravity_moment(params, env, arms):
    # zero wheel force: only the offset weight of the pressed seat turns the body
    assert yaw_accel(params, env, arms, (0.0, 0.0, 0.0)) == pytest.approx(-75.22308, abs=1e-5)


def test_yaw_gravity_moment_vanishes_vertical(params, arms):
    env = Environment(flow_velocity=0.0, inclination=math.pi / 2)
    assert yaw_accel(params, env, arms, (0.0, 0.0, 0.0)) == pytest.approx(0.0, abs=1e-12)


# ---------------------------------------------------------------------------
# wall-press geometry
# ---------------------------------------------------------------------------


def test_arm_angle_14in(params):
    arms = arm_angle_from_diameter(params, PIPE)
    assert arms.theta[0] == pytest.approx(THETA_14IN, abs=1e-12)
    assert arms.theta == (arms.theta[0],) * 3
    assert arms.cos[0] == pytest.approx(math.cos(THETA_14IN), abs=1e-12)


def test_arm_angle_monotone_in_diameter(params):
    narrow = arm_angle_from_diameter(params, 0.25)
    wide = arm_angle_from_diameter(params, 0.45)
    assert narrow.theta[0] < wide.theta[0]


def test_arm_angle_rejects_unreachable_bore(params):
    with pytest.raises(GeometryError):
        arm_angle_from_diameter(params, 0.09)  # half-bore below body radius
    with pytest.raises(GeometryError):
        arm_angle_from_diameter(params, 0.52)  # needs reach beyond the arm length


def test_gravity_feedforward_cancels_moments(params, env, arms):
    ff = gravity_feedforward(params, env, arms)
    assert pitch_accel(params, arms, ff) == pytest.approx(0.0, abs=1e-9)
    assert yaw_accel(params, env, arms, ff) == pytest.approx(0.0, abs=1e-9)
    # pattern (-2f, f, f): no net pitch by symmetry, yaw cancelled exactly
    assert ff[1] == pytest.approx(ff[2], abs=1e-12)
    assert ff[0] == pytest.approx(-2.0 * ff[1], abs=1e-12)


def test_gravity_feedforward_vanishes_vertical(params, arms):
    env = Environment(flow_velocity=0.0, inclination=math.pi / 2)
    ff = gravity_feedforward(params, env, arms)
    assert np.allclose(ff, 0.0, atol=1e-12)


# ---------------------------------------------------------------------------
# integration against the closed-form axial solution
# ---------------------------------------------------------------------------


def test_step_matches_analytic_axial_solution(params, env, arms):
    forces = (1.0, 1.0, 1.0)
    # moments from this symmetric force triple: pitch cancels, yaw does not,
    # but the axial channel is decoupled so x/x_dot follow the closed form.
    state = RobotState()
    out = step(params, env, arms, forces, state, dt=1.0, substeps=200)
    assert out.x_dot == pytest.approx(0.6656781246047648, abs=1e-9)
    assert out.x == pytest.approx(0.40244862744633325, abs=1e-9)


def test_step_is_deterministic(params, env, arms):
    state = RobotState(x=0.1, x_dot=0.2, phi=0.05, phi_dot=-0.1, psi=0.02, psi_dot=0.3)
    a = step(params, env, arms, (4.0, 1.0, 2.0), state, dt=0.05, substeps=10)
    b = step(params, env, arms, (4.0, 1.0, 2.0), state, dt=0.05, substeps=10)
    assert a == b


def test_step_substeps_compose(params, env, arms):
    state = RobotState(x_dot=0.1)
    one = step(params, env, arms, (2.0, 1.0, 1.0), state, dt=0.1, substeps=8)
    half = step(params, env, arms, (2.0, 1.0, 1.0), state, dt=0.05, substeps=4)
    two = step(params, env, arms, (2.0, 1.0, 1.0), half, dt=0.05, substeps=4)
    assert two.x == pytest.approx(one.x, abs=1e-12)
    assert two.x_dot == pytest.approx(one.x_dot, abs=1e-12)


def test_attitude_only_freezes_axial(params, env, arms):
    state = RobotState(x=1.0, x_dot=0.0, phi=0.1, psi=-0.2)
    out = step(params, env, arms, (5.0, 1.0, 1.0), state, dt=0.5, substeps=50, attitude_only=True)
    assert out.x == state.x
    assert out.x_dot == state.x_dot
    assert out.psi != state.psi


def test_step_rejects_nonfinite_force(params, env, arms):
    with pytest.raises((NonFinite, InvariantError)):
        step(params, env, arms, (float("inf"), 0.0, 0.0), RobotState(), dt=0.01)


def test_wheel_angles_accumulate(params, env, arms):
    state = RobotState(x_dot=0.314159)
    out = step(params, env, arms, (2.0, 2.0, 2.0), state, dt=0.01, substeps=1)
    assert all(w > 0 for w in out.wheel_angle)


# ---------------------------------------------------------------------------
# linearization sanity (full check lives in the acceptance suite)
# ---------------------------------------------------------------------------


def test_linearize_shapes_and_structure(params, env, arms):
    a, b = linearize(params, env, arms)
    assert a.shape == (4, 4) and b.shape == (3,) or b.shape == (4, 3)
    assert a[0, 1] == 1.0 and a[2, 3] == 1.0
    # wheel 1 cannot pitch the body; wheels 2/3 pitch antisymmetrically
    assert b[1, 0] == 0.0
    assert b[1, 1] == pytest.approx(-b[1, 2], abs=1e-12)


@settings(max_examples=50, deadline=None)
@given(
    f1=st.floats(-20, 20),
    f2=st.floats(-20, 20),
    f3=st.floats(-20, 20),
    v=st.floats(-1, 1),
)
def test_accelerations_always_finite(f1, f2, f3, v):
    params = RobotParams()
    env = Environment(flow_velocity=0.0, inclination=0.0)
    arms = arm_angle_from_diameter(params, PIPE)
    forces = (f1, f2, f3)
    assert math.isfinite(axial_accel(params, env, forces, v))
    assert math.isfinite(pitch_accel(params, arms, forces))
    assert math.isfinite(yaw_accel(params, env, arms, forces))
