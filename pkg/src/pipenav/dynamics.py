"""Rigid-body model of the three-wheel wall-press robot.

State is the axial position/velocity along the route plus pitch and yaw
deviations of the body axis from the pipe axis. The three wheel modules sit
at 120 deg around the body; wheel 1 carries the reference azimuth. Axial
motion sees gravity along the pipe and quadratic fluid drag; pitch and yaw
respond to wheel-force differentials through the arm lever geometry, and
yaw additionally carries the gravity moment through the wheel-1 arm angle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from . import kernels
from .errors import GeometryError, InvariantError, NonFinite

SQRT3_2 = math.sqrt(3.0) / 2.0


@dataclass(frozen=True)
class RobotParams:
    """Physical robot constants. All configuration, nothing hard-coded."""

    mass: float = 3.0  # kg
    arm_length: float = 0.2  # m, pivot to wheel contact
    wheel_radius: float = 0.05  # m
    inertia_yy: float = 0.05  # kg m^2, pitch
    inertia_zz: float = 0.05  # kg m^2, yaw
    gravity: float = 9.81  # m/s^2
    drag_coeff: float = 1.0  # dimensionless Cd
    frontal_area: float = 0.01  # m^2
    fluid_density: float = 1000.0  # kg/m^3 (water-filled pipe)
    body_radius: float = 0.05  # m, body centerline to arm pivot
    f_max: float = 20.0  # N, per-wheel traction limit

    def __post_init__(self):
        for name in ("mass", "arm_length", "wheel_radius", "inertia_yy",
                     "inertia_zz", "f_max"):
            if not (getattr(self, name) > 0.0 and math.isfinite(getattr(self, name))):
                raise InvariantError(f"robot.{name} must be positive, got {getattr(self, name)}")
        for name in ("gravity", "drag_coeff", "frontal_area", "fluid_density", "body_radius"):
            if not (getattr(self, name) >= 0.0 and math.isfinite(getattr(self, name))):
                raise InvariantError(f"robot.{name} must be non-negative, got {getattr(self, name)}")


@dataclass(frozen=True)
class Environment:
    """Segment-local environment: pipe inclination and axial fluid flow."""

    inclination: float = 0.0  # rad, positive = uphill
    flow_velocity: float = 0.0  # m/s, positive = downstream

    def __post_init__(self):
        if not (abs(self.inclination) <= math.pi / 2):
            raise InvariantError(f"env.inclination must lie in [-pi/2, pi/2], got {self.inclination}")
        if not math.isfinite(self.flow_velocity):
            raise InvariantError("env.flow_velocity must be finite")


@dataclass(frozen=True)
class ArmConfig:
    """Wheel arm angles theta_i from the body axis (rad)."""

    theta: tuple[float, float, float]

    @property
    def cos(self) -> tuple[float, float, float]:
        return tuple(math.cos(t) for t in self.theta)


@dataclass(frozen=True)
class WheelForces:
    """Per-wheel traction forces F_1..F_3 (N). Indexes like a 3-sequence, so
    every force argument below accepts either this or a plain array.
    """

    f: tuple[float, float, float]

    def __post_init__(self):
        if len(self.f) != 3:
            raise InvariantError(f"wheel forces need 3 entries, got {len(self.f)}")
        if not all(math.isfinite(v) for v in self.f):
            raise InvariantError(f"wheel forces must be finite, got {self.f}")

    def __getitem__(self, i: int) -> float:
        return self.f[i]

    def __len__(self) -> int:
        return 3

    def __iter__(self):
        return iter(self.f)

    def within_limit(self, f_max: float) -> bool:
        return all(abs(v) <= f_max for v in self.f)

    def clamped(self, f_max: float) -> "WheelForces":
        return WheelForces(tuple(min(max(v, -f_max), f_max) for v in self.f))


@dataclass(frozen=True)
class RobotState:
    """Axial + attitude state; wheel_angle tracks accumulated wheel rotation (rad)."""

    x: float = 0.0
    x_dot: float = 0.0
    phi: float = 0.0
    phi_dot: float = 0.0
    psi: float = 0.0
    psi_dot: float = 0.0
    wheel_angle: tuple[float, float, float] = (0.0, 0.0, 0.0)

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.x_dot, self.phi, self.phi_dot,
                         self.psi, self.psi_dot], dtype=np.float64)


def arm_angle_from_diameter(params: RobotParams, diameter: float) -> ArmConfig:
    """Arm angle that presses the wheels against a pipe of the given diameter.

    sin(theta) = (diameter/2 - body_radius) / arm_length; all three arms get
    the same angle in a circular pipe.
    """
    ratio = (diameter / 2.0 - params.body_radius) / params.arm_length
    if not (0.0 < ratio < 1.0):
        raise GeometryError(
            f"arms cannot reach the wall: (diameter/2 - body_radius)/arm_length = {ratio:.6g} "
            "must lie in (0, 1)"
        )
    theta = math.asin(ratio)
    return ArmConfig(theta=(theta, theta, theta))


def drag_force(params: RobotParams, env: Environment, x_dot: float) -> float:
    """Quadratic drag 0.5*rho*Cd*A*(v_rel)*|v_rel| from the surrounding fluid."""
    rel = x_dot - env.flow_velocity
    return 0.5 * params.fluid_density * params.drag_coeff * params.frontal_area * rel * abs(rel)


def axial_accel(params: RobotParams, env: Environment, forces, x_dot: float) -> float:
    """x_ddot from total wheel traction, gravity along the pipe, and drag."""
    f_sum = forces[0] + forces[1] + forces[2]
    return (f_sum - params.mass * params.gravity * math.sin(env.inclination)
            - drag_force(params, env, x_dot)) / params.mass


def pitch_accel(params: RobotParams, arms: ArmConfig, forces) -> float:
    """phi_ddot from the wheel-2/3 traction differential."""
    c = arms.cos
    return SQRT3_2 * params.arm_length * (forces[2] * c[2] - forces[1] * c[1]) / params.inertia_yy


def yaw_accel(params: RobotParams, env: Environment, arms: ArmConfig, forces) -> float:
    """psi_ddot from wheel tractions and the gravity moment through arm 1."""
    c = arms.cos
    moment = params.arm_length * (0.5 * forces[2] * c[2] + SQRT3_2 * forces[1] * c[1]
                                  - forces[0] * c[0])
    gravity_moment = (params.mass * params.gravity * math.cos(env.inclination)
                      * params.arm_length * math.sin(arms.theta[0]))
    return (moment - gravity_moment) / params.inertia_zz


def pack_coeff(params: RobotParams, env: Environment, arms: ArmConfig) -> tuple:
    """Flatten the model constants for the integration kernel."""
    c = arms.cos
    return (
        params.mass, params.arm_length, params.inertia_yy, params.inertia_zz,
        params.gravity, math.sin(env.inclination), math.cos(env.inclination),
        c[0], c[1], c[2], math.sin(arms.theta[0]),
        0.5 * params.fluid_density * params.drag_coeff * params.frontal_area,
        env.flow_velocity,
    )


def step(params: RobotParams, env: Environment, arms: ArmConfig, forces,
         state: RobotState, dt: float, substeps: int = 1,
         attitude_only: bool = False) -> RobotState:
    """Advance the state by dt (optionally split into substeps RK4 steps)
    under zero-order-held wheel forces. Pure function; raises NonFinite if
    the result stops being a number.
    """
    if not (dt > 0.0 and math.isfinite(dt)):
        raise InvariantError(f"dt must be positive, got {dt}")
    if substeps < 1:
        raise InvariantError(f"substeps must be >= 1, got {substeps}")
    y = (state.x, state.x_dot, state.phi, state.phi_dot, state.psi, state.psi_dot)
    out = kernels.rk4_advance(y, tuple(float(f) for f in forces),
                              pack_coeff(params, env, arms),
                              dt / substeps, substeps, attitude_only)
    if not all(math.isfinite(v) for v in out):
        raise NonFinite(f"state left the finite range after step dt={dt}")
    dx = out[0] - state.x
    dw = dx / params.wheel_radius  # rolling without slip along the pipe axis
    wheel = tuple(a + dw for a in state.wheel_angle)
    return replace(state, x=out[0], x_dot=out[1], phi=out[2], phi_dot=out[3],
                   psi=out[4], psi_dot=out[5], wheel_angle=wheel)


def linearize(params: RobotParams, env: Environment, arms: ArmConfig) -> tuple[np.ndarray, np.ndarray]:
    """Jacobians (A, B) of the attitude subsystem [phi, phi_dot, psi, psi_dot]
    with respect to state and wheel forces about the pressed equilibrium.
    """
    c = arms.cos
    a_mat = np.zeros((4, 4))
    a_mat[0, 1] = 1.0
    a_mat[2, 3] = 1.0
    b_mat = np.zeros((4, 3))
    b_mat[1, 1] = -SQRT3_2 * params.arm_length * c[1] / params.inertia_yy
    b_mat[1, 2] = SQRT3_2 * params.arm_length * c[2] / params.inertia_yy
    b_mat[3, 0] = -params.arm_length * c[0] / params.inertia_zz
    b_mat[3, 1] = SQRT3_2 * params.arm_length * c[1] / params.inertia_zz
    b_mat[3, 2] = 0.5 * params.arm_length * c[2] / params.inertia_zz
    return a_mat, b_mat


def gravity_feedforward(params: RobotParams, env: Environment, arms: ArmConfig) -> np.ndarray:
    """Static wheel forces that cancel the gravity yaw moment with zero net
    pitch moment and zero net axial force.

    Solves the 3x3 balance exactly; falls back to the minimum-norm solution
    (dropping the axial constraint) if the geometry makes it singular. The
    result is not clamped here: the caller's saturation applies to the
    summed command, and f_max must be sized to cover this balance.
    """
    c = arms.cos
    rhs_moment = (params.mass * params.gravity * math.cos(env.inclination)
                  * math.sin(arms.theta[0]))
    mat = np.array([
        [1.0, 1.0, 1.0],                                  # axial sum
        [0.0, -SQRT3_2 * c[1], SQRT3_2 * c[2]],           # pitch moment / L
        [-c[0], SQRT3_2 * c[1], 0.5 * c[2]],              # yaw moment / L
    ])
    rhs = np.array([0.0, 0.0, rhs_moment])
    try:
        return np.linalg.solve(mat, rhs)
    except np.linalg.LinAlgError:
        sol, *_ = np.linalg.lstsq(mat[1:], rhs[1:], rcond=None)
        return sol
