"""Two-phase motion controller.

Phase 1 (straight runs): an LQR attitude regulator on [phi, phi_dot, psi,
psi_dot] designed from the linearized plant, summed with three per-wheel
speed PID loops and a static feedforward that balances the gravity yaw
moment. Phase 2 (junctions): the PID loops track differential wheel-speed
setpoints from the variable-velocity allocation until the accumulated yaw
passes the rotation error check. A small supervisor state machine switches
between the phases from the fused sonar/localization proximity signals.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import InvariantError, NotStabilizable
from .routemap import (
    ROUTE_END,
    ConfigurationType,
    RouteMap,
    ct_entry,
    distance_to_next_feature,
    locate,
    route_length,
)

RICCATI_TOL = 1e-9
_MAX_NEWTON_ITERS = 60


def _solve_sylvester_sum(m_left: np.ndarray, m_right: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    """Solve m_left @ X + X @ m_right = rhs via the Kronecker normal equations.

    Sizes here are tiny (n <= 4 for the plant, so a 16x16 system), which
    keeps this self-contained instead of pulling in a dedicated solver.
    """
    n = rhs.shape[0]
    eye = np.eye(n)
    coeff = np.kron(m_left, eye) + np.kron(eye, m_right.T)
    return np.linalg.solve(coeff, rhs.reshape(-1)).reshape(n, n)


def _lyapunov(acl: np.ndarray, s: np.ndarray) -> np.ndarray:
    """Solve acl.T @ P + P @ acl = -s for P."""
    p = _solve_sylvester_sum(acl.T, acl, -s)
    return 0.5 * (p + p.T)


def _stabilizing_gain(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Initial stabilizing gain via Bass's construction.

    With beta exceeding the spectral abscissa of A, the Lyapunov solution of
    (A + beta I) Z + Z (A + beta I)^T = 2 B B^T is positive definite for a
    controllable pair and K = B^T Z^{-1} makes A - B K Hurwitz.
    """
    n = a.shape[0]
    beta = 1.0 + float(np.linalg.norm(a, "fro"))
    m = a + beta * np.eye(n)
    z = _solve_sylvester_sum(m, m.T, 2.0 * b @ b.T)
    z = 0.5 * (z + z.T)
    try:
        k0 = np.linalg.solve(z, b).T
    except np.linalg.LinAlgError as exc:
        raise NotStabilizable(f"could not seed the Riccati iteration: {exc}") from exc
    eigs = np.linalg.eigvals(a - b @ k0)
    if np.max(eigs.real) >= 0.0:
        raise NotStabilizable(
            f"seed gain does not stabilize the plant (max Re eig = {np.max(eigs.real):.3g})"
        )
    return k0


def care_residual(a, b, q, r, p) -> float:
    """Frobenius norm of A'P + PA - P B R^-1 B' P + Q."""
    rinv_bt_p = np.linalg.solve(r, b.T @ p)
    res = a.T @ p + p @ a - p @ b @ rinv_bt_p + q
    return float(np.linalg.norm(res, "fro"))


def care_solve(a: np.ndarray, b: np.ndarray, q: np.ndarray, r: np.ndarray) -> np.ndarray:
    """Stabilizing solution of the continuous algebraic Riccati equation by
    Newton-Kleinman iteration (quadratically convergent from a stabilizing
    seed). Raises NotStabilizable when the residual will not reach tolerance.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    q = np.asarray(q, dtype=np.float64)
    r = np.asarray(r, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise InvariantError(f"A must be square, got {a.shape}")
    if b.shape[0] != a.shape[0]:
        raise InvariantError(f"B rows must match A, got {b.shape}")
    try:
        np.linalg.cholesky(r)
    except np.linalg.LinAlgError as exc:
        raise InvariantError("R must be positive definite") from exc

    k = _stabilizing_gain(a, b)
    p = None
    for _ in range(_MAX_NEWTON_ITERS):
        acl = a - b @ k
        s = q + k.T @ r @ k
        p = _lyapunov(acl, s)
        if not np.all(np.isfinite(p)):
            raise NotStabilizable("Riccati iterate left the finite range")
        k = np.linalg.solve(r, b.T @ p)
        if care_residual(a, b, q, r, p) < RICCATI_TOL:
            return p
    raise NotStabilizable(
        f"Riccati residual stayed above {RICCATI_TOL} after {_MAX_NEWTON_ITERS} iterations"
    )


@dataclass(frozen=True)
class LqrGain:
    """State-feedback gain u = -k x with its Riccati certificate P."""

    k: np.ndarray
    p: np.ndarray


def lqr_design(a: np.ndarray, b: np.ndarray, q: np.ndarray, r: np.ndarray) -> LqrGain:
    """Design the attitude regulator; the returned closed loop is Hurwitz."""
    p = care_solve(a, b, q, r)
    k = np.linalg.solve(np.asarray(r, dtype=np.float64), np.asarray(b).T @ p)
    eigs = np.linalg.eigvals(np.asarray(a) - np.asarray(b) @ k)
    if np.max(eigs.real) >= 0.0:
        raise NotStabilizable(
            f"designed closed loop is not Hurwitz (max Re eig = {np.max(eigs.real):.3g})"
        )
    return LqrGain(k=k, p=p)


def lqr_control(gain: LqrGain, x, f_max: float) -> np.ndarray:
    """u = -k x, clamped per channel to the traction limit."""
    u = -gain.k @ np.asarray(x, dtype=np.float64)
    return np.clip(u, -f_max, f_max)


def desired_wheel_speed(v_des: float, wheel_radius: float) -> float:
    """Wheel rate in rev/s for an axial speed v_des: omega = v / (2 pi R)."""
    return v_des / (2.0 * math.pi * wheel_radius)


@dataclass(frozen=True)
class PidGains:
    kp: float = 1.5
    ki: float = 2.0
    kd: float = 0.0
    integral_limit: float = 10.0  # N, anti-windup clamp on the integral term

    def __post_init__(self):
        if self.integral_limit < 0.0:
            raise InvariantError("pid.integral_limit must be non-negative")


@dataclass(frozen=True)
class PidState:
    integral: float = 0.0
    last_error: float | None = None
    last_measured: float | None = None
    deriv_filtered: float = 0.0


def pid_step(gains: PidGains, setpoint: float, measured: float,
             state: PidState, dt: float) -> tuple[float, PidState]:
    """One PID update. Trapezoidal integral with anti-windup clamping;
    derivative acts on the measurement through a first-order filter with
    time constant 10*dt so setpoint steps do not kick the output.
    """
    error = setpoint - measured
    prev_error = error if state.last_error is None else state.last_error
    integral = state.integral + gains.ki * 0.5 * (error + prev_error) * dt
    integral = min(max(integral, -gains.integral_limit), gains.integral_limit)

    if state.last_measured is None:
        deriv_raw = 0.0
    else:
        deriv_raw = -(measured - state.last_measured) / dt
    tau = 10.0 * dt
    deriv = state.deriv_filtered + (dt / (tau + dt)) * (deriv_raw - state.deriv_filtered)

    output = gains.kp * error + integral + gains.kd * deriv
    return output, PidState(integral=integral, last_error=error,
                            last_measured=measured, deriv_filtered=deriv)


def phase1_control(gain: LqrGain, pid_gains: PidGains, v_des: float,
                   attitude, wheel_rates_revs, pid_states, dt: float,
                   wheel_radius: float, f_max: float,
                   feedforward=None) -> tuple[np.ndarray, tuple[PidState, ...]]:
    """Straight-run control: LQR attitude correction + per-wheel speed PIDs
    (+ the static gravity balance), summed and clamped per channel.
    """
    u = lqr_control(gain, attitude, f_max)
    setpoint = desired_wheel_speed(v_des, wheel_radius)
    forces = np.array(u, dtype=np.float64)
    if feedforward is not None:
        forces = forces + np.asarray(feedforward, dtype=np.float64)
    new_states = []
    for i in range(3):
        out, st = pid_step(pid_gains, setpoint, wheel_rates_revs[i], pid_states[i], dt)
        forces[i] += out
        new_states.append(st)
    return np.clip(forces, -f_max, f_max), tuple(new_states)


@dataclass(frozen=True)
class VvaCommand:
    """Per-wheel speed setpoints (rev/s) for a junction maneuver."""

    omega: tuple[float, float, float]


# Differential patterns: wheels 2 and 3 move together so no pitch torque is
# injected (the pitch axis feels exactly their force difference) and the sums
# cancel axially; the induced yaw sign matches the sign of desired_rotation.
_D_LEFT = (-2.0, 1.0, 1.0)
_D_RIGHT = (2.0, -1.0, -1.0)
_D_STRAIGHT = (0.0, 0.0, 0.0)


def vva_allocate(ct: ConfigurationType, base_omega: float, steer_gain: float,
                 omega_max: float) -> VvaCommand:
    """Variable-velocity allocation omega_i = base * (1 + steer_gain * d_i)."""
    if ct.desired_exit == "left":
        d = _D_LEFT
    elif ct.desired_exit == "right":
        d = _D_RIGHT
    else:
        d = _D_STRAIGHT
    omega = tuple(
        min(max(base_omega * (1.0 + steer_gain * di), -omega_max), omega_max)
        for di in d
    )
    return VvaCommand(omega=omega)


def phase2_control(command: VvaCommand, pid_gains: PidGains, wheel_rates_revs,
                   pid_states, dt: float, f_max: float,
                   feedforward=None) -> tuple[np.ndarray, tuple[PidState, ...]]:
    """Junction steering: per-wheel PIDs toward the allocated setpoints
    (+ the gravity balance), clamped per channel.
    """
    forces = np.zeros(3)
    if feedforward is not None:
        forces = forces + np.asarray(feedforward, dtype=np.float64)
    new_states = []
    for i in range(3):
        out, st = pid_step(pid_gains, command.omega[i], wheel_rates_revs[i],
                           pid_states[i], dt)
        forces[i] += out
        new_states.append(st)
    return np.clip(forces, -f_max, f_max), tuple(new_states)


def error_check(rotation_accum: float, desired: float, tol: float) -> bool:
    """True when the accumulated yaw is within tol of the desired rotation."""
    return abs(rotation_accum - desired) <= tol


class Mode(enum.Enum):
    STRAIGHT_CRUISE = "cruise"
    JUNCTION_STEER = "junction"
    TERMINAL_STOP = "stop"


@dataclass(frozen=True)
class SupervisorConfig:
    d_stop: float = 0.3556  # m, stop this far short of the route end
    d_switch: float | None = None  # m; None = one diameter of the current segment
    rotation_tol: float = 0.05  # rad, junction rotation error check band
    debounce_ticks: int = 1  # consecutive proximate readings required to trigger

    def __post_init__(self):
        if self.debounce_ticks < 1:
            raise InvariantError("supervisor.debounce_ticks must be >= 1")
        if self.rotation_tol <= 0.0:
            raise InvariantError("supervisor.rotation_tol must be positive")


@dataclass(frozen=True)
class SupervisorState:
    mode: Mode = Mode.STRAIGHT_CRUISE
    junction_index: int = 0
    rotation_accum: float = 0.0
    psi_entry: float = 0.0
    switch_count: int = 0
    stop_count: int = 0
    stop_distance: float | None = None  # sonar at TERMINAL_STOP entry
    rotation_errors: tuple[float, ...] = field(default_factory=tuple)


@dataclass(frozen=True)
class ModeCommand:
    """What the harness should run this tick."""

    mode: Mode
    ct: ConfigurationType | None = None  # set while steering a junction
    maneuver_completed: bool = False  # True on the tick a maneuver finishes


def supervisor_step(sup: SupervisorState, route: RouteMap, estimate: tuple[float, float],
                    sonar_distance: float, psi: float,
                    cfg: SupervisorConfig) -> tuple[SupervisorState, ModeCommand]:
    """Advance the supervisor one control tick.

    estimate is the localizer's (mean, variance) of the route coordinate.
    Cruise -> junction when either the sonar or the localized distance to
    the next feature comes within D_switch (all junctions not yet passed);
    the localized distance participates only while the estimate is trusted
    (std below D_switch), so an unconverged multi-modal posterior cannot
    fire a maneuver, while the sonar path always can. Junction -> cruise
    when the rotation error check passes; cruise -> terminal stop when past
    the last junction the sonar reads within D_stop of the route end.
    Terminal stop is absorbing.
    """
    est_mean, est_var = estimate
    if sup.mode is Mode.TERMINAL_STOP:
        return sup, ModeCommand(mode=Mode.TERMINAL_STOP)

    if sup.mode is Mode.JUNCTION_STEER:
        ct = ct_entry(route, sup.junction_index)
        accum = psi - sup.psi_entry
        if error_check(accum, ct.desired_rotation, cfg.rotation_tol):
            new = replace(
                sup,
                mode=Mode.STRAIGHT_CRUISE,
                junction_index=sup.junction_index + 1,
                rotation_accum=0.0,
                rotation_errors=sup.rotation_errors + (accum - ct.desired_rotation,),
            )
            return new, ModeCommand(mode=Mode.STRAIGHT_CRUISE, maneuver_completed=True)
        return replace(sup, rotation_accum=accum), ModeCommand(mode=Mode.JUNCTION_STEER, ct=ct)

    # StraightCruise
    total = route_length(route)
    s_hat = min(max(est_mean, 0.0), total)
    dist_est, feature = distance_to_next_feature(route, s_hat)

    if sup.junction_index < len(route.ct):
        if cfg.d_switch is not None:
            d_switch = cfg.d_switch
        else:
            seg_idx, _ = locate(route, s_hat)
            d_switch = route.segments[seg_idx].diameter
        estimate_trusted = est_var <= d_switch * d_switch
        proximity = min(sonar_distance, dist_est) if estimate_trusted else sonar_distance
        if proximity <= d_switch:
            count = sup.switch_count + 1
            if count >= cfg.debounce_ticks:
                ct = ct_entry(route, sup.junction_index)
                new = replace(sup, mode=Mode.JUNCTION_STEER, rotation_accum=0.0,
                              psi_entry=psi, switch_count=0, stop_count=0)
                return new, ModeCommand(mode=Mode.JUNCTION_STEER, ct=ct)
            return replace(sup, switch_count=count), ModeCommand(mode=Mode.STRAIGHT_CRUISE)
        return replace(sup, switch_count=0), ModeCommand(mode=Mode.STRAIGHT_CRUISE)

    if feature.kind == ROUTE_END and sonar_distance <= cfg.d_stop:
        count = sup.stop_count + 1
        if count >= cfg.debounce_ticks:
            new = replace(sup, mode=Mode.TERMINAL_STOP, stop_count=0,
                          stop_distance=sonar_distance)
            return new, ModeCommand(mode=Mode.TERMINAL_STOP)
        return replace(sup, stop_count=count), ModeCommand(mode=Mode.STRAIGHT_CRUISE)
    return replace(sup, stop_count=0), ModeCommand(mode=Mode.STRAIGHT_CRUISE)
