"""Closed-loop simulation driver.

Each control tick: read sensors (sonar + encoder odometry), run the particle
filter, advance the supervisor, evaluate the active phase controller, then
integrate the dynamics with sub-stepped RK4 under the held forces. The
controllers never see the true route coordinate; the supervisor works from
the sonar and the filter estimate.

Junctions are zero-arc-length events: while steering, route progress is
frozen and only the attitude integrates; on completion the coordinate is
placed at the downstream segment start and the skipped distance shows up in
the next odometry increment, keeping the filter consistent.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .control import (
    LqrGain,
    Mode,
    PidState,
    SupervisorState,
    desired_wheel_speed,
    lqr_design,
    phase1_control,
    phase2_control,
    supervisor_step,
    vva_allocate,
)
from .dynamics import (
    ArmConfig,
    Environment,
    RobotState,
    arm_angle_from_diameter,
    gravity_feedforward,
    linearize,
    step,
)
from .errors import DegenerateWeights, NonFinite, PipeNavError, SimulationDiverged
from .estimation import (
    ParticleSet,
    effective_sample_size,
    pf_estimate,
    pf_init,
    pf_predict,
    pf_resample,
    pf_update,
)
from .routemap import locate, route_length
from .scenario import Scenario
from .sensing import simulate_odometry, simulate_sonar

STOP_SPEED_EPS = 1e-3  # m/s, "settled" translational speed in TerminalStop
STOP_RATE_EPS = 1e-2  # rad/s, "settled" attitude rates


@dataclass(frozen=True)
class TraceRecord:
    """One control tick: state at controller time plus what was commanded."""

    t: float
    x: float
    x_dot: float
    phi: float
    phi_dot: float
    psi: float
    psi_dot: float
    mode: str
    junction_index: int
    sonar: float
    pf_mean: float
    pf_var: float
    n_particles: int
    forces: tuple[float, float, float]
    wheel_omega_revs: tuple[float, float, float]


@dataclass(frozen=True)
class RunSummary:
    settled_s: float | None  # time for |phi|,|psi| to stay inside the 5% band
    v_ss_mps: float  # mean velocity over the final 20% of the run
    stop_distance_m: float | None  # sonar at TerminalStop entry
    junctions_completed: int
    pf_final_error_m: float
    rotation_errors_rad: tuple[float, ...]
    pf_reinits: int
    ticks: int
    final_mode: str


@dataclass
class _SegmentContext:
    """Per-segment cached design: arms, environment, LQR gain, feedforward."""

    index: int
    arms: ArmConfig
    env: Environment
    gain: LqrGain
    feedforward: np.ndarray


def _segment_context(scn: Scenario, seg_idx: int) -> _SegmentContext:
    seg = scn.route.segments[seg_idx]
    arms = arm_angle_from_diameter(scn.robot, seg.diameter)
    env = scn.environment_for(seg_idx)
    a_mat, b_mat = linearize(scn.robot, env, arms)
    gain = lqr_design(a_mat, b_mat, np.diag(scn.control.q_diag), np.diag(scn.control.r_diag))
    ff = gravity_feedforward(scn.robot, env, arms)
    return _SegmentContext(index=seg_idx, arms=arms, env=env, gain=gain, feedforward=ff)


def run_scenario(scn: Scenario) -> tuple[list[TraceRecord], RunSummary]:
    """Simulate one scenario to completion. Deterministic given the seed."""
    route = scn.route
    total = route_length(route)
    n_ticks = int(round(scn.duration / scn.dt))
    rev = 1.0 / (2.0 * math.pi * scn.robot.wheel_radius)  # m/s -> rev/s

    ss = np.random.SeedSequence(scn.seed)
    sonar_rng, odo_rng, pf_rng = (np.random.default_rng(c) for c in ss.spawn(3))

    state = scn.initial
    seg_ctx = _segment_context(scn, locate(route, state.x)[0])
    sup = SupervisorState()
    pids: tuple[PidState, ...] = (PidState(), PidState(), PidState())
    pset = pf_init(route, scn.pf, pf_rng)
    prev_x = state.x
    held_speed = 0.0  # physical wheel surface speed while route progress is frozen
    pf_reinits = 0
    records: list[TraceRecord] = []

    for k in range(n_ticks):
        t = k * scn.dt
        in_maneuver = sup.mode is Mode.JUNCTION_STEER

        # --- sensors ---
        delta_true = state.x - prev_x
        prev_x = state.x
        u_odo = simulate_odometry(delta_true, scn.odometry, odo_rng)
        z = simulate_sonar(route, state.x, scn.sonar, sonar_rng)

        # --- localization (paused while rotating in a junction) ---
        if not in_maneuver:
            pset = pf_predict(pset, u_odo, scn.odometry, scn.pf, route, pf_rng)
            try:
                pset, _ = pf_update(pset, z, route, scn.sonar)
            except DegenerateWeights:
                pf_reinits += 1
                pset = pf_init(route, scn.pf, pf_rng)
                try:
                    pset, _ = pf_update(pset, z, route, scn.sonar)
                except DegenerateWeights:
                    pass  # keep the uniform reinit; next reading decides
            if effective_sample_size(pset) < scn.pf.ess_threshold * len(pset):
                pset = pf_resample(pset, scn.pf, route, pf_rng)
        pf_mean, pf_var = pf_estimate(pset)

        # --- supervision ---
        prev_mode = sup.mode
        sup, command = supervisor_step(sup, route, (pf_mean, pf_var), z.distance,
                                       state.psi, scn.supervisor)
        if command.mode is Mode.JUNCTION_STEER and prev_mode is Mode.STRAIGHT_CRUISE:
            held_speed = state.x_dot
            state = replace(state, x_dot=0.0)
            pids = (PidState(), PidState(), PidState())
        elif command.maneuver_completed:
            # Re-seat in the downstream segment: the coordinate jumps to the
            # segment start, the heading is rebased so only the rotation
            # residual remains, and the wall press absorbs the maneuver's
            # body rates.
            boundary = route.boundaries[sup.junction_index - 1]
            finished = route.ct[sup.junction_index - 1]
            state = replace(state, x=boundary, x_dot=held_speed,
                            psi=state.psi - finished.desired_rotation,
                            phi_dot=0.0, psi_dot=0.0)
            pids = (PidState(), PidState(), PidState())
            seg_ctx = _segment_context(scn, sup.junction_index)
        elif command.mode is Mode.TERMINAL_STOP and prev_mode is not Mode.TERMINAL_STOP:
            pids = (PidState(), PidState(), PidState())

        # --- phase controller ---
        attitude = (state.phi, state.phi_dot, state.psi, state.psi_dot)
        if command.mode is Mode.JUNCTION_STEER:
            rates = (held_speed * rev,) * 3
            base = desired_wheel_speed(scn.control.v_des, scn.robot.wheel_radius)
            vva = vva_allocate(command.ct, base, scn.control.steer_gain,
                               scn.control.omega_max)
            forces, pids = phase2_control(vva, scn.control.pid, rates, pids, scn.dt,
                                          scn.robot.f_max, seg_ctx.feedforward)
            wheel_revs = rates
        else:
            v_des = 0.0 if command.mode is Mode.TERMINAL_STOP else scn.control.v_des
            rate = state.x_dot * rev
            rates = (rate, rate, rate)
            forces, pids = phase1_control(seg_ctx.gain, scn.control.pid, v_des, attitude,
                                          rates, pids, scn.dt, scn.robot.wheel_radius,
                                          scn.robot.f_max, seg_ctx.feedforward)
            wheel_revs = rates

        records.append(TraceRecord(
            t=t, x=state.x, x_dot=state.x_dot, phi=state.phi, phi_dot=state.phi_dot,
            psi=state.psi, psi_dot=state.psi_dot, mode=command.mode.value,
            junction_index=sup.junction_index, sonar=z.distance, pf_mean=pf_mean,
            pf_var=pf_var, n_particles=len(pset),
            forces=(float(forces[0]), float(forces[1]), float(forces[2])),
            wheel_omega_revs=(float(wheel_revs[0]), float(wheel_revs[1]),
                              float(wheel_revs[2])),
        ))

        # --- dynamics ---
        try:
            state = step(scn.robot, seg_ctx.env, seg_ctx.arms, forces, state, scn.dt,
                         substeps=scn.substeps,
                         attitude_only=command.mode is Mode.JUNCTION_STEER)
        except NonFinite as exc:
            raise SimulationDiverged(f"tick {k} (t={t:.3f}s): {exc}", tick=k) from exc
        # The route is closed: its ends act as hard stops for the simulation.
        if command.mode is not Mode.JUNCTION_STEER:
            if state.x > total:
                state = replace(state, x=total, x_dot=min(state.x_dot, 0.0))
            elif state.x < 0.0:
                state = replace(state, x=0.0, x_dot=max(state.x_dot, 0.0))

        if (command.mode is Mode.TERMINAL_STOP
                and abs(state.x_dot) <= STOP_SPEED_EPS
                and abs(state.phi_dot) <= STOP_RATE_EPS
                and abs(state.psi_dot) <= STOP_RATE_EPS):
            break

    summary = _summarize(scn, records, sup, pf_reinits)
    return records, summary


def _summarize(scn: Scenario, records: list[TraceRecord], sup: SupervisorState,
               pf_reinits: int) -> RunSummary:
    initial_dev = max(abs(scn.initial.phi), abs(scn.initial.psi))
    settled: float | None
    if initial_dev == 0.0:
        settled = 0.0
    else:
        band = 0.05 * initial_dev
        last_violation = None
        for rec in records:
            if abs(rec.phi) > band or abs(rec.psi) > band:
                last_violation = rec.t
        if last_violation is None:
            settled = 0.0  # never left the band
        elif last_violation >= records[-1].t:
            settled = None  # still outside the band at the end of the run
        else:
            settled = last_violation + scn.dt  # first sample after the last exit

    t_end = records[-1].t
    tail = [rec.x_dot for rec in records if rec.t >= 0.8 * t_end]
    v_ss = float(np.mean(tail)) if tail else float(records[-1].x_dot)

    last = records[-1]
    return RunSummary(
        settled_s=settled,
        v_ss_mps=v_ss,
        stop_distance_m=sup.stop_distance,
        junctions_completed=len(sup.rotation_errors),
        pf_final_error_m=abs(last.pf_mean - last.x),
        rotation_errors_rad=sup.rotation_errors,
        pf_reinits=pf_reinits,
        ticks=len(records),
        final_mode=last.mode,
    )


def replicate_fig3(scn: Scenario, out_dir=None) -> RunSummary:
    """Run the straight-pipe stabilization experiment and report the settling
    and steady-state velocity metrics; optionally write the trace, summary
    and plots into out_dir.
    """
    records, summary = run_scenario(scn)
    if out_dir is not None:
        from . import traceio

        out = traceio.ensure_dir(out_dir)
        traceio.write_trace(records, out / "trace.csv")
        traceio.write_summary(summary, out / "summary.json")
        traceio.emit_plots(records, out)
    return summary


def summary_to_dict(summary: RunSummary) -> dict:
    return {
        "settled_s": summary.settled_s,
        "v_ss_mps": summary.v_ss_mps,
        "stop_distance_m": summary.stop_distance_m,
        "junctions_completed": summary.junctions_completed,
        "pf_final_error_m": summary.pf_final_error_m,
        "rotation_errors_rad": list(summary.rotation_errors_rad),
        "pf_reinits": summary.pf_reinits,
        "ticks": summary.ticks,
        "final_mode": summary.final_mode,
    }


def monte_carlo(scn: Scenario, trials: int, seed_base: int,
                error_threshold_m: float | None = None) -> dict:
    """Run `trials` seeded replicas and aggregate the summary metrics.

    Per-run failures are recorded, not raised, so one divergent seed does not
    void the batch. Deterministic given (scenario, trials, seed_base).
    """
    if trials < 1:
        raise PipeNavError("monte_carlo needs at least one trial")
    if error_threshold_m is None:
        error_threshold_m = 0.1 * min(seg.length for seg in scn.route.segments)

    summaries: list[RunSummary] = []
    failures: list[dict] = []
    for i in range(trials):
        seeded = replace(scn, seed=seed_base + i)
        try:
            _, summary = run_scenario(seeded)
            summaries.append(summary)
        except PipeNavError as exc:
            failures.append({"seed": seed_base + i, "error": f"{type(exc).__name__}: {exc}"})

    def agg(values):
        arr = np.array([v for v in values if v is not None], dtype=np.float64)
        if arr.size == 0:
            return None
        q25, q50, q75 = np.percentile(arr, [25, 50, 75])
        return {
            "mean": float(np.mean(arr)),
            "std": float(np.std(arr)),
            "min": float(np.min(arr)),
            "q25": float(q25),
            "median": float(q50),
            "q75": float(q75),
            "max": float(np.max(arr)),
            "count": int(arr.size),
        }

    pf_errors = [s.pf_final_error_m for s in summaries]
    report = {
        "trials": trials,
        "seed_base": seed_base,
        "completed": len(summaries),
        "failures": failures,
        "metrics": {
            "settled_s": agg([s.settled_s for s in summaries]),
            "v_ss_mps": agg([s.v_ss_mps for s in summaries]),
            "stop_distance_m": agg([s.stop_distance_m for s in summaries]),
            "junctions_completed": agg([float(s.junctions_completed) for s in summaries]),
            "pf_final_error_m": agg(pf_errors),
        },
        "pf_error_threshold_m": error_threshold_m,
        "pf_error_below_threshold_fraction": (
            float(np.mean([e < error_threshold_m for e in pf_errors])) if pf_errors else None
        ),
    }
    return report
