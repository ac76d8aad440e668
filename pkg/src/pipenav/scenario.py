"""Scenario files: everything a run needs, in one strict JSON document.

Every block is optional except the map, duration and seed; omitted keys take
the documented defaults. Unknown keys are rejected everywhere so typos fail
loudly instead of silently running a different experiment.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

from .control import PidGains, SupervisorConfig
from .dynamics import Environment, RobotParams, RobotState
from .errors import InvariantError, SchemaError
from .estimation import PfConfig
from .routemap import RouteMap, parse_map, route_length
from .sensing import OdometryModel, SonarModel

SCENARIO_VERSION = 1


@dataclass(frozen=True)
class ControlConfig:
    q_diag: tuple[float, float, float, float] = (10.0, 1.0, 10.0, 1.0)
    r_diag: tuple[float, float, float] = (1.0, 1.0, 1.0)
    pid: PidGains = field(default_factory=PidGains)
    v_des: float = 0.1  # m/s cruise speed
    steer_gain: float = 0.5  # VVA differential fraction
    omega_max: float = 3.0  # rev/s wheel speed limit

    def __post_init__(self):
        if self.v_des < 0.0:
            raise InvariantError("control.v_des_mps must be non-negative")
        if self.omega_max <= 0.0:
            raise InvariantError("control.omega_max_revs must be positive")


@dataclass(frozen=True)
class Scenario:
    route: RouteMap
    robot: RobotParams
    flow_velocity: float
    sonar: SonarModel
    odometry: OdometryModel
    pf: PfConfig
    control: ControlConfig
    supervisor: SupervisorConfig
    initial: RobotState
    duration: float
    dt: float
    substeps: int
    seed: int

    def __post_init__(self):
        if not (0.0 < self.dt <= 0.1):
            raise InvariantError("scenario.dt_s must lie in (0, 0.1]")
        if self.duration < self.dt:
            raise InvariantError("scenario.duration_s must be at least one tick")
        if self.substeps < 1:
            raise InvariantError("scenario.substeps must be >= 1")
        total = route_length(self.route)
        if not (0.0 <= self.initial.x <= total):
            raise InvariantError(f"initial.x_m = {self.initial.x} outside the route [0, {total}]")

    def environment_for(self, segment_index: int) -> Environment:
        seg = self.route.segments[segment_index]
        return Environment(inclination=seg.inclination, flow_velocity=self.flow_velocity)


def _check_keys(doc: dict, allowed: set[str], where: str) -> None:
    for key in doc:
        if key not in allowed:
            raise SchemaError(f"unknown key {key!r} in {where}")


def _number(doc: dict, key: str, default: float, where: str) -> float:
    if key not in doc:
        return default
    value = doc[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise SchemaError(f"{where}.{key} must be a number")
    return float(value)


def _integer(doc: dict, key: str, default: int, where: str) -> int:
    if key not in doc:
        return default
    value = doc[key]
    if isinstance(value, bool) or not isinstance(value, int):
        raise SchemaError(f"{where}.{key} must be an integer")
    return value


def parse_scenario(doc: dict) -> Scenario:
    if not isinstance(doc, dict):
        raise SchemaError("scenario document must be an object")
    _check_keys(doc, {"version", "map", "robot", "env", "sonar", "odometry", "pf",
                      "control", "supervisor", "initial", "duration_s", "dt_s",
                      "substeps", "seed"}, "scenario")
    for key in ("map", "duration_s", "seed"):
        if key not in doc:
            raise SchemaError(f"missing key {key!r} in scenario")
    if doc.get("version", SCENARIO_VERSION) != SCENARIO_VERSION:
        raise SchemaError(f"scenario.version must be {SCENARIO_VERSION}")

    route = parse_map(doc["map"])

    robot_doc = doc.get("robot", {})
    if not isinstance(robot_doc, dict):
        raise SchemaError("scenario.robot must be an object")
    _check_keys(robot_doc, {"mass_kg", "arm_length_m", "wheel_radius_m", "inertia_yy",
                            "inertia_zz", "gravity", "drag_coeff", "frontal_area_m2",
                            "fluid_density", "body_radius_m", "f_max_n"}, "robot")
    defaults = RobotParams()
    robot = RobotParams(
        mass=_number(robot_doc, "mass_kg", defaults.mass, "robot"),
        arm_length=_number(robot_doc, "arm_length_m", defaults.arm_length, "robot"),
        wheel_radius=_number(robot_doc, "wheel_radius_m", defaults.wheel_radius, "robot"),
        inertia_yy=_number(robot_doc, "inertia_yy", defaults.inertia_yy, "robot"),
        inertia_zz=_number(robot_doc, "inertia_zz", defaults.inertia_zz, "robot"),
        gravity=_number(robot_doc, "gravity", defaults.gravity, "robot"),
        drag_coeff=_number(robot_doc, "drag_coeff", defaults.drag_coeff, "robot"),
        frontal_area=_number(robot_doc, "frontal_area_m2", defaults.frontal_area, "robot"),
        fluid_density=_number(robot_doc, "fluid_density", defaults.fluid_density, "robot"),
        body_radius=_number(robot_doc, "body_radius_m", defaults.body_radius, "robot"),
        f_max=_number(robot_doc, "f_max_n", defaults.f_max, "robot"),
    )

    env_doc = doc.get("env", {})
    if not isinstance(env_doc, dict):
        raise SchemaError("scenario.env must be an object")
    _check_keys(env_doc, {"flow_velocity_mps"}, "env")
    flow = _number(env_doc, "flow_velocity_mps", 0.0, "env")

    sonar_doc = doc.get("sonar", {})
    _check_keys(sonar_doc, {"sigma_m", "min_range_m", "max_range_m", "outlier_prob"}, "sonar")
    sd = SonarModel()
    sonar = SonarModel(
        sigma=_number(sonar_doc, "sigma_m", sd.sigma, "sonar"),
        min_range=_number(sonar_doc, "min_range_m", sd.min_range, "sonar"),
        max_range=_number(sonar_doc, "max_range_m", sd.max_range, "sonar"),
        outlier_prob=_number(sonar_doc, "outlier_prob", sd.outlier_prob, "sonar"),
    )

    odo_doc = doc.get("odometry", {})
    _check_keys(odo_doc, {"sigma_per_meter"}, "odometry")
    odometry = OdometryModel(
        sigma_per_meter=_number(odo_doc, "sigma_per_meter", OdometryModel().sigma_per_meter,
                                "odometry"))

    pf_doc = doc.get("pf", {})
    _check_keys(pf_doc, {"n_init", "n_min", "n_max", "ess_threshold",
                         "motion_sigma_floor_m", "kld_bin_m", "kld_epsilon", "kld_delta"}, "pf")
    pd = PfConfig()
    pf = PfConfig(
        n_init=_integer(pf_doc, "n_init", pd.n_init, "pf"),
        n_min=_integer(pf_doc, "n_min", pd.n_min, "pf"),
        n_max=_integer(pf_doc, "n_max", pd.n_max, "pf"),
        ess_threshold=_number(pf_doc, "ess_threshold", pd.ess_threshold, "pf"),
        motion_sigma_floor=_number(pf_doc, "motion_sigma_floor_m", pd.motion_sigma_floor, "pf"),
        kld_bin=_number(pf_doc, "kld_bin_m", pd.kld_bin, "pf"),
        kld_epsilon=_number(pf_doc, "kld_epsilon", pd.kld_epsilon, "pf"),
        kld_delta=_number(pf_doc, "kld_delta", pd.kld_delta, "pf"),
    )

    ctrl_doc = doc.get("control", {})
    _check_keys(ctrl_doc, {"q_diag", "r_diag", "pid", "v_des_mps", "steer_gain",
                           "omega_max_revs"}, "control")
    cd = ControlConfig()
    q_diag = ctrl_doc.get("q_diag", list(cd.q_diag))
    r_diag = ctrl_doc.get("r_diag", list(cd.r_diag))
    if not (isinstance(q_diag, (list, tuple)) and len(q_diag) == 4):
        raise SchemaError("control.q_diag must be a 4-element array")
    if not (isinstance(r_diag, (list, tuple)) and len(r_diag) == 3):
        raise SchemaError("control.r_diag must be a 3-element array")
    pid_doc = ctrl_doc.get("pid", {})
    _check_keys(pid_doc, {"kp", "ki", "kd", "integral_limit_n"}, "control.pid")
    pgd = PidGains()
    pid = PidGains(
        kp=_number(pid_doc, "kp", pgd.kp, "control.pid"),
        ki=_number(pid_doc, "ki", pgd.ki, "control.pid"),
        kd=_number(pid_doc, "kd", pgd.kd, "control.pid"),
        integral_limit=_number(pid_doc, "integral_limit_n", pgd.integral_limit, "control.pid"),
    )
    control = ControlConfig(
        q_diag=tuple(float(v) for v in q_diag),
        r_diag=tuple(float(v) for v in r_diag),
        pid=pid,
        v_des=_number(ctrl_doc, "v_des_mps", cd.v_des, "control"),
        steer_gain=_number(ctrl_doc, "steer_gain", cd.steer_gain, "control"),
        omega_max=_number(ctrl_doc, "omega_max_revs", cd.omega_max, "control"),
    )

    sup_doc = doc.get("supervisor", {})
    _check_keys(sup_doc, {"d_stop_m", "d_switch_m", "rotation_tol_rad", "debounce_ticks"},
                "supervisor")
    sup_defaults = SupervisorConfig()
    d_switch = sup_doc.get("d_switch_m", None)
    if d_switch is not None and (isinstance(d_switch, bool) or not isinstance(d_switch, (int, float))):
        raise SchemaError("supervisor.d_switch_m must be a number or null")
    supervisor = SupervisorConfig(
        d_stop=_number(sup_doc, "d_stop_m", sup_defaults.d_stop, "supervisor"),
        d_switch=None if d_switch is None else float(d_switch),
        rotation_tol=_number(sup_doc, "rotation_tol_rad", sup_defaults.rotation_tol, "supervisor"),
        debounce_ticks=_integer(sup_doc, "debounce_ticks", sup_defaults.debounce_ticks,
                                "supervisor"),
    )

    init_doc = doc.get("initial", {})
    _check_keys(init_doc, {"x_m", "x_dot_mps", "phi_rad", "phi_dot_rads",
                           "psi_rad", "psi_dot_rads"}, "initial")
    initial = RobotState(
        x=_number(init_doc, "x_m", 0.0, "initial"),
        x_dot=_number(init_doc, "x_dot_mps", 0.0, "initial"),
        phi=_number(init_doc, "phi_rad", 0.0, "initial"),
        phi_dot=_number(init_doc, "phi_dot_rads", 0.0, "initial"),
        psi=_number(init_doc, "psi_rad", 0.0, "initial"),
        psi_dot=_number(init_doc, "psi_dot_rads", 0.0, "initial"),
    )

    duration = _number(doc, "duration_s", 0.0, "scenario")
    dt = _number(doc, "dt_s", 0.01, "scenario")
    substeps = _integer(doc, "substeps", 10, "scenario")
    seed = _integer(doc, "seed", 0, "scenario")

    return Scenario(route=route, robot=robot, flow_velocity=flow, sonar=sonar,
                    odometry=odometry, pf=pf, control=control, supervisor=supervisor,
                    initial=initial, duration=duration, dt=dt, substeps=substeps,
                    seed=seed)


def load_scenario(path: str | Path) -> Scenario:
    """Read and validate a scenario JSON file."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise SchemaError(f"cannot read scenario file {path}: {exc}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"scenario file {path} is not valid JSON: {exc}") from exc
    return parse_scenario(doc)
