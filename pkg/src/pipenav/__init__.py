"""Smart navigation for an underactuated wall-press in-pipe robot.

Deterministic simulation of the full loop: nonlinear axial/pitch/yaw pipe
dynamics, a two-phase motion controller (LQR + per-wheel speed PIDs on
straight runs, differential wheel-speed allocation in junctions), a sonar
range sensor with outliers and censoring, and a particle filter that
localizes the robot along a route map of pipe segments and junction
configuration entries. Hot numeric kernels run on a compiled backend when
available, with a pure-Python fallback selected at import time (see
pipenav.kernels.backend_name / the PIPENAV_BACKEND environment variable).
"""

from .control import (
    LqrGain,
    Mode,
    ModeCommand,
    PidGains,
    PidState,
    SupervisorConfig,
    SupervisorState,
    VvaCommand,
    care_residual,
    care_solve,
    desired_wheel_speed,
    error_check,
    lqr_control,
    lqr_design,
    phase1_control,
    phase2_control,
    pid_step,
    supervisor_step,
    vva_allocate,
)
from .dynamics import (
    ArmConfig,
    Environment,
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
from .errors import (
    DegeneratePosterior,
    DegenerateWeights,
    GeometryError,
    InvariantError,
    NonFinite,
    NotNormalized,
    NotStabilizable,
    OutOfRoute,
    PipeNavError,
    SchemaError,
    SimulationDiverged,
)
from .estimation import (
    Particle,
    ParticleSet,
    PfConfig,
    effective_sample_size,
    grid_filter_oracle,
    kld_sample_size,
    pf_estimate,
    pf_init,
    pf_predict,
    pf_resample,
    pf_update,
)
from .kernels import backend_name
from .routemap import (
    ConfigurationType,
    Feature,
    PipeSegment,
    RouteMap,
    ct_entry,
    distance_to_next_feature,
    locate,
    parse_map,
    render_map,
    route_length,
)
from .scenario import ControlConfig, Scenario, load_scenario, parse_scenario
from .sensing import (
    OdometryModel,
    SonarModel,
    SonarReading,
    expected_range,
    measurement_likelihood,
    simulate_odometry,
    simulate_sonar,
)
from .simulate import (
    RunSummary,
    TraceRecord,
    monte_carlo,
    replicate_fig3,
    run_scenario,
    summary_to_dict,
)
from .traceio import TRACE_HEADER, emit_plots, read_trace, write_trace, write_summary

__version__ = "0.1.0"

__all__ = [
    "ArmConfig", "ConfigurationType", "ControlConfig", "DegeneratePosterior",
    "DegenerateWeights", "Environment", "Feature", "GeometryError", "InvariantError",
    "LqrGain", "Mode", "ModeCommand", "NonFinite", "NotNormalized", "NotStabilizable",
    "OdometryModel", "OutOfRoute", "Particle", "ParticleSet", "PfConfig", "PidGains",
    "PidState", "PipeNavError", "PipeSegment", "RobotParams", "RobotState", "RouteMap",
    "RunSummary", "Scenario", "SchemaError", "SimulationDiverged", "SonarModel",
    "SonarReading", "SupervisorConfig", "SupervisorState", "TRACE_HEADER", "TraceRecord",
    "VvaCommand", "WheelForces", "arm_angle_from_diameter", "axial_accel", "backend_name",
    "care_residual", "care_solve", "ct_entry", "desired_wheel_speed",
    "distance_to_next_feature", "drag_force", "effective_sample_size", "emit_plots",
    "error_check", "expected_range", "grid_filter_oracle", "gravity_feedforward",
    "kld_sample_size", "linearize", "load_scenario", "locate", "lqr_control",
    "lqr_design", "measurement_likelihood", "monte_carlo", "parse_map", "parse_scenario",
    "pf_estimate", "pf_init", "pf_predict", "pf_resample", "pf_update", "phase1_control",
    "phase2_control", "pid_step", "pitch_accel", "read_trace", "render_map",
    "replicate_fig3", "route_length", "run_scenario", "simulate_odometry",
    "simulate_sonar", "step", "summary_to_dict", "supervisor_step", "vva_allocate",
    "write_summary", "write_trace", "yaw_accel",
]
