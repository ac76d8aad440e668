"""Shared fixtures: canonical routes, models, and scenario paths."""

from __future__ import annotations

import math
from pathlib import Path

import pytest

from pipenav import (
    ArmConfig,
    ConfigurationType,
    Environment,
    OdometryModel,
    PipeSegment,
    RobotParams,
    RouteMap,
    SonarModel,
    arm_angle_from_diameter,
)

SCENARIO_DIR = Path(__file__).resolve().parent.parent / "scenarios"

PIPE_14IN = 0.3556  # 14-inch pipe bore in metres


@pytest.fixture
def params() -> RobotParams:
    return RobotParams()


@pytest.fixture
def env() -> Environment:
    return Environment(flow_velocity=0.0, inclination=0.0)


@pytest.fixture
def arms(params) -> ArmConfig:
    return arm_angle_from_diameter(params, PIPE_14IN)


@pytest.fixture
def single_segment_route() -> RouteMap:
    return RouteMap(segments=(PipeSegment(length=5.0, diameter=PIPE_14IN),), ct=())


@pytest.fixture
def two_segment_route() -> RouteMap:
    return RouteMap(
        segments=(
            PipeSegment(length=2.0, diameter=PIPE_14IN),
            PipeSegment(length=3.0, diameter=PIPE_14IN),
        ),
        ct=(ConfigurationType(kind="bend", desired_exit="left", desired_rotation=math.pi / 2),),
    )


@pytest.fixture
def three_segment_route() -> RouteMap:
    return RouteMap(
        segments=(
            PipeSegment(length=2.0, diameter=PIPE_14IN),
            PipeSegment(length=2.5, diameter=PIPE_14IN),
            PipeSegment(length=2.0, diameter=PIPE_14IN),
        ),
        ct=(
            ConfigurationType(kind="bend", desired_exit="left", desired_rotation=math.pi / 2),
            ConfigurationType(kind="t_junction", desired_exit="right", desired_rotation=-math.pi / 2),
        ),
    )


@pytest.fixture
def sonar_model() -> SonarModel:
    return SonarModel(sigma=0.05, min_range=0.02, max_range=4.0, outlier_prob=0.05)


@pytest.fixture
def clean_sonar_model() -> SonarModel:
    return SonarModel(sigma=0.01, min_range=0.02, max_range=4.0, outlier_prob=0.0)


@pytest.fixture
def odometry_model() -> OdometryModel:
    return OdometryModel(sigma_per_meter=0.05)


@pytest.fixture
def scenario_dir() -> Path:
    return SCENARIO_DIR
