"""Forward-facing ultrasonic ranging and wheel-encoder odometry models.

The sonar returns the distance to the first reflecting feature down the
pipe (a junction opening or the capped route end), corrupted by Gaussian
noise with a uniform outlier floor and clamped to the sensor's span.
Odometry reports per-tick arc-length increments with noise that scales
with distance traveled.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import InvariantError
from .routemap import RouteMap, distance_to_next_feature


@dataclass(frozen=True)
class SonarModel:
    sigma: float = 0.01  # m, range noise std dev
    min_range: float = 0.02  # m, lower clamp
    max_range: float = 4.0  # m, saturation
    outlier_prob: float = 0.05  # uniform outlier mixture weight

    def __post_init__(self):
        if not (0.0 <= self.min_range < self.max_range):
            raise InvariantError("sonar must satisfy 0 <= min_range < max_range")
        if self.sigma < 0.0:
            raise InvariantError("sonar.sigma must be non-negative")
        if not (0.0 <= self.outlier_prob <= 1.0):
            raise InvariantError("sonar.outlier_prob must lie in [0, 1]")


@dataclass(frozen=True)
class SonarReading:
    distance: float  # m, clamped to [min_range, max_range]
    saturated: bool  # True when the reading sits at max_range


@dataclass(frozen=True)
class OdometryModel:
    sigma_per_meter: float = 0.05  # noise std dev per meter traveled

    def __post_init__(self):
        if self.sigma_per_meter < 0.0:
            raise InvariantError("odometry.sigma_per_meter must be non-negative")


def expected_range(route: RouteMap, s: float, model: SonarModel) -> float:
    """Noise-free reading at s: distance to the next feature, clamped to span."""
    dist, _ = distance_to_next_feature(route, s)
    return min(max(dist, model.min_range), model.max_range)


def simulate_sonar(route: RouteMap, true_s: float, model: SonarModel,
                   rng: np.random.Generator) -> SonarReading:
    """Draw one reading. Outlier branch first, then Gaussian noise, then clamp."""
    expected = expected_range(route, true_s, model)
    if rng.random() < model.outlier_prob:
        distance = rng.uniform(model.min_range, model.max_range)
    else:
        distance = expected + rng.normal(0.0, model.sigma)
    distance = min(max(distance, model.min_range), model.max_range)
    return SonarReading(distance=distance, saturated=distance >= model.max_range)


def simulate_odometry(delta_s_true: float, model: OdometryModel,
                      rng: np.random.Generator) -> float:
    """Measured arc-length increment; exact when no distance was traveled."""
    noise = rng.normal(0.0, model.sigma_per_meter * abs(delta_s_true))
    return delta_s_true + noise


def likelihood_vector(z: SonarReading, expected: np.ndarray, model: SonarModel) -> np.ndarray:
    """p(z | expected) for an array of expected ranges (censored mixture)."""
    if model.sigma <= 0.0:
        raise InvariantError("measurement likelihood requires sonar.sigma > 0")
    floored = (not z.saturated) and z.distance <= model.min_range
    return kernels.sonar_likelihood(
        float(z.distance), bool(z.saturated), floored,
        np.asarray(expected, dtype=np.float64),
        model.sigma, model.outlier_prob, model.min_range, model.max_range,
    )


def measurement_likelihood(z: SonarReading, expected: float, model: SonarModel) -> float:
    """Scalar likelihood of reading z given a single expected range.

    Interior readings: (1 - outlier_prob) * N(z; expected, sigma^2) +
    outlier_prob * Uniform(min_range, max_range). Readings clamped at either
    end of the span carry the corresponding Gaussian tail mass instead of a
    density, so the model integrates to one over readings.
    """
    return float(likelihood_vector(z, np.array([expected]), model)[0])
