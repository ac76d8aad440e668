"""Arc-length localization: particle filter with a discrete-grid oracle.

The state is the scalar route coordinate s. Prediction shifts particles by
the measured odometry increment plus travel-scaled noise (with a floor so a
stationary filter keeps exploring); the update reweights by the sonar
likelihood against each particle's expected range. Resampling is
low-variance systematic with a KLD-style adaptive particle count: fewer
particles once the weighted population concentrates in few bins.

grid_filter_oracle implements the same Bayes recursion exactly on a fixed
grid; the filter is validated against it rather than against itself.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from statistics import NormalDist

import numpy as np
from scipy.special import ndtr

from . import kernels
from .errors import (
    DegeneratePosterior,
    DegenerateWeights,
    InvariantError,
    NotNormalized,
)
from .routemap import RouteMap, route_length
from .sensing import OdometryModel, SonarModel, SonarReading, likelihood_vector


@dataclass(frozen=True)
class Particle:
    """A single hypothesis: route coordinate and normalized weight."""

    s: float
    w: float


@dataclass(frozen=True)
class ParticleSet:
    """Weighted particle population. Arrays are treated as immutable."""

    s: np.ndarray
    w: np.ndarray
    normalized: bool

    def __post_init__(self):
        if len(self.s) < 1 or len(self.s) != len(self.w):
            raise InvariantError("particle set needs matching non-empty s and w arrays")

    def __len__(self) -> int:
        return len(self.s)

    def particles(self) -> list[Particle]:
        return [Particle(float(s), float(w)) for s, w in zip(self.s, self.w)]


@dataclass(frozen=True)
class PfConfig:
    n_init: int = 2000
    n_min: int = 200
    n_max: int = 10000
    ess_threshold: float = 0.5  # resample when ESS/N drops below this
    motion_sigma_floor: float = 0.001  # m, minimum prediction noise
    kld_bin: float = 0.05  # m, occupancy histogram bin
    kld_epsilon: float = 0.05
    kld_delta: float = 0.01

    def __post_init__(self):
        if not (1 <= self.n_min <= self.n_max):
            raise InvariantError("pf requires 1 <= n_min <= n_max")
        if not (self.n_min <= self.n_init <= self.n_max):
            raise InvariantError("pf.n_init must lie in [n_min, n_max]")
        if not (0.0 < self.ess_threshold <= 1.0):
            raise InvariantError("pf.ess_threshold must lie in (0, 1]")
        if self.kld_bin <= 0.0 or self.kld_epsilon <= 0.0 or not (0.0 < self.kld_delta < 1.0):
            raise InvariantError("pf KLD parameters out of range")
        if self.motion_sigma_floor < 0.0:
            raise InvariantError("pf.motion_sigma_floor must be non-negative")


def pf_init(route: RouteMap, config: PfConfig, rng: np.random.Generator) -> ParticleSet:
    """Uniform population over the whole route with equal weights."""
    total = route_length(route)
    s = rng.uniform(0.0, total, config.n_init)
    w = np.full(config.n_init, 1.0 / config.n_init)
    return ParticleSet(s=s, w=w, normalized=True)


def pf_predict(pset: ParticleSet, u: float, odo: OdometryModel, config: PfConfig,
               route: RouteMap, rng: np.random.Generator) -> ParticleSet:
    """Shift every particle by the odometry increment plus motion noise,
    clamped to the route. Weights are untouched.
    """
    sigma = max(odo.sigma_per_meter * abs(u), config.motion_sigma_floor)
    noise = rng.normal(0.0, sigma, len(pset))
    s = kernels.shift_clamp(np.asarray(pset.s, dtype=np.float64), float(u),
                            noise, 0.0, route_length(route))
    return ParticleSet(s=s, w=pset.w, normalized=pset.normalized)


def _expected_ranges(route: RouteMap, s: np.ndarray, sonar: SonarModel) -> np.ndarray:
    bounds = np.array(route.boundaries, dtype=np.float64)
    dist = kernels.ranges_to_next_feature(np.asarray(s, dtype=np.float64), bounds)
    return np.clip(dist, sonar.min_range, sonar.max_range)


def pf_update(pset: ParticleSet, z: SonarReading, route: RouteMap,
              sonar: SonarModel) -> tuple[ParticleSet, float]:
    """Importance update: w_i *= p(z | s_i), then normalize.

    Returns the new set and the pre-normalization mass eta. Raises
    DegenerateWeights when every particle is incompatible with the reading.
    """
    expected = _expected_ranges(route, pset.s, sonar)
    lik = likelihood_vector(z, expected, sonar)
    w = np.array(pset.w, dtype=np.float64, copy=True)
    eta = kernels.weights_mul_norm(w, np.asarray(lik, dtype=np.float64))
    if not (eta > 0.0 and math.isfinite(eta)):
        raise DegenerateWeights(f"measurement update produced total mass {eta}")
    return ParticleSet(s=pset.s, w=w, normalized=True), eta


def effective_sample_size(pset: ParticleSet) -> float:
    """ESS = 1 / sum(w^2); requires normalized weights."""
    if not pset.normalized:
        raise NotNormalized("effective_sample_size needs normalized weights")
    return float(1.0 / np.sum(np.square(pset.w)))


def kld_sample_size(occupied: int, epsilon: float, delta: float) -> int:
    """Particle count needed so the sampled histogram stays within epsilon
    KLD of the truth with confidence 1 - delta, given the occupied bin count
    (Wilson-Hilferty chi-square approximation).
    """
    if occupied <= 1:
        return 1
    k = occupied
    z = NormalDist().inv_cdf(1.0 - delta)
    a = 2.0 / (9.0 * (k - 1))
    n = (k - 1) / (2.0 * epsilon) * (1.0 - a + math.sqrt(a) * z) ** 3
    return int(math.ceil(n))


def pf_resample(pset: ParticleSet, config: PfConfig, route: RouteMap,
                rng: np.random.Generator) -> ParticleSet:
    """Systematic (low-variance) resampling with KLD-adaptive output size."""
    if not pset.normalized:
        raise NotNormalized("pf_resample needs normalized weights")
    occupied = kernels.occupied_bins(
        np.asarray(pset.s, dtype=np.float64), np.asarray(pset.w, dtype=np.float64),
        0.0, config.kld_bin, route_length(route))
    n_new = min(max(kld_sample_size(occupied, config.kld_epsilon, config.kld_delta),
                    config.n_min), config.n_max)
    u0 = rng.random()
    idx = kernels.systematic_indices(np.asarray(pset.w, dtype=np.float64), n_new, u0)
    s = np.asarray(pset.s, dtype=np.float64)[idx]
    w = np.full(n_new, 1.0 / n_new)
    return ParticleSet(s=s, w=w, normalized=True)


def pf_estimate(pset: ParticleSet) -> tuple[float, float]:
    """Weighted posterior mean and variance of the route coordinate."""
    if not pset.normalized:
        raise NotNormalized("pf_estimate needs normalized weights")
    mean = float(np.sum(pset.w * pset.s))
    var = float(np.sum(pset.w * np.square(pset.s - mean)))
    return mean, var


def grid_filter_oracle(route: RouteMap, prior: np.ndarray, u: float, z: SonarReading,
                       sonar: SonarModel, odo: OdometryModel,
                       motion_sigma_floor: float, cell: float = 0.01) -> np.ndarray:
    """One exact discrete Bayes step on a fixed grid of cell width `cell`.

    Prediction convolves the prior with the clamped Gaussian motion kernel
    (boundary cells absorb the clipped tails, matching the particle clamp);
    the update multiplies by the measurement likelihood at each cell center
    and renormalizes.
    """
    total = route_length(route)
    n = int(round(total / cell))
    prior = np.asarray(prior, dtype=np.float64)
    if prior.shape != (n,):
        raise InvariantError(f"prior must have {n} cells for cell={cell}, got {prior.shape}")
    if np.any(prior < 0.0):
        raise InvariantError("prior must be non-negative")

    centers = (np.arange(n) + 0.5) * cell
    sigma = max(odo.sigma_per_meter * abs(u), motion_sigma_floor)
    if sigma == 0.0:
        target = np.clip(np.floor((centers + u) / cell).astype(np.int64), 0, n - 1)
        pred = np.zeros(n)
        np.add.at(pred, target, prior)
    else:
        edges = np.arange(n + 1) * cell
        mu = centers + u
        cdf = ndtr((edges[None, :] - mu[:, None]) / sigma)
        mass = np.diff(cdf, axis=1)
        mass[:, 0] += cdf[:, 0]  # clamp: everything below s=0 piles into cell 0
        mass[:, -1] += 1.0 - cdf[:, -1]  # and above s=total into the last cell
        pred = prior @ mass

    expected = _expected_ranges(route, centers, sonar)
    lik = likelihood_vector(z, expected, sonar)
    post = pred * lik
    mass_total = float(np.sum(post))
    if not (mass_total > 0.0 and math.isfinite(mass_total)):
        raise DegeneratePosterior(f"grid posterior mass is {mass_total}")
    return post / mass_total
