"""Reference kernel implementations (numpy / plain Python).

This module defines the semantics of every hot kernel. The compiled
extension in _native.pyx mirrors these functions operation-for-operation;
both consume pre-drawn random arrays so a given seed produces the same
behavior on either backend. Reductions may differ from the compiled build
in the last ulp (numpy sums pairwise), which is why cross-backend tests
compare at tolerance.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.special import ndtr

NAME = "python"

_SQRT3_2 = math.sqrt(3.0) / 2.0


def rk4_advance(y, forces, coeff, dt, n_steps, attitude_only=False):
    """Advance the 6-state (x, x_dot, phi, phi_dot, psi, psi_dot) by n_steps
    RK4 steps of size dt under constant wheel forces.

    coeff = (m, L, iyy, izz, g, sin_a, cos_a, c1, c2, c3, s1, kdrag, vflow)
    where c_i = cos(theta_i), s1 = sin(theta_1) and kdrag = 0.5*rho*Cd*A.
    attitude_only freezes x and x_dot (junction maneuver integration).
    """
    m, length, iyy, izz, g, sin_a, cos_a, c1, c2, c3, s1, kdrag, vflow = coeff
    f1, f2, f3 = forces
    x, xd, phi, phid, psi, psid = (float(v) for v in y)

    # Forces are held over the step, so the angular accelerations are constants.
    phi_dd = _SQRT3_2 * length * (f3 * c3 - f2 * c2) / iyy
    psi_dd = (length * (0.5 * f3 * c3 + _SQRT3_2 * f2 * c2 - f1 * c1)
              - m * g * cos_a * length * s1) / izz
    f_sum = f1 + f2 + f3
    axial_bias = f_sum - m * g * sin_a

    def xdd(v):
        rel = v - vflow
        return (axial_bias - kdrag * rel * abs(rel)) / m

    for _ in range(n_steps):
        if attitude_only:
            k1x = k1v = k2x = k2v = k3x = k3v = k4x = k4v = 0.0
        else:
            # Stage derivatives for the translational pair (position, velocity).
            k1x, k1v = xd, xdd(xd)
            k2x, k2v = xd + 0.5 * dt * k1v, xdd(xd + 0.5 * dt * k1v)
            k3x, k3v = xd + 0.5 * dt * k2v, xdd(xd + 0.5 * dt * k2v)
            k4x, k4v = xd + dt * k3v, xdd(xd + dt * k3v)
        x = x + (dt / 6.0) * (k1x + 2.0 * k2x + 2.0 * k3x + k4x)
        xd = xd + (dt / 6.0) * (k1v + 2.0 * k2v + 2.0 * k3v + k4v)

        # phi/psi have constant acceleration over the step; RK4 reduces to the
        # exact quadratic update but is written as the same stage sum so the
        # arithmetic matches the compiled kernel exactly.
        p1x, p1v = phid, phi_dd
        p2x, p2v = phid + 0.5 * dt * p1v, phi_dd
        p3x, p3v = phid + 0.5 * dt * p2v, phi_dd
        p4x, p4v = phid + dt * p3v, phi_dd
        phi = phi + (dt / 6.0) * (p1x + 2.0 * p2x + 2.0 * p3x + p4x)
        phid = phid + (dt / 6.0) * (p1v + 2.0 * p2v + 2.0 * p3v + p4v)

        q1x, q1v = psid, psi_dd
        q2x, q2v = psid + 0.5 * dt * q1v, psi_dd
        q3x, q3v = psid + 0.5 * dt * q2v, psi_dd
        q4x, q4v = psid + dt * q3v, psi_dd
        psi = psi + (dt / 6.0) * (q1x + 2.0 * q2x + 2.0 * q3x + q4x)
        psid = psid + (dt / 6.0) * (q1v + 2.0 * q2v + 2.0 * q3v + q4v)

    return (x, xd, phi, phid, psi, psid)


def shift_clamp(s: np.ndarray, delta: float, noise: np.ndarray, lo: float, hi: float) -> np.ndarray:
    """Particle motion update: clamp(s + delta + noise, lo, hi)."""
    return np.clip(s + (delta + noise), lo, hi)


def ranges_to_next_feature(s: np.ndarray, bounds: np.ndarray) -> np.ndarray:
    """Distance from each s to the first feature position strictly greater.

    bounds is the ascending array of junction boundaries plus the route end.
    Positions at or past the last bound get distance 0.
    """
    idx = np.searchsorted(bounds, s, side="right")
    dist = np.where(idx < len(bounds), bounds[np.minimum(idx, len(bounds) - 1)] - s, 0.0)
    return np.maximum(dist, 0.0)


def sonar_likelihood(z: float, saturated: bool, floored: bool, expected: np.ndarray,
                     sigma: float, p_out: float, min_r: float, max_r: float) -> np.ndarray:
    """Censored-Gaussian + uniform-outlier likelihood, vectorized over expected.

    Interior readings mix the Gaussian density with the uniform outlier
    density. A reading clamped at max_range (saturated) or min_range carries
    the corresponding Gaussian tail mass instead; the continuous outlier
    component never lands exactly on a clamp point, so the mixture
    integrates to one.
    """
    expected = np.asarray(expected, dtype=np.float64)
    if saturated:
        return (1.0 - p_out) * ndtr((expected - max_r) / sigma)
    if floored:
        return (1.0 - p_out) * ndtr((min_r - expected) / sigma)
    gauss = np.exp(-0.5 * ((z - expected) / sigma) ** 2) / (sigma * math.sqrt(2.0 * math.pi))
    return (1.0 - p_out) * gauss + p_out / (max_r - min_r)


def weights_mul_norm(w: np.ndarray, lik: np.ndarray) -> float:
    """w *= lik in place, then normalize. Returns the pre-normalization mass.

    When the mass is zero or non-finite the weights are left un-normalized
    and the caller decides how to recover.
    """
    w *= lik
    eta = float(np.sum(w))
    if eta > 0.0 and math.isfinite(eta):
        w /= eta
    return eta


def systematic_indices(w: np.ndarray, n_out: int, u0: float) -> np.ndarray:
    """Low-variance resampling indices for normalized weights w.

    Comb positions (u0 + i)/n_out, one shared random offset u0 in [0, 1).
    """
    cum = np.cumsum(w)
    positions = (u0 + np.arange(n_out, dtype=np.float64)) / n_out
    idx = np.searchsorted(cum, positions, side="right")
    return np.minimum(idx, len(w) - 1).astype(np.int64)


def occupied_bins(s: np.ndarray, w: np.ndarray, w_min: float, bin_w: float, total: float) -> int:
    """Number of distinct histogram bins holding a particle with weight > w_min."""
    mask = w > w_min
    if not np.any(mask):
        return 0
    bins = np.floor(s[mask] / bin_w).astype(np.int64)
    n_bins = int(total / bin_w) + 2
    bins = np.minimum(bins, n_bins - 1)
    return int(np.unique(bins).size)
