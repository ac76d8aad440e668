"""Arc-length particle filter and the exact histogram filter used to check it.

Hand-derived references:

* ESS of weights (0.5, 0.25, 0.25):  1 / (0.25 + 0.0625 + 0.0625) = 8/3
* weighted moments of s = (0, 4), w = (0.75, 0.25): mean 1.0, var 3.0
* adaptive size at k = 10 bins, eps = 0.05, delta = 0.01:
      chi2_{0.99, 9} / (2 * 0.05) = 216.66  ->  217
"""

from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.special import ndtr
from scipy.stats import chi2, kstest

from pipenav import (
    DegeneratePosterior,
    DegenerateWeights,
    OdometryModel,
    ParticleSet,
    PfConfig,
    PipeSegment,
    RouteMap,
    SonarModel,
    SonarReading,
    effective_sample_size,
    expected_range,
    grid_filter_oracle,
    kld_sample_size,
    measurement_likelihood,
    pf_estimate,
    pf_init,
    pf_predict,
    pf_resample,
    pf_update,
    route_length,
    simulate_odometry,
)

PIPE = 0.3556


def _uniform_set(s: np.ndarray) -> ParticleSet:
    n = len(s)
    return ParticleSet(s=np.asarray(s, dtype=float), w=np.full(n, 1.0 / n), normalized=True)


# ---------------------------------------------------------------------------
# initialization
# ---------------------------------------------------------------------------


def test_pf_init_uniform_over_route(single_segment_route):
    cfg = PfConfig(n_init=5000, n_min=200, n_max=10000)
    pset = pf_init(single_segment_route, cfg, np.random.default_rng(0))
    assert len(pset.s) == 5000
    assert np.all((pset.s >= 0.0) & (pset.s <= 5.0))
    assert np.allclose(pset.w, 1.0 / 5000)
    stat, pvalue = kstest(pset.s / 5.0, "uniform")
    assert pvalue > 0.01


def test_pf_init_deterministic(single_segment_route):
    cfg = PfConfig(n_init=64, n_min=64, n_max=64)
    a = pf_init(single_segment_route, cfg, np.random.default_rng(9))
    b = pf_init(single_segment_route, cfg, np.random.default_rng(9))
    assert np.array_equal(a.s, b.s) and np.array_equal(a.w, b.w)


# ---------------------------------------------------------------------------
# prediction
# ---------------------------------------------------------------------------


def test_pf_predict_shifts_mean(single_segment_route, odometry_model):
    cfg = PfConfig(n_init=20000, n_min=200, n_max=40000)
    rng = np.random.default_rng(1)
    pset = _uniform_set(np.full(20000, 2.0))
    out = pf_predict(pset, 0.5, odometry_model, cfg, single_segment_route, rng)
    # noise scale max(0.05 * 0.5, 0.001) = 0.025; SE of mean ~ 2e-4
    assert np.mean(out.s) == pytest.approx(2.5, abs=1e-3)
    assert np.std(out.s) == pytest.approx(0.025, rel=0.05)


def test_pf_predict_applies_sigma_floor(single_segment_route):
    # zero commanded motion still diffuses at the floor
    odo = OdometryModel(sigma_per_meter=0.05)
    cfg = PfConfig(n_init=20000, n_min=200, n_max=40000, motion_sigma_floor=0.004)
    pset = _uniform_set(np.full(20000, 2.0))
    out = pf_predict(pset, 0.0, odo, cfg, single_segment_route, np.random.default_rng(2))
    assert np.std(out.s) == pytest.approx(0.004, rel=0.05)


def test_pf_predict_clamps_to_route(single_segment_route, odometry_model):
    cfg = PfConfig(n_init=1000)
    pset = _uniform_set(np.full(1000, 4.999))
    out = pf_predict(pset, 0.5, odometry_model, cfg, single_segment_route, np.random.default_rng(3))
    assert np.all(out.s <= route_length(single_segment_route))
    assert np.all(out.s >= 0.0)


def test_pf_predict_preserves_weights(single_segment_route, odometry_model):
    cfg = PfConfig(n_init=8, n_min=8, n_max=8)
    w = np.array([0.5, 0.1, 0.1, 0.1, 0.05, 0.05, 0.05, 0.05])
    pset = ParticleSet(s=np.linspace(0.5, 4.5, 8), w=w, normalized=True)
    out = pf_predict(pset, 0.1, odometry_model, cfg, single_segment_route, np.random.default_rng(4))
    assert np.array_equal(out.w, w)


# ---------------------------------------------------------------------------
# measurement update
# ---------------------------------------------------------------------------


def test_pf_update_normalizes(two_segment_route, sonar_model):
    pset = _uniform_set(np.linspace(0.1, 4.9, 400))
    z = SonarReading(distance=1.0, saturated=False)
    out, eta = pf_update(pset, z, two_segment_route, sonar_model)
    assert abs(float(out.w.sum()) - 1.0) <= 1e-12
    assert eta > 0.0


def test_pf_update_matches_pointwise_likelihood(two_segment_route, sonar_model):
    s = np.array([0.5, 1.0, 2.5, 4.0])
    pset = _uniform_set(s)
    z = SonarReading(distance=1.0, saturated=False)
    out, eta = pf_update(pset, z, two_segment_route, sonar_model)
    likes = np.array(
        [
            measurement_likelihood(z, expected_range(two_segment_route, si, sonar_model), sonar_model)
            for si in s
        ]
    )
    assert np.allclose(out.w, likes / likes.sum(), atol=1e-12)
    assert eta == pytest.approx(likes.mean(), rel=1e-9)


def test_pf_update_permutation_invariant(two_segment_route, sonar_model):
    rng = np.random.default_rng(5)
    s = rng.uniform(0.0, 5.0, size=128)
    perm = rng.permutation(128)
    z = SonarReading(distance=0.8, saturated=False)
    out, _ = pf_update(_uniform_set(s), z, two_segment_route, sonar_model)
    out_p, _ = pf_update(_uniform_set(s[perm]), z, two_segment_route, sonar_model)
    assert np.allclose(out.w[perm], out_p.w, atol=1e-15)


def test_pf_update_degenerate_weights_raises(two_segment_route):
    # no outlier floor and a reading impossibly far from every particle
    model = SonarModel(sigma=1e-4, min_range=0.02, max_range=4.0, outlier_prob=0.0)
    pset = _uniform_set(np.full(50, 0.5))  # expected echo 1.5 exactly
    z = SonarReading(distance=3.5, saturated=False)
    with pytest.raises(DegenerateWeights):
        pf_update(pset, z, two_segment_route, model)


# ---------------------------------------------------------------------------
# moments, ESS, resampling, adaptive sizing
# ---------------------------------------------------------------------------


def test_effective_sample_size_known_weights():
    pset = ParticleSet(
        s=np.array([0.0, 1.0, 2.0]), w=np.array([0.5, 0.25, 0.25]), normalized=True
    )
    assert effective_sample_size(pset) == pytest.approx(8.0 / 3.0, abs=1e-12)


def test_ess_bounds_property():
    rng = np.random.default_rng(6)
    for _ in range(50):
        n = int(rng.integers(2, 200))
        w = rng.random(n) + 1e-12
        w /= w.sum()
        pset = ParticleSet(s=np.zeros(n), w=w, normalized=True)
        ess = effective_sample_size(pset)
        assert 1.0 - 1e-9 <= ess <= n + 1e-9


def test_pf_estimate_known_moments():
    pset = ParticleSet(s=np.array([0.0, 4.0]), w=np.array([0.75, 0.25]), normalized=True)
    mean, var = pf_estimate(pset)
    assert mean == pytest.approx(1.0, abs=1e-12)
    assert var == pytest.approx(3.0, abs=1e-12)


def test_systematic_resample_equal_weights_is_identity_multiset(single_segment_route):
    cfg = PfConfig(n_init=256, n_min=256, n_max=256)
    s = np.sort(np.random.default_rng(7).uniform(0.0, 5.0, size=256))
    pset = _uniform_set(s)
    out = pf_resample(pset, cfg, single_segment_route, np.random.default_rng(8))
    # one comb tooth lands in every equal-width interval: same multiset back
    assert np.array_equal(np.sort(out.s), s)
    assert np.allclose(out.w, 1.0 / 256)


def test_resample_concentrates_on_heavy_particle(single_segment_route):
    cfg = PfConfig(n_init=1000, n_min=1000, n_max=1000)
    s = np.linspace(0.0, 5.0, 1000)
    w = np.full(1000, 0.2 / 999)
    w[500] = 0.8
    pset = ParticleSet(s=s, w=w, normalized=True)
    out = pf_resample(pset, cfg, single_segment_route, np.random.default_rng(9))
    frac = np.mean(out.s == s[500])
    assert frac == pytest.approx(0.8, abs=0.01)
    assert np.allclose(out.w, 1.0 / len(out.s))


def test_kld_sample_size_reference_value():
    assert kld_sample_size(10, 0.05, 0.01) == 217


def test_kld_sample_size_tracks_chi2_quantile():
    # Wilson-Hilferty approximation stays within 2% of the exact quantile
    for k in (5, 20, 60, 200):
        exact = chi2.ppf(0.99, k - 1) / (2 * 0.05)
        approx = kld_sample_size(k, 0.05, 0.01)
        assert approx == pytest.approx(exact, rel=0.02)


def test_kld_sample_size_monotone_in_bins():
    sizes = [kld_sample_size(k, 0.05, 0.01) for k in range(2, 40)]
    assert all(a <= b for a, b in zip(sizes, sizes[1:]))


def test_resample_output_size_respects_bounds(single_segment_route):
    cfg = PfConfig(n_init=900, n_min=300, n_max=900, kld_bin=0.05)
    # tight cluster occupying one bin: adaptive size collapses to n_min
    pset = _uniform_set(np.full(4000, 2.5) + np.random.default_rng(10).normal(0, 0.001, 4000))
    out = pf_resample(pset, cfg, single_segment_route, np.random.default_rng(11))
    assert len(out.s) == cfg.n_min
    # spread posterior occupying every bin: rises to at most n_max
    pset = _uniform_set(np.random.default_rng(12).uniform(0, 5, 4000))
    out = pf_resample(pset, cfg, single_segment_route, np.random.default_rng(13))
    assert cfg.n_min <= len(out.s) <= cfg.n_max


# ---------------------------------------------------------------------------
# grid-filter oracle
# ---------------------------------------------------------------------------


def test_grid_oracle_pure_shift(single_segment_route, clean_sonar_model):
    # near-zero process noise: predict step translates the prior by u
    odo = OdometryModel(sigma_per_meter=0.0)
    n = 500
    prior = np.zeros(n)
    prior[100] = 1.0
    z = SonarReading(distance=clean_sonar_model.max_range, saturated=True)  # uninformative-ish
    post = grid_filter_oracle(
        single_segment_route, prior, 0.30, z, clean_sonar_model, odo, 1e-6, cell=0.01
    )
    assert post.sum() == pytest.approx(1.0, abs=1e-12)
    assert int(np.argmax(post)) == 130


def test_grid_oracle_matches_bruteforce(single_segment_route, sonar_model, odometry_model):
    """Cross-check against a direct dense implementation on a coarse grid."""
    cell = 0.5
    n = 10
    centers = (np.arange(n) + 0.5) * cell
    rng = np.random.default_rng(14)
    prior = rng.random(n)
    prior /= prior.sum()
    u, floor = 0.35, 0.001
    z = SonarReading(distance=1.2, saturated=False)

    post = grid_filter_oracle(
        single_segment_route, prior, u, z, sonar_model, odometry_model, floor, cell=cell
    )

    # dense reference: cell-to-cell transition mass via the noise CDF over
    # edge offsets, with out-of-route mass absorbed into the boundary cells
    sigma = max(odometry_model.sigma_per_meter * abs(u), floor)
    edges = np.arange(n + 1) * cell
    pred = np.zeros(n)
    for j in range(n):  # source cell
        shifted = centers[j] + u
        cdf = ndtr((edges - shifted) / sigma)
        mass = np.diff(cdf)
        mass[0] += cdf[0]  # absorbed at the start wall
        mass[-1] += 1.0 - cdf[-1]  # absorbed at the end wall
        pred += prior[j] * mass
    like = np.array(
        [
            measurement_likelihood(
                z, expected_range(single_segment_route, s, sonar_model), sonar_model
            )
            for s in centers
        ]
    )
    ref = pred * like
    ref /= ref.sum()
    assert np.allclose(post, ref, atol=1e-12)


def test_grid_oracle_degenerate_posterior_raises(single_segment_route):
    model = SonarModel(sigma=1e-5, min_range=0.02, max_range=4.0, outlier_prob=0.0)
    odo = OdometryModel(sigma_per_meter=0.0)
    prior = np.zeros(500)
    prior[10] = 1.0  # s = 0.105, expected echo ~4.9 -> clamped 4.0
    z = SonarReading(distance=2.0, saturated=False)  # impossible under the model
    with pytest.raises(DegeneratePosterior):
        grid_filter_oracle(single_segment_route, prior, 0.0, z, model, odo, 1e-4, cell=0.01)


# ---------------------------------------------------------------------------
# one full cycle against the oracle (small version of the acceptance check)
# ---------------------------------------------------------------------------


def test_pf_cycle_tracks_grid_oracle(single_segment_route, sonar_model, odometry_model):
    cfg = PfConfig(n_init=30000, n_min=200, n_max=60000)
    rng = np.random.default_rng(15)
    pset = pf_init(single_segment_route, cfg, rng)
    pset = pf_predict(pset, 0.3, odometry_model, cfg, single_segment_route, rng)
    z = SonarReading(distance=1.8, saturated=False)
    pset, _ = pf_update(pset, z, single_segment_route, sonar_model)
    mean_pf, _ = pf_estimate(pset)

    n = 500
    prior = np.full(n, 1.0 / n)
    post = grid_filter_oracle(
        single_segment_route, prior, 0.3, z, sonar_model, odometry_model,
        cfg.motion_sigma_floor, cell=0.01,
    )
    centers = (np.arange(n) + 0.5) * 0.01
    mean_grid = float(np.sum(centers * post))
    assert mean_pf == pytest.approx(mean_grid, abs=0.03)


# ---------------------------------------------------------------------------
# normalization property under random readings
# ---------------------------------------------------------------------------


@settings(max_examples=40, deadline=None)
@given(
    z_dist=st.floats(min_value=0.02, max_value=4.0),
    seed=st.integers(min_value=0, max_value=2**31 - 1),
)
def test_update_always_normalizes_property(z_dist, seed):
    route = RouteMap(segments=(PipeSegment(length=5.0, diameter=PIPE),), ct=())
    model = SonarModel(sigma=0.05, min_range=0.02, max_range=4.0, outlier_prob=0.05)
    rng = np.random.default_rng(seed)
    s = rng.uniform(0.0, 5.0, size=256)
    w = rng.random(256) + 1e-9
    w /= w.sum()
    pset = ParticleSet(s=s, w=w, normalized=True)
    out, eta = pf_update(pset, SonarReading(z_dist, z_dist == 4.0), route, model)
    assert abs(float(out.w.sum()) - 1.0) <= 1e-12
