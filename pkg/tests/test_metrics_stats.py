"""Gaussian statistics and Fréchet distance vs an independent sqrtm oracle."""

import numpy as np
import pytest
from scipy import linalg as scipy_linalg

from saropt.errors import ValidationError
from saropt.metrics import GaussianStats, frechet_distance, gaussian_stats, sqrtm_psd


def _random_stats(rng, d=4, n=None):
    n = n or d + 3
    v = rng.normal(size=(n, d)) @ rng.normal(size=(d, d)) + rng.normal(size=d)
    return gaussian_stats(v)


def scipy_frechet(s1, s2):
    """Independent implementation: direct sqrtm of the product."""
    diff = s1.m - s2.m
    covmean = scipy_linalg.sqrtm(s1.C @ s2.C)
    return float(diff @ diff + np.trace(s1.C + s2.C - 2 * covmean.real))


def test_identical_vectors_give_zero_covariance():
    s = gaussian_stats(np.ones((2, 3)))
    assert np.array_equal(s.C, np.zeros((3, 3)))


def test_standard_basis_pair_hand_computed():
    s = gaussian_stats(np.array([[1.0, 0.0], [0.0, 1.0]]))
    assert np.allclose(s.m, [0.5, 0.5])
    assert np.allclose(s.C, [[0.5, -0.5], [-0.5, 0.5]])


def test_need_two_samples():
    with pytest.raises(ValidationError):
        gaussian_stats(np.ones((1, 4)))


def test_rank_deficiency_flag_triggers_exactly_at_n_le_d():
    rng = np.random.default_rng(0)
    assert gaussian_stats(rng.normal(size=(4, 4))).rank_deficient
    assert gaussian_stats(rng.normal(size=(4, 5))).rank_deficient
    assert not gaussian_stats(rng.normal(size=(5, 4))).rank_deficient


def test_distance_of_stats_with_itself_is_zero():
    rng = np.random.default_rng(1)
    s = _random_stats(rng)
    assert frechet_distance(s, s) < 1e-9


def test_mean_shift_with_identity_covariances():
    v = np.array([3.0, -4.0])
    s1 = GaussianStats(m=np.zeros(2), C=np.eye(2), n=10)
    s2 = GaussianStats(m=v, C=np.eye(2), n=10)
    assert np.isclose(frechet_distance(s1, s2), 25.0)


def test_symmetry_and_positivity():
    rng = np.random.default_rng(2)
    for _ in range(50):
        s1, s2 = _random_stats(rng), _random_stats(rng)
        d12 = frechet_distance(s1, s2)
        d21 = frechet_distance(s2, s1)
        assert d12 >= 0.0
        assert np.isclose(d12, d21, rtol=1e-8, atol=1e-10)


def test_matches_scipy_sqrtm_oracle():
    rng = np.random.default_rng(3)
    for _ in range(100):
        s1, s2 = _random_stats(rng, d=4), _random_stats(rng, d=4)
        got = frechet_distance(s1, s2)
        want = scipy_frechet(s1, s2)
        assert np.isclose(got, want, rtol=1e-6, atol=1e-8)


def test_dimension_mismatch_rejected():
    rng = np.random.default_rng(4)
    with pytest.raises(ValidationError):
        frechet_distance(_random_stats(rng, d=3), _random_stats(rng, d=4))


def test_sqrtm_psd_squares_back():
    rng = np.random.default_rng(5)
    a = rng.normal(size=(5, 5))
    c = a @ a.T
    root = sqrtm_psd(c)
    assert np.allclose(root @ root, c, atol=1e-10)
    assert np.allclose(root, root.T, atol=1e-12)
