"""Tests for the damped Jaynes-Cummings closed forms."""

import numpy as np
import pytest

from core.jaynes_cummings import (
    jc_b,
    jc_b_dot,
    jc_critical_coupling,
    jc_extremum_times,
    jc_first_revival_time,
    jc_rate,
    jc_stationary_times,
    jc_zero_times,
)

COUPLINGS = [(5.0, 1.0), (0.2, 1.0), (0.5, 1.0), (0.55, 1.0), (2.0, 0.3)]


@pytest.mark.parametrize("gamma0, lam", COUPLINGS)
def test_b_starts_at_one(gamma0, lam):
    assert jc_b(0.0, gamma0, lam) == pytest.approx(1.0)
    assert jc_b_dot(0.0, gamma0, lam) == pytest.approx(0.0)


@pytest.mark.parametrize("gamma0, lam", COUPLINGS)
def test_b_dot_matches_finite_difference(gamma0, lam):
    t = np.linspace(0.1, 6.0, 25)
    h = 1e-6
    numeric = (jc_b(t + h, gamma0, lam) - jc_b(t - h, gamma0, lam)) / (2.0 * h)
    np.testing.assert_allclose(jc_b_dot(t, gamma0, lam), numeric, atol=1e-8)


@pytest.mark.parametrize("gamma0, lam", [(0.2, 1.0), (0.5, 1.0), (5.0, 1.0)])
def test_rate_is_log_derivative_of_b(gamma0, lam):
    t = np.linspace(0.05, 1.0, 20)
    expected = -2.0 * jc_b_dot(t, gamma0, lam) / jc_b(t, gamma0, lam)
    np.testing.assert_allclose(jc_rate(t, gamma0, lam), expected, rtol=1e-10)


def test_critical_coupling_closed_form():
    t = np.array([0.5, 2.0, 7.0])
    np.testing.assert_allclose(jc_b(t, 0.5, 1.0), np.exp(-0.5 * t) * (1.0 + 0.5 * t), rtol=1e-12)
    assert jc_critical_coupling(1.0) == 0.5


def test_continuous_across_branch_point():
    t = np.linspace(0.0, 5.0, 11)
    below = jc_b(t, 0.5 - 1e-9, 1.0)
    above = jc_b(t, 0.5 + 1e-9, 1.0)
    at = jc_b(t, 0.5, 1.0)
    np.testing.assert_allclose(below, at, atol=1e-8)
    np.testing.assert_allclose(above, at, atol=1e-8)


def test_weak_coupling_is_stable_for_long_times():
    values = jc_b(np.array([100.0, 1000.0]), 0.2, 1.0)
    assert np.all(np.isfinite(values))
    assert np.all(values > 0.0)
    assert jc_first_revival_time(0.2, 1.0) == np.inf
    assert jc_zero_times(50.0, 0.2, 1.0).size == 0


def test_zero_and_stationary_times_strong_coupling():
    d = 3.0
    zeros = jc_zero_times(10.0, 5.0, 1.0)
    assert zeros[0] == pytest.approx(2.0 * (np.pi - np.arctan(d)) / d)
    np.testing.assert_allclose(np.diff(zeros), 2.0 * np.pi / d)
    np.testing.assert_allclose(jc_b(zeros, 5.0, 1.0), 0.0, atol=1e-12)

    stationary = jc_stationary_times(10.0, 5.0, 1.0)
    np.testing.assert_allclose(jc_b_dot(stationary, 5.0, 1.0), 0.0, atol=1e-12)
    assert jc_first_revival_time(5.0, 1.0) == pytest.approx(zeros[0])

    extrema = jc_extremum_times(10.0, 5.0, 1.0)
    assert np.all(np.diff(extrema) > 0.0)
    assert extrema.size == zeros.size + stationary.size


def test_rate_changes_sign_through_pole():
    t0 = jc_first_revival_time(5.0, 1.0)
    assert jc_rate(t0 - 1e-6, 5.0, 1.0) > 1e4
    assert jc_rate(t0 + 1e-6, 5.0, 1.0) < -1e4


@pytest.mark.parametrize("gamma0, lam", [(0.0, 1.0), (1.0, -1.0)])
def test_invalid_parameters(gamma0, lam):
    with pytest.raises(ValueError):
        jc_b(1.0, gamma0, lam)


def test_negative_time_rejected():
    with pytest.raises(ValueError):
        jc_rate(-0.1, 1.0, 1.0)
