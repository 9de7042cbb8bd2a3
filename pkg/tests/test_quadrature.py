"""Tests for quadrature rules and monotone-piece utilities."""

import numpy as np
import pytest

from core.quadrature import (
    SampledFunction,
    cumulative_integral,
    cumulative_rate_integral,
    cumulative_speed_integral,
    extremum_times,
    integrate_adaptive_simpson,
    positive_variation,
    sqrt_half,
    total_variation,
)
from core.rates import ConstantRate, TanhRate


def _sampled(func, dfunc, tau, points=201):
    t = np.linspace(0.0, tau, points)
    return SampledFunction(t, func(t), dfunc(t))


def test_adaptive_simpson():
    value, error = integrate_adaptive_simpson(np.sin, 0.0, np.pi)
    assert value == pytest.approx(2.0, abs=1e-10)
    assert error < 1e-9
    assert integrate_adaptive_simpson(np.sin, np.pi, 0.0)[0] == pytest.approx(-2.0, abs=1e-10)
    assert integrate_adaptive_simpson(np.sin, 1.0, 1.0) == (0.0, 0.0)


def test_cumulative_integral():
    t = np.linspace(0.0, 2.0, 65)
    np.testing.assert_allclose(cumulative_integral(np.cos, t), np.sin(t), atol=1e-10)


def test_cumulative_rate_integral():
    np.testing.assert_allclose(cumulative_rate_integral(ConstantRate(2.0), 1.0, 8), 2.0 * np.linspace(0.0, 1.0, 9))
    values = cumulative_rate_integral(TanhRate(1.0), 3.0, 64)
    np.testing.assert_allclose(values, np.log(np.cosh(np.linspace(0.0, 3.0, 65))), atol=1e-10)
    assert not values.flags.writeable


def test_speed_integral_handles_velocity_reversal():
    t = np.linspace(0.0, np.pi, 2001)
    velocity = np.zeros((t.size, 3))
    velocity[:, 0] = np.cos(t)
    speeds = np.abs(np.cos(t))
    arc = cumulative_speed_integral(velocity, speeds, t[1] - t[0])
    assert arc[-1] == pytest.approx(2.0, abs=1e-7)
    assert np.all(np.diff(arc) >= 0.0)


def test_speed_integral_is_composite_simpson_when_smooth():
    t = np.linspace(0.0, 1.0, 11)
    dt = t[1] - t[0]
    velocity = np.zeros((t.size, 3))
    velocity[:, 2] = np.exp(t)
    speeds = np.exp(t)
    arc = cumulative_speed_integral(velocity, speeds, dt)
    pairs = dt / 3.0 * (speeds[:-2:2] + 4.0 * speeds[1:-1:2] + speeds[2::2])
    np.testing.assert_allclose(arc[::2], np.concatenate([[0.0], np.cumsum(pairs)]), rtol=1e-13)
    assert arc[-1] == pytest.approx(np.e - 1.0, abs=1e-5)


@pytest.mark.parametrize("points", [10, 11])
def test_speed_integral_is_exact_for_quadratics(points):
    t = np.linspace(0.0, 2.0, points)
    velocity = np.zeros((t.size, 3))
    velocity[:, 0] = 1.0 + t * t
    arc = cumulative_speed_integral(velocity, 1.0 + t * t, t[1] - t[0])
    np.testing.assert_allclose(arc, t + t**3 / 3.0, atol=1e-13)


def test_speed_integral_is_batched():
    t = np.linspace(0.0, 1.0, 101)
    velocity = np.zeros((2, t.size, 3))
    velocity[0, :, 2] = 1.0
    velocity[1, :, 2] = 2.0 * t
    speeds = np.linalg.norm(velocity, axis=-1)
    arc = cumulative_speed_integral(velocity, speeds, t[1] - t[0])
    np.testing.assert_allclose(arc[:, -1], [1.0, 1.0], atol=1e-12)


class TestSampledFunction:
    def test_validation(self):
        with pytest.raises(ValueError):
            SampledFunction(np.array([0.0, 1.0]), np.array([0.0]), np.array([0.0, 1.0]))
        with pytest.raises(ValueError):
            SampledFunction(np.array([0.0, 0.0]), np.zeros(2), np.zeros(2))

    def test_restrict_ends_exactly_at_tau(self):
        f = _sampled(np.sin, np.cos, 2.0)
        part = f.restrict(1.234)
        assert part.end_time == 1.234
        assert part.values[-1] == pytest.approx(np.sin(1.234), abs=1e-9)
        assert f.restrict(2.0) is f
        with pytest.raises(ValueError):
            f.restrict(2.5)

    def test_arithmetic(self):
        f = _sampled(np.sin, np.cos, 1.0, 11)
        g = _sampled(np.cos, lambda t: -np.sin(t), 1.0, 11)
        np.testing.assert_allclose((f + g).values, np.sin(f.times) + np.cos(f.times))
        np.testing.assert_allclose((f - g).derivatives, np.cos(f.times) + np.sin(f.times))
        np.testing.assert_allclose(f.scaled(-2.0).values, -2.0 * np.sin(f.times))


def test_extremum_times_of_sine():
    f = _sampled(np.sin, np.cos, 2.0 * np.pi)
    np.testing.assert_allclose(extremum_times(f), [np.pi / 2.0, 3.0 * np.pi / 2.0], atol=1e-9)


def test_positive_and_total_variation():
    f = _sampled(np.sin, np.cos, 2.0 * np.pi)
    assert positive_variation(f) == pytest.approx(2.0, abs=1e-7)
    assert total_variation(f) == pytest.approx(4.0, abs=1e-7)


def test_monotone_function_has_no_positive_variation():
    f = _sampled(lambda t: np.exp(-t), lambda t: -np.exp(-t), 3.0)
    assert positive_variation(f) == 0.0
    assert total_variation(f) == pytest.approx(1.0 - np.exp(-3.0))


def test_transform_carries_extrema_of_squared_distance():
    # q = |2 cos t|^2 is the squared separation; the distance |cos t| falls to 0 and recovers to 1.
    f = _sampled(lambda t: 4.0 * np.cos(t) ** 2, lambda t: -4.0 * np.sin(2.0 * t), np.pi)
    assert positive_variation(f, transform=sqrt_half) == pytest.approx(1.0, abs=1e-7)


def test_single_sample_has_no_variation():
    f = SampledFunction(np.zeros(1), np.ones(1), np.zeros(1))
    assert positive_variation(f) == 0.0
    assert float(f(0.0)) == 1.0
