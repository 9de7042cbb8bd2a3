"""Quadrature and monotone-piece utilities.

Adaptive Simpson integration for rate functions, a kink-aware cumulative
rule for speeds |dr/dt| sampled on the propagation grid, and positive
variation of sampled functions computed from their extrema rather than by
clipping the integrand on the grid.
"""

import logging
from collections.abc import Callable
from dataclasses import dataclass
from functools import cached_property, lru_cache
from typing import Optional, Tuple

import numpy as np
from scipy.interpolate import CubicHermiteSpline
from scipy.optimize import brentq

from core.constants import TOL
from core.rates import RateFunction

logger = logging.getLogger(__name__)


def integrate_adaptive_simpson(
    f: Callable[[float], float],
    a: float,
    b: float,
    tol: float = TOL.quadrature,
    max_depth: int = 50,
) -> Tuple[float, float]:
    """Adaptive Simpson's rule integration.

    Args:
        f: Function to integrate.
        a: Lower bound.
        b: Upper bound.
        tol: Absolute error tolerance.
        max_depth: Maximum recursion depth.

    Returns:
        Tuple of (integral_value, error_estimate).
    """
    if a == b:
        return 0.0, 0.0
    if a > b:
        result, error = integrate_adaptive_simpson(f, b, a, tol, max_depth)
        return -result, error

    def _simpson(fa: float, fm: float, fb: float, h: float) -> float:
        return h / 3.0 * (fa + 4.0 * fm + fb)

    def _adaptive(a, b, fa, fm, fb, s_whole, depth, tol):
        m = 0.5 * (a + b)
        h = 0.5 * (b - a)
        flm = f(0.5 * (a + m))
        frm = f(0.5 * (m + b))

        s_left = _simpson(fa, flm, fm, 0.5 * h)
        s_right = _simpson(fm, frm, fb, 0.5 * h)
        s_combined = s_left + s_right
        error_estimate = (s_combined - s_whole) / 15.0

        if depth >= max_depth or abs(error_estimate) < tol:
            # Richardson extrapolation
            return s_combined + error_estimate, abs(error_estimate)

        left, left_err = _adaptive(a, m, fa, flm, fm, s_left, depth + 1, 0.5 * tol)
        right, right_err = _adaptive(m, b, fm, frm, fb, s_right, depth + 1, 0.5 * tol)
        return left + right, left_err + right_err

    fa, fb = f(a), f(b)
    fm = f(0.5 * (a + b))
    s_whole = _simpson(fa, fm, fb, 0.5 * (b - a))
    return _adaptive(a, b, fa, fm, fb, s_whole, 0, tol)


def cumulative_integral(
    f: Callable[[np.ndarray], np.ndarray],
    times: np.ndarray,
    tol: float = TOL.quadrature,
) -> np.ndarray:
    """Running integral of a vectorized f from times[0] to every grid point.

    The first Simpson level is evaluated for all intervals at once; only the
    intervals whose Richardson estimate misses their share of ``tol`` are
    refined by the scalar adaptive rule.
    """
    times = np.asarray(times, dtype=float)
    if times.size < 2:
        return np.zeros_like(times)
    a, b = times[:-1], times[1:]
    h = b - a
    m = 0.5 * (a + b)
    fa = np.asarray(f(a), dtype=float)
    fb = np.asarray(f(b), dtype=float)
    fm = np.asarray(f(m), dtype=float)
    flm = np.asarray(f(0.5 * (a + m)), dtype=float)
    frm = np.asarray(f(0.5 * (m + b)), dtype=float)

    s_whole = h / 6.0 * (fa + 4.0 * fm + fb)
    s_halves = h / 12.0 * (fa + 4.0 * flm + 2.0 * fm + 4.0 * frm + fb)
    error = (s_halves - s_whole) / 15.0
    pieces = s_halves + error

    span = times[-1] - times[0]
    share = tol * h / span
    refine = np.flatnonzero(~(np.abs(error) < share))
    if refine.size:
        logger.debug(f"Refining {refine.size} of {h.size} quadrature intervals")

        def scalar(x: float) -> float:
            return float(f(np.array([x]))[0])

        for k in refine:
            pieces[k], _ = integrate_adaptive_simpson(scalar, a[k], b[k], share[k])

    return np.concatenate([[0.0], np.cumsum(pieces)])


@lru_cache(maxsize=512)
def _cached_rate_integral(rate: RateFunction, tau: float, steps: int) -> np.ndarray:
    times = np.linspace(0.0, tau, steps + 1)
    values = cumulative_integral(rate.evaluate, times)
    values.setflags(write=False)
    return values


def cumulative_rate_integral(rate: RateFunction, tau: float, steps: int) -> np.ndarray:
    """Memoized running integral of a rate on linspace(0, tau, steps + 1)."""
    if rate.is_constant:
        return float(rate(0.0)) * np.linspace(0.0, tau, steps + 1)
    return _cached_rate_integral(rate, float(tau), int(steps))


# --------------------------------------------------
# Speeds along trajectories
# --------------------------------------------------


def cumulative_speed_integral(velocities: np.ndarray, speeds: np.ndarray, dt: float) -> np.ndarray:
    """Running integral of ``speeds`` on a uniform grid, batched over leading axes.

    ``velocities`` has shape (..., n, 3) and ``speeds`` (..., n). Away from
    kinks this is composite Simpson: intervals 2k and 2k + 1 integrate the
    same parabola, h/12 (5 f0 + 8 f1 - f2) and h/12 (-f0 + 8 f1 + 5 f2), so
    every even node carries the Simpson sum. An interval whose parabola would
    straddle a kink takes the parabola on its other side, or the trapezoid
    when both sides are blocked. An interval where the velocity reverses (dot
    product of consecutive samples negative) is split at the interpolated zero.
    """
    speeds = np.asarray(speeds, dtype=float)
    n = speeds.shape[-1]
    if n < 2:
        return np.zeros_like(speeds)
    f0, f1 = speeds[..., :-1], speeds[..., 1:]
    trapezoid = 0.5 * dt * (f0 + f1)
    if n == 2:
        pieces = trapezoid
    else:
        dots = np.sum(velocities[..., :-1, :] * velocities[..., 1:, :], axis=-1)
        kink = dots < 0.0

        backward = np.empty_like(f0)
        backward[..., 1:] = dt / 12.0 * (-speeds[..., :-2] + 8.0 * speeds[..., 1:-1] + 5.0 * speeds[..., 2:])
        backward[..., 0] = np.nan
        forward = np.empty_like(f0)
        forward[..., :-1] = dt / 12.0 * (5.0 * speeds[..., :-2] + 8.0 * speeds[..., 1:-1] - speeds[..., 2:])
        forward[..., -1] = np.nan

        kink_before = np.zeros_like(kink)
        kink_before[..., 1:] = kink[..., :-1]
        kink_before[..., 0] = True
        kink_after = np.zeros_like(kink)
        kink_after[..., :-1] = kink[..., 1:]
        kink_after[..., -1] = True

        first_of_pair = np.arange(n - 1) % 2 == 0
        leading = np.where(~kink_after, forward, np.where(~kink_before, backward, trapezoid))
        trailing = np.where(~kink_before, backward, np.where(~kink_after, forward, trapezoid))
        pieces = np.where(first_of_pair, leading, trailing)
        with np.errstate(invalid="ignore", divide="ignore"):
            split = np.where(f0 + f1 > 0.0, 0.5 * dt * (f0 * f0 + f1 * f1) / (f0 + f1), 0.0)
        pieces = np.where(kink, split, pieces)

    zeros = np.zeros(speeds.shape[:-1] + (1,))
    return np.concatenate([zeros, np.cumsum(pieces, axis=-1)], axis=-1)


# --------------------------------------------------
# Monotone pieces
# --------------------------------------------------


@dataclass(frozen=True, eq=False)
class SampledFunction:
    """Samples of a smooth scalar function and of its exact derivative."""

    times: np.ndarray
    values: np.ndarray
    derivatives: np.ndarray

    def __post_init__(self):
        for name in ("times", "values", "derivatives"):
            array = np.asarray(getattr(self, name), dtype=float)
            object.__setattr__(self, name, array)
        if not (self.times.shape == self.values.shape == self.derivatives.shape):
            raise ValueError("times, values and derivatives must share one shape")
        if self.times.ndim != 1 or self.times.size < 1:
            raise ValueError("SampledFunction needs a non-empty 1-d grid")
        if self.times.size > 1 and np.any(np.diff(self.times) <= 0.0):
            raise ValueError("Sample times must be strictly increasing")

    @cached_property
    def spline(self) -> CubicHermiteSpline:
        return CubicHermiteSpline(self.times, self.values, self.derivatives)

    @property
    def end_time(self) -> float:
        return float(self.times[-1])

    def __call__(self, t):
        if self.times.size == 1:
            return np.full_like(np.asarray(t, dtype=float), self.values[0])
        return self.spline(t)

    def restrict(self, tau: float) -> "SampledFunction":
        """Samples on [times[0], tau], ending exactly at tau."""
        if tau > self.end_time + 1e-12 or tau < self.times[0]:
            raise ValueError(f"tau={tau} lies outside the sampled interval")
        keep = self.times < tau - 1e-12
        if np.count_nonzero(keep) == self.times.size - 1 and abs(self.end_time - tau) <= 1e-12:
            return self
        t = np.append(self.times[keep], tau)
        v = np.append(self.values[keep], float(self.spline(tau)))
        d = np.append(self.derivatives[keep], float(self.spline(tau, 1)))
        return SampledFunction(t, v, d)

    def map_values(self, func: Callable[[np.ndarray], np.ndarray], dfunc: Callable[[np.ndarray], np.ndarray]) -> "SampledFunction":
        """Chain rule: samples of func(f) with derivative dfunc(f) * f'."""
        return SampledFunction(self.times, func(self.values), dfunc(self.values) * self.derivatives)

    def __add__(self, other: "SampledFunction") -> "SampledFunction":
        return SampledFunction(self.times, self.values + other.values, self.derivatives + other.derivatives)

    def __sub__(self, other: "SampledFunction") -> "SampledFunction":
        return SampledFunction(self.times, self.values - other.values, self.derivatives - other.derivatives)

    def scaled(self, factor: float) -> "SampledFunction":
        return SampledFunction(self.times, factor * self.values, factor * self.derivatives)


def extremum_times(sampled: SampledFunction, xtol: float = TOL.root) -> np.ndarray:
    """Interior times where the derivative changes sign, located by Brent's method."""
    d = sampled.derivatives
    if d.size < 2:
        return np.empty(0)
    found = list(sampled.times[1:-1][d[1:-1] == 0.0])
    brackets = np.flatnonzero(d[:-1] * d[1:] < 0.0)
    if brackets.size:
        slope = sampled.spline.derivative()
        for k in brackets:
            found.append(brentq(slope, sampled.times[k], sampled.times[k + 1], xtol=xtol))
    return np.unique(np.asarray(found, dtype=float))


def _piece_values(sampled: SampledFunction, transform: Optional[Callable[[np.ndarray], np.ndarray]]) -> np.ndarray:
    extrema = extremum_times(sampled)
    values = [sampled.values[0]]
    if extrema.size:
        values.extend(np.asarray(sampled.spline(extrema), dtype=float))
    values.append(sampled.values[-1])
    values = np.asarray(values, dtype=float)
    return transform(values) if transform is not None else values


def positive_variation(
    sampled: SampledFunction,
    transform: Optional[Callable[[np.ndarray], np.ndarray]] = None,
) -> float:
    """Sum of the increases of transform(f) over its monotone pieces.

    ``transform`` must be monotone increasing on the range of f; it lets a
    smooth proxy (for example a squared distance) carry the extrema search.
    """
    if sampled.times.size < 2:
        return 0.0
    values = _piece_values(sampled, transform)
    return float(np.sum(np.clip(np.diff(values), 0.0, None)))


def total_variation(
    sampled: SampledFunction,
    transform: Optional[Callable[[np.ndarray], np.ndarray]] = None,
) -> float:
    if sampled.times.size < 2:
        return 0.0
    values = _piece_values(sampled, transform)
    return float(np.sum(np.abs(np.diff(values))))


def sqrt_half(values: np.ndarray) -> np.ndarray:
    """Trace distance from a squared Bloch separation |dr|^2."""
    return 0.5 * np.sqrt(np.clip(values, 0.0, None))


def sqrt_clipped(values: np.ndarray) -> np.ndarray:
    return np.sqrt(np.clip(values, 0.0, None))
