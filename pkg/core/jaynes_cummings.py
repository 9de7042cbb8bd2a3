"""Closed forms of the damped Jaynes-Cummings model on resonance.

With q = lambda^2 - 2 gamma0 lambda and d = sqrt(|q|) the excited amplitude is
b_t = exp(-lambda t/2) (C + lambda S), C = cosh(dt/2), S = sinh(dt/2)/d for
q > 0 and their trigonometric counterparts for q < 0. The branch point
q = 0 (gamma0 = lambda/2) is handled by a series in q t^2.
"""

import logging
from typing import Tuple

import numpy as np

from core.constants import TOL

logger = logging.getLogger(__name__)


def _validate(gamma0: float, lam: float) -> None:
    if gamma0 <= 0.0 or lam <= 0.0:
        raise ValueError(f"Jaynes-Cummings needs gamma0 > 0 and lambda > 0, got {gamma0}, {lam}")


def _scalar_or_array(values: np.ndarray, t):
    return float(values) if np.ndim(t) == 0 else values


def _branch_terms(t: np.ndarray, gamma0: float, lam: float) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Return (S, C, series_mask); S and C overflow for large hyperbolic arguments."""
    q = lam * lam - 2.0 * gamma0 * lam
    d = np.sqrt(abs(q))
    x = 0.5 * d * t
    series = d * t < TOL.series_switch

    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        if q > 0.0:
            s_term = np.sinh(x) / d
            c_term = np.cosh(x)
        elif q < 0.0:
            s_term = np.sin(x) / d
            c_term = np.cos(x)
        else:
            s_term = np.zeros_like(t)
            c_term = np.ones_like(t)

    t2 = t * t
    s_series = 0.5 * t * (1.0 + q * t2 / 24.0 + q * q * t2 * t2 / 1920.0)
    c_series = 1.0 + q * t2 / 8.0 + q * q * t2 * t2 / 384.0
    return np.where(series, s_series, s_term), np.where(series, c_series, c_term), series


def _check_time(t: np.ndarray) -> None:
    if np.any(t < 0.0):
        raise ValueError("Time must be non-negative")


def jc_rate(t, gamma0: float, lam: float):
    """Time-dependent decay rate gamma(t) = 2 gamma0 lambda S / (C + lambda S).

    Poles of the oscillatory branch (b_t = 0) are returned as a signed
    infinity; propagation must use b_t there.
    """
    _validate(gamma0, lam)
    t_arr = np.asarray(t, dtype=float)
    _check_time(t_arr)
    q = lam * lam - 2.0 * gamma0 * lam
    s_term, c_term, series = _branch_terms(t_arr, gamma0, lam)

    if q > 0.0:
        d = np.sqrt(q)
        tanh_x = np.tanh(0.5 * d * t_arr)
        stable = 2.0 * gamma0 * lam * tanh_x / (d + lam * tanh_x)
        series_value = 2.0 * gamma0 * lam * s_term / (c_term + lam * s_term)
        return _scalar_or_array(np.where(series, series_value, stable), t)

    numerator = 2.0 * gamma0 * lam * s_term
    denominator = c_term + lam * s_term
    scale = np.abs(c_term) + np.abs(lam * s_term)
    pole = np.abs(denominator) <= 1e-15 * scale
    with np.errstate(divide="ignore", invalid="ignore"):
        value = np.where(pole, np.copysign(np.inf, numerator), numerator / denominator)
    if np.any(pole):
        logger.debug(f"jc_rate hit a pole at t={t_arr[pole] if t_arr.ndim else float(t_arr)}")
    return _scalar_or_array(value, t)


def jc_b(t, gamma0: float, lam: float):
    """Excited-state amplitude b_t with b_0 = 1."""
    _validate(gamma0, lam)
    t_arr = np.asarray(t, dtype=float)
    _check_time(t_arr)
    q = lam * lam - 2.0 * gamma0 * lam
    s_term, c_term, series = _branch_terms(t_arr, gamma0, lam)
    direct = np.exp(-0.5 * lam * t_arr) * (c_term + lam * s_term)

    if q > 0.0:
        d = np.sqrt(q)
        # Exponentials written so that neither factor overflows.
        stable = 0.5 * (
            (1.0 + lam / d) * np.exp(0.5 * (d - lam) * t_arr)
            + (1.0 - lam / d) * np.exp(-0.5 * (d + lam) * t_arr)
        )
        direct = np.where(series, direct, stable)
    return _scalar_or_array(direct, t)


def jc_b_dot(t, gamma0: float, lam: float):
    """db/dt = -gamma0 lambda exp(-lambda t/2) S, finite everywhere."""
    _validate(gamma0, lam)
    t_arr = np.asarray(t, dtype=float)
    _check_time(t_arr)
    q = lam * lam - 2.0 * gamma0 * lam
    s_term, _, series = _branch_terms(t_arr, gamma0, lam)
    direct = -gamma0 * lam * np.exp(-0.5 * lam * t_arr) * s_term

    if q > 0.0:
        d = np.sqrt(q)
        stable = -gamma0 * lam / (2.0 * d) * (
            np.exp(0.5 * (d - lam) * t_arr) - np.exp(-0.5 * (d + lam) * t_arr)
        )
        direct = np.where(series, direct, stable)
    return _scalar_or_array(direct, t)


def jc_critical_coupling(lam: float) -> float:
    """Coupling above which b_t oscillates."""
    if lam <= 0.0:
        raise ValueError("lambda must be positive")
    return 0.5 * lam


def jc_zero_times(tau: float, gamma0: float, lam: float) -> np.ndarray:
    """Zeros of b_t in (0, tau]: tan(d t/2) = -d/lambda."""
    _validate(gamma0, lam)
    q = lam * lam - 2.0 * gamma0 * lam
    if q >= 0.0:
        return np.empty(0)
    d = np.sqrt(-q)
    first = 2.0 * (np.pi - np.arctan(d / lam)) / d
    period = 2.0 * np.pi / d
    count = int(np.floor((tau - first) / period)) + 1 if tau >= first else 0
    return first + period * np.arange(max(count, 0))


def jc_stationary_times(tau: float, gamma0: float, lam: float) -> np.ndarray:
    """Zeros of db/dt in (0, tau]: sin(d t/2) = 0."""
    _validate(gamma0, lam)
    q = lam * lam - 2.0 * gamma0 * lam
    if q >= 0.0:
        return np.empty(0)
    period = 2.0 * np.pi / np.sqrt(-q)
    count = int(np.floor(tau / period))
    return period * np.arange(1, count + 1)


def jc_extremum_times(tau: float, gamma0: float, lam: float) -> np.ndarray:
    """Sorted times in (0, tau) where |b_t|^2 changes monotonicity."""
    times = np.concatenate([jc_zero_times(tau, gamma0, lam), jc_stationary_times(tau, gamma0, lam)])
    return np.sort(times[(times > 0.0) & (times < tau)])


def jc_first_revival_time(gamma0: float, lam: float) -> float:
    """First zero of b_t, after which |b_t|^2 grows again; inf when none."""
    _validate(gamma0, lam)
    q = lam * lam - 2.0 * gamma0 * lam
    if q >= 0.0:
        return float("inf")
    d = np.sqrt(-q)
    return float(2.0 * (np.pi - np.arctan(d / lam)) / d)
