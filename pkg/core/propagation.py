"""State trajectories and the affine Bloch decomposition r(t) = A(t) r(0) + s(t).

Closed forms are used for the Jaynes-Cummings, commutative and constant
phase-covariant, Pauli and eternally non-Markovian families. Everything else
is integrated with fixed-step RK4 on the 3x4 augmented system (the mixed
state and the three unit vectors), with a Richardson error estimate from a
second solve at twice the step.
"""

import logging
from dataclasses import dataclass
from functools import cached_property
from typing import Optional, Tuple

import numpy as np
from tenacity import Retrying, retry_if_exception_type, stop_after_attempt

from core.constants import DEFAULT_STEPS_PER_UNIT_TIME, MIN_STEPS, POSITIVITY_DIRECTIONS, TOL
from core.exceptions import NumericalGateError, PhysicsInvariantError, StepSizeError
from core.generators import (
    EternalNM,
    GeneratorFamily,
    JaynesCummings,
    PauliForm,
    PhaseCovariantForm,
)
from core.jaynes_cummings import jc_b, jc_b_dot
from core.quadrature import SampledFunction, cumulative_rate_integral
from core.qubit import DensityMatrix, bloch_to_density_array, fibonacci_sphere

logger = logging.getLogger(__name__)

METHODS = ("auto", "analytic", "numeric")


@dataclass(frozen=True, eq=False)
class AffineBlochMap:
    """Samples of A(t), s(t) and their time derivatives on a uniform grid."""

    times: np.ndarray
    A: np.ndarray
    s: np.ndarray
    A_dot: np.ndarray
    s_dot: np.ndarray
    method: str

    @property
    def tau(self) -> float:
        return float(self.times[-1])

    @property
    def g(self) -> np.ndarray:
        return self.A[:, 2, 2]

    @property
    def h(self) -> np.ndarray:
        return self.s[:, 2]

    @property
    def g_dot(self) -> np.ndarray:
        return self.A_dot[:, 2, 2]

    @property
    def h_dot(self) -> np.ndarray:
        return self.s_dot[:, 2]

    def sampled_g(self) -> SampledFunction:
        return SampledFunction(self.times, self.g, self.g_dot)

    def sampled_h(self) -> SampledFunction:
        return SampledFunction(self.times, self.h, self.h_dot)

    def apply(self, r0) -> np.ndarray:
        """Bloch trajectories for initial vectors r0 of shape (3,) or (m, 3)."""
        return np.einsum("nij,...j->...ni", self.A, np.asarray(r0, dtype=float)) + self.s

    def velocity(self, r0) -> np.ndarray:
        return np.einsum("nij,...j->...ni", self.A_dot, np.asarray(r0, dtype=float)) + self.s_dot

    def in_basis(self, rotation: np.ndarray) -> "AffineBlochMap":
        """The map expressed in the orthonormal frame whose columns are ``rotation``."""
        rotation = np.asarray(rotation, dtype=float)
        if not np.allclose(rotation.T @ rotation, np.eye(3), atol=1e-12):
            raise ValueError("Basis rotation must be orthogonal")
        rt = rotation.T
        return AffineBlochMap(
            times=self.times,
            A=rt @ self.A @ rotation,
            s=self.s @ rotation,
            A_dot=rt @ self.A_dot @ rotation,
            s_dot=self.s_dot @ rotation,
            method=self.method,
        )


@dataclass(frozen=True, eq=False)
class Trajectory:
    """rho_t on the propagation grid, stored as Bloch vectors."""

    times: np.ndarray
    bloch: np.ndarray
    velocity: np.ndarray
    spec: GeneratorFamily
    method: str

    @cached_property
    def states(self) -> Tuple[DensityMatrix, ...]:
        return tuple(
            DensityMatrix(rho, tolerance=TOL.physics_drift) for rho in bloch_to_density_array(self.bloch)
        )

    @property
    def initial_state(self) -> DensityMatrix:
        return self.states[0]

    @property
    def final_state(self) -> DensityMatrix:
        return DensityMatrix(bloch_to_density_array(self.bloch[-1]), tolerance=TOL.physics_drift)


# --------------------------------------------------
# Grids
# --------------------------------------------------


def resolve_steps(tau: float, steps: Optional[int] = None, steps_per_unit_time: int = DEFAULT_STEPS_PER_UNIT_TIME) -> int:
    """Total step count on [0, tau]; explicit counts must be >= MIN_STEPS. Always even."""
    if steps is None:
        steps = max(MIN_STEPS, int(np.ceil(steps_per_unit_time * tau)))
    elif steps < MIN_STEPS:
        raise ValueError(f"steps must be at least {MIN_STEPS}, got {steps}")
    return int(steps + steps % 2)


def time_grid(tau: float, steps: int) -> np.ndarray:
    return np.linspace(0.0, tau, steps + 1)


# --------------------------------------------------
# Closed forms
# --------------------------------------------------


def _rotation_block(decay: np.ndarray, angle: np.ndarray) -> np.ndarray:
    block = np.zeros((decay.size, 3, 3))
    block[:, 0, 0] = decay * np.cos(angle)
    block[:, 0, 1] = -decay * np.sin(angle)
    block[:, 1, 0] = decay * np.sin(angle)
    block[:, 1, 1] = decay * np.cos(angle)
    return block


def _jaynes_cummings_map(spec: JaynesCummings, times: np.ndarray):
    b = np.asarray(jc_b(times, spec.gamma0, spec.lam))
    b_dot = np.asarray(jc_b_dot(times, spec.gamma0, spec.lam))
    A = np.zeros((times.size, 3, 3))
    A[:, 0, 0] = A[:, 1, 1] = b
    A[:, 2, 2] = b * b
    A_dot = np.zeros_like(A)
    A_dot[:, 0, 0] = A_dot[:, 1, 1] = b_dot
    A_dot[:, 2, 2] = 2.0 * b * b_dot
    s = np.zeros((times.size, 3))
    s[:, 2] = b * b - 1.0
    s_dot = np.zeros_like(s)
    s_dot[:, 2] = 2.0 * b * b_dot
    return A, s, A_dot, s_dot


def _phase_covariant_map(spec: PhaseCovariantForm, tau: float, steps: int, times: np.ndarray):
    rates = spec.rate_set()
    if rates.kappa is not None:
        kappa = rates.kappa
        gamma_integral = cumulative_rate_integral(rates.gamma1, tau, steps)
        big_gamma = 0.5 * (1.0 + kappa) * gamma_integral
        g = np.exp(-big_gamma)
        h = (1.0 - kappa) / (1.0 + kappa) * (1.0 - g)
        transverse = 0.5 * big_gamma + cumulative_rate_integral(rates.gamma3, tau, steps)
        angle = 2.0 * cumulative_rate_integral(rates.omega, tau, steps)
    elif rates.is_constant:
        gamma1, gamma2, gamma3, omega = rates.constants()
        total = gamma1 + gamma2
        g = np.exp(-0.5 * total * times)
        if total != 0.0:
            h = (gamma1 - gamma2) / total * (1.0 - g)
        else:
            h = 0.5 * (gamma1 - gamma2) * times
        transverse = (0.25 * total + gamma3) * times
        angle = 2.0 * omega * times
    else:
        return None

    A = _rotation_block(np.exp(-transverse), angle)
    A[:, 2, 2] = g
    s = np.zeros((times.size, 3))
    s[:, 2] = h
    return A, s


def _pauli_map(spec: PauliForm, tau: float, steps: int, times: np.ndarray):
    if isinstance(spec, EternalNM):
        # exp(-t) cosh(t), from int 2(gamma2 + gamma3) = t - ln cosh t
        transverse = 0.5 * (1.0 + np.exp(-2.0 * times))
        diagonal = np.stack([transverse, transverse, np.exp(-2.0 * times)], axis=-1)
    else:
        rates = spec.rate_set()
        i1, i2, i3 = (cumulative_rate_integral(r, tau, steps) for r in (rates.gamma1, rates.gamma2, rates.gamma3))
        diagonal = np.exp(-2.0 * np.stack([i2 + i3, i1 + i3, i1 + i2], axis=-1))
    A = np.zeros((times.size, 3, 3))
    A[:, [0, 1, 2], [0, 1, 2]] = diagonal
    return A, np.zeros((times.size, 3))


def _analytic_map(spec: GeneratorFamily, tau: float, steps: int, times: np.ndarray):
    """(A, s, A_dot, s_dot) from a closed form, or None."""
    if isinstance(spec, JaynesCummings):
        return _jaynes_cummings_map(spec, times)
    if isinstance(spec, PhaseCovariantForm):
        result = _phase_covariant_map(spec, tau, steps, times)
    elif isinstance(spec, PauliForm):
        result = _pauli_map(spec, tau, steps, times)
    else:
        result = None
    if result is None:
        return None
    A, s = result
    m, v = spec.bloch_coefficients(times)
    return A, s, m @ A, np.einsum("nij,nj->ni", m, s) + v


# --------------------------------------------------
# Fixed-step integration
# --------------------------------------------------


def _rk4_map(spec: GeneratorFamily, tau: float, steps: int):
    fine_times = np.linspace(0.0, tau, 2 * steps + 1)
    try:
        m, v = spec.bloch_coefficients(fine_times)
    except ValueError as e:
        raise NumericalGateError(f"{spec.family} generator cannot be integrated numerically: {e}") from e
    h = tau / steps

    def solve(stride: int) -> np.ndarray:
        count = steps // stride
        dt = h * stride
        x = np.zeros((3, 4))
        x[:, 1:] = np.eye(3)
        out = np.empty((count + 1, 3, 4))
        out[0] = x
        for k in range(count):
            j = 2 * stride * k
            m0, m1, m2 = m[j], m[j + stride], m[j + 2 * stride]
            v0, v1, v2 = v[j][:, None], v[j + stride][:, None], v[j + 2 * stride][:, None]
            k1 = m0 @ x + v0
            k2 = m1 @ (x + 0.5 * dt * k1) + v1
            k3 = m1 @ (x + 0.5 * dt * k2) + v1
            k4 = m2 @ (x + dt * k3) + v2
            x = x + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            out[k + 1] = x
        return out

    fine = solve(1)
    coarse = solve(2)
    error = float(np.max(np.abs(fine[::2] - coarse))) / 15.0
    if not np.isfinite(error) or error > TOL.richardson:
        ratio = error / TOL.richardson if np.isfinite(error) else 16.0
        suggested = int(np.ceil(1.2 * steps * ratio**0.25))
        raise StepSizeError(error, steps, suggested + suggested % 2)
    logger.debug(f"RK4 with {steps} steps, Richardson estimate {error:.2e}")

    s = fine[:, :, 0]
    A = fine[:, :, 1:] - s[:, :, None]
    m_grid, v_grid = m[::2], v[::2]
    return A, s, m_grid @ A, np.einsum("nij,nj->ni", m_grid, s) + v_grid


def _numeric_map(spec: GeneratorFamily, tau: float, steps: int):
    """RK4 with up to two automatic step doublings, subsampled back to the grid."""
    refine = 1
    for attempt in Retrying(
        stop=stop_after_attempt(3),
        retry=retry_if_exception_type(StepSizeError),
        reraise=True,
    ):
        with attempt:
            refine = 2 ** (attempt.retry_state.attempt_number - 1)
            if refine > 1:
                logger.warning(f"Refining {spec.family} integration to {steps * refine} steps")
            result = _rk4_map(spec, tau, steps * refine)
    return tuple(array[::refine] for array in result)


def _check_positivity(A: np.ndarray, s: np.ndarray, family: str) -> None:
    directions = fibonacci_sphere(POSITIVITY_DIRECTIONS)
    images = np.einsum("nij,dj->ndi", A, directions) + s[:, None, :]
    worst = float(np.max(np.linalg.norm(images, axis=-1))) - 1.0
    if worst > TOL.propagation_drift:
        raise PhysicsInvariantError(f"{family} map left the Bloch ball by {worst:.3e}")
    if worst > TOL.physics_drift:
        logger.warning(f"{family} map exceeds the Bloch ball by {worst:.3e}")


# --------------------------------------------------
# Operations
# --------------------------------------------------


def affine_map(
    spec: GeneratorFamily,
    tau: float,
    steps: Optional[int] = None,
    method: str = "auto",
) -> AffineBlochMap:
    """A(t), s(t) on linspace(0, tau, steps + 1).

    Args:
        spec: Generator family.
        tau: Final time; 0 gives a single-point map.
        steps: Total step count (default 2048 per unit time).
        method: "auto" prefers closed forms, "analytic" requires one,
            "numeric" forces RK4.
    """
    if method not in METHODS:
        raise ValueError(f"method must be one of {METHODS}, got {method!r}")
    if tau < 0.0 or not np.isfinite(tau):
        raise ValueError(f"tau must be finite and non-negative, got {tau}")

    if tau == 0.0:
        times = np.zeros(1)
        m, v = spec.bloch_coefficients(times)
        A = np.eye(3)[None]
        s = np.zeros((1, 3))
        return AffineBlochMap(times, A, s, m @ A, v, "analytic" if method != "numeric" else "numeric")

    steps = resolve_steps(tau, steps)
    times = time_grid(tau, steps)

    result = None if method == "numeric" else _analytic_map(spec, tau, steps, times)
    if result is None and method == "analytic":
        raise ValueError(f"No closed form for the {spec.family} family with these rates")
    used = "analytic" if result is not None else "numeric"
    if result is None:
        result = _numeric_map(spec, tau, steps)

    A, s, A_dot, s_dot = result
    _check_positivity(A, s, spec.family)
    logger.debug(f"Affine map for {spec.family} on [0, {tau}] with {steps} steps ({used})")
    return AffineBlochMap(times, A, s, A_dot, s_dot, used)


def extract_affine_map(spec: GeneratorFamily, times) -> AffineBlochMap:
    """Affine map on a uniform grid that starts at 0."""
    times = np.asarray(times, dtype=float)
    if times.ndim != 1 or times.size < 1 or times[0] != 0.0:
        raise ValueError("Time grid must be one-dimensional and start at 0")
    if times.size == 1:
        return affine_map(spec, 0.0)
    steps = times.size - 1
    if not np.allclose(np.diff(times), times[-1] / steps, rtol=1e-9, atol=1e-12):
        raise ValueError("Time grid must be uniform")
    if steps % 2:
        raise ValueError("Time grid must have an even number of steps")
    return affine_map(spec, float(times[-1]), steps)


def propagate(
    spec: GeneratorFamily,
    rho0: DensityMatrix,
    tau: float,
    steps: Optional[int] = None,
    method: str = "auto",
) -> Trajectory:
    """rho_t on [0, tau] started from ``rho0``.

    Raises:
        StepSizeError: if the integrator cannot meet its tolerance.
        PhysicsInvariantError: if the map leaves the Bloch ball.
    """
    affine = affine_map(spec, tau, steps, method)
    return trajectory_from_map(spec, affine, rho0)


def trajectory_from_map(spec: GeneratorFamily, affine: AffineBlochMap, rho0: DensityMatrix) -> Trajectory:
    r0 = rho0.bloch().as_array()
    bloch = affine.apply(r0)
    overshoot = float(np.max(np.linalg.norm(bloch, axis=-1))) - 1.0
    if overshoot > TOL.propagation_drift:
        raise PhysicsInvariantError(f"Trajectory left the Bloch ball by {overshoot:.3e}")
    return Trajectory(affine.times, bloch, affine.velocity(r0), spec, affine.method)
