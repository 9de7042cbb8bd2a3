"""Time-local generators of the supported master-equation families.

Every family is described by Hamiltonian terms c(t) H and jump terms
gamma(t) D[A] with D[A] rho = A rho A^+ - {A^+ A, rho}/2, so that

    L_t(rho) = -i [H(t), rho] + sum_k gamma_k(t) D[A_k] rho.

In Bloch coordinates the generator is affine, dr/dt = M(t) r + v(t).
Phase-covariant and Pauli families provide M and v in closed form; any
other family derives them from its terms.
"""

from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import ClassVar, Tuple, Union

import numpy as np

from core.constants import TOL
from core.exceptions import ConfigurationError
from core.jaynes_cummings import jc_b, jc_b_dot, jc_critical_coupling, jc_rate
from core.quadrature import cumulative_integral, integrate_adaptive_simpson
from core.qubit import (
    IDENTITY,
    PAULI,
    SIGMA_MINUS,
    SIGMA_PLUS,
    SIGMA_X,
    SIGMA_Y,
    SIGMA_Z,
    DensityMatrix,
)
from core.rates import (
    ConstantRate,
    ExpSinusoidRate,
    JaynesCummingsRate,
    RateFunction,
    RateSet,
    ScaledRate,
    SumRate,
    TanhRate,
    ZERO_RATE,
)

Term = Tuple[np.ndarray, RateFunction]


def _commutator_map(h: np.ndarray):
    return lambda x: -1j * (h @ x - x @ h)


def _dissipator_map(a: np.ndarray):
    a_dag = a.conj().T
    number = a_dag @ a
    return lambda x: a @ x @ a_dag - 0.5 * (number @ x + x @ number)


def _bloch_form(superop) -> Tuple[np.ndarray, np.ndarray]:
    """(M, v) of a linear map acting on rho = (I + r.sigma)/2."""
    v = np.array([np.trace(s @ superop(0.5 * IDENTITY)).real for s in PAULI])
    m = np.empty((3, 3))
    for i, sigma_i in enumerate(PAULI):
        image = superop(0.5 * sigma_i)
        for j, sigma_j in enumerate(PAULI):
            m[j, i] = np.trace(sigma_j @ image).real
    return m, v


class GeneratorFamily(ABC):
    """Base of all generator specs; ``family`` is the tag used by configs."""

    family: ClassVar[str]

    @abstractmethod
    def hamiltonian_terms(self) -> Tuple[Term, ...]:
        """Pairs (H, c(t)) with H Hermitian."""

    @abstractmethod
    def jump_terms(self) -> Tuple[Term, ...]:
        """Pairs (A, gamma(t))."""

    def bloch_coefficients(self, times) -> Tuple[np.ndarray, np.ndarray]:
        """M(t) with shape (n, 3, 3) and v(t) with shape (n, 3)."""
        times = np.atleast_1d(np.asarray(times, dtype=float))
        m = np.zeros((times.size, 3, 3))
        v = np.zeros((times.size, 3))
        terms = [(_commutator_map(h), c) for h, c in self.hamiltonian_terms()]
        terms += [(_dissipator_map(a), rate) for a, rate in self.jump_terms()]
        for superop, coefficient in terms:
            values = _finite(coefficient.evaluate(times), self.family)
            m_k, v_k = _bloch_form(superop)
            m += values[:, None, None] * m_k
            v += values[:, None] * v_k
        return m, v

    def rate_functions(self) -> Tuple[RateFunction, ...]:
        return tuple(rate for _, rate in self.jump_terms())


def _finite(values, family: str) -> np.ndarray:
    values = np.asarray(values, dtype=float)
    if not np.all(np.isfinite(values)):
        raise ValueError(f"Non-finite rate evaluation in {family} generator")
    return values


# --------------------------------------------------
# Phase-covariant families
# --------------------------------------------------


class PhaseCovariantForm(GeneratorFamily):
    """-i omega [sigma_z, rho] + gamma1/2 D[s+] + gamma2/2 D[s-] + gamma3/2 (s_z rho s_z - rho)."""

    @abstractmethod
    def rate_set(self) -> RateSet:
        """Rates gamma1 (pumping), gamma2 (decay), gamma3 (dephasing), omega."""

    def hamiltonian_terms(self) -> Tuple[Term, ...]:
        return ((SIGMA_Z, self.rate_set().omega),)

    def jump_terms(self) -> Tuple[Term, ...]:
        rates = self.rate_set()
        return (
            (SIGMA_PLUS, ScaledRate(rates.gamma1, 0.5)),
            (SIGMA_MINUS, ScaledRate(rates.gamma2, 0.5)),
            (SIGMA_Z, ScaledRate(rates.gamma3, 0.5)),
        )

    def bloch_coefficients(self, times) -> Tuple[np.ndarray, np.ndarray]:
        times = np.atleast_1d(np.asarray(times, dtype=float))
        gamma1, gamma2, gamma3, omega = self.rate_set().evaluate(times)
        transverse = 0.25 * (gamma1 + gamma2) + gamma3
        m = np.zeros((times.size, 3, 3))
        m[:, 0, 0] = -transverse
        m[:, 1, 1] = -transverse
        m[:, 0, 1] = -2.0 * omega
        m[:, 1, 0] = 2.0 * omega
        m[:, 2, 2] = -0.5 * (gamma1 + gamma2)
        v = np.zeros((times.size, 3))
        v[:, 2] = 0.5 * (gamma1 - gamma2)
        return m, v

    def rate_functions(self) -> Tuple[RateFunction, ...]:
        rates = self.rate_set()
        return rates.gamma1, rates.gamma2, rates.gamma3


@dataclass(frozen=True)
class PhaseCovariant(PhaseCovariantForm):
    family: ClassVar[str] = "phase_covariant"

    rates: RateSet

    def rate_set(self) -> RateSet:
        return self.rates


@dataclass(frozen=True)
class JaynesCummings(PhaseCovariantForm):
    """Resonant damped Jaynes-Cummings: a single sigma- jump with rate gamma(t)."""

    family: ClassVar[str] = "jaynes_cummings"

    gamma0: float
    lam: float

    def __post_init__(self):
        if self.gamma0 <= 0.0 or self.lam <= 0.0:
            raise ConfigurationError(
                f"Jaynes-Cummings requires gamma0 > 0 and lambda > 0, got gamma0={self.gamma0}, lambda={self.lam}"
            )

    def rate_set(self) -> RateSet:
        return RateSet(ZERO_RATE, ScaledRate(JaynesCummingsRate(self.gamma0, self.lam), 2.0))

    @property
    def critical_coupling(self) -> float:
        return jc_critical_coupling(self.lam)


@dataclass(frozen=True)
class TimeDependentModel(PhaseCovariantForm):
    """gamma1 = gamma2 = exp(-t/4)(1 + sin t), gamma3 = 2 exp(-t/4) cos t, omega = 0."""

    family: ClassVar[str] = "time_dependent"

    def rate_set(self) -> RateSet:
        gamma = ExpSinusoidRate(amplitude=1.0, decay=0.25, offset=1.0, sin_coef=1.0)
        gamma3 = ExpSinusoidRate(amplitude=2.0, decay=0.25, cos_coef=1.0)
        return RateSet.commutative(gamma, kappa=1.0, gamma3=gamma3)


# --------------------------------------------------
# Pauli families
# --------------------------------------------------


class PauliForm(GeneratorFamily):
    """sum_i gamma_i (sigma_i rho sigma_i - rho)."""

    @abstractmethod
    def rate_set(self) -> RateSet:
        """gamma1, gamma2, gamma3 multiply the sigma_x, sigma_y, sigma_z dissipators."""

    def hamiltonian_terms(self) -> Tuple[Term, ...]:
        return ()

    def jump_terms(self) -> Tuple[Term, ...]:
        rates = self.rate_set()
        return ((SIGMA_X, rates.gamma1), (SIGMA_Y, rates.gamma2), (SIGMA_Z, rates.gamma3))

    def bloch_coefficients(self, times) -> Tuple[np.ndarray, np.ndarray]:
        times = np.atleast_1d(np.asarray(times, dtype=float))
        gamma1, gamma2, gamma3, _ = self.rate_set().evaluate(times)
        m = np.zeros((times.size, 3, 3))
        m[:, 0, 0] = -2.0 * (gamma2 + gamma3)
        m[:, 1, 1] = -2.0 * (gamma1 + gamma3)
        m[:, 2, 2] = -2.0 * (gamma1 + gamma2)
        return m, np.zeros((times.size, 3))


@dataclass(frozen=True)
class Pauli(PauliForm):
    family: ClassVar[str] = "pauli"

    rates: RateSet

    def rate_set(self) -> RateSet:
        return self.rates


@dataclass(frozen=True)
class EternalNM(PauliForm):
    """Pauli rates (1/2, 1/2, -tanh(t)/2): never CP-divisible for t > 0."""

    family: ClassVar[str] = "eternal_nm"

    def rate_set(self) -> RateSet:
        return RateSet(ConstantRate(0.5), ConstantRate(0.5), TanhRate(scale=-0.5))


# --------------------------------------------------
# Generic Lindblad form
# --------------------------------------------------


@dataclass(frozen=True, eq=False)
class GenericLindblad(GeneratorFamily):
    """Constant Hamiltonian plus jump operators with time-dependent rates."""

    family: ClassVar[str] = "generic_lindblad"

    hamiltonian: np.ndarray
    jumps: Tuple[Term, ...]

    def __post_init__(self):
        h = np.asarray(self.hamiltonian, dtype=complex)
        if h.shape != (2, 2) or not np.allclose(h, h.conj().T, atol=TOL.construction):
            raise ConfigurationError("Hamiltonian must be a Hermitian 2x2 matrix")
        if not self.jumps:
            raise ConfigurationError("GenericLindblad needs at least one jump operator")
        jumps = []
        for operator, rate in self.jumps:
            operator = np.asarray(operator, dtype=complex)
            if operator.shape != (2, 2):
                raise ConfigurationError("Jump operators must be 2x2 matrices")
            jumps.append((operator, rate))
        object.__setattr__(self, "hamiltonian", h)
        object.__setattr__(self, "jumps", tuple(jumps))

    def hamiltonian_terms(self) -> Tuple[Term, ...]:
        return ((self.hamiltonian, ConstantRate(1.0)),)

    def jump_terms(self) -> Tuple[Term, ...]:
        return self.jumps


GeneratorSpec = Union[PhaseCovariant, JaynesCummings, TimeDependentModel, Pauli, EternalNM, GenericLindblad]


# --------------------------------------------------
# Operations
# --------------------------------------------------


def evaluate_generator(spec: GeneratorFamily, rho: DensityMatrix, t: float) -> np.ndarray:
    """L_t(rho) evaluated term by term from the master-equation form.

    Raises:
        ValueError: for negative times or non-finite rate values.
    """
    if t < 0.0:
        raise ValueError(f"Generator time must be non-negative, got {t}")
    x = rho.entries
    out = np.zeros((2, 2), dtype=complex)
    for h, coefficient in spec.hamiltonian_terms():
        c = float(_finite(coefficient(t), spec.family))
        if c != 0.0:
            out += c * _commutator_map(h)(x)
    for a, rate in spec.jump_terms():
        gamma = float(_finite(rate(t), spec.family))
        if gamma != 0.0:
            out += gamma * _dissipator_map(a)(x)
    return out


def bloch_generator(spec: GeneratorFamily, t: float) -> Tuple[np.ndarray, np.ndarray]:
    """(M, v) at a single time."""
    m, v = spec.bloch_coefficients(np.array([t], dtype=float))
    return m[0], v[0]


def commutative_pc_gh(t, kappa: float, gamma: RateFunction):
    """g = exp(-Gamma), h = (1 - kappa)/(1 + kappa) (1 - exp(-Gamma)), Gamma = (kappa + 1)/2 int gamma."""
    if not 0.0 <= kappa <= 1.0:
        raise ValueError(f"kappa must lie in [0, 1], got {kappa}")
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr < 0.0):
        raise ValueError("Time must be non-negative")

    if t_arr.ndim == 0:
        integral, _ = integrate_adaptive_simpson(lambda s: float(gamma(s)), 0.0, float(t_arr))
    else:
        grid, inverse = np.unique(np.concatenate([[0.0], t_arr.ravel()]), return_inverse=True)
        integral = cumulative_integral(gamma.evaluate, grid)[inverse[1:]].reshape(t_arr.shape)

    big_gamma = 0.5 * (kappa + 1.0) * np.asarray(integral)
    g = np.exp(-big_gamma)
    h = (1.0 - kappa) / (1.0 + kappa) * (1.0 - g)
    if t_arr.ndim == 0:
        return float(g), float(h)
    return g, h


def depolarizing_parameter(spec: GeneratorFamily, t: float, samples: int = 64) -> float:
    """p(t) with rho_t = (1 - p) rho_0 + p I/2 for depolarizing generators.

    Phase-covariant generators are depolarizing when omega = 0 and
    gamma1 = gamma2 = 2 gamma3; Pauli generators when all rates agree.

    Raises:
        ConfigurationError: if the generator is not of depolarizing form.
    """
    grid = np.linspace(0.0, max(float(t), 1e-12), samples)
    m, v = spec.bloch_coefficients(grid)
    diagonal = np.diagonal(m, axis1=1, axis2=2)
    off_diagonal = m - np.einsum("ni,ij->nij", diagonal, np.eye(3))
    isotropic = np.allclose(diagonal, diagonal[:, :1], atol=TOL.cross_check, rtol=0.0)
    if not (isotropic and np.allclose(off_diagonal, 0.0) and np.allclose(v, 0.0)):
        raise ConfigurationError(f"{spec.family} generator is not of depolarizing form")
    rate = _contraction_rate(spec)
    integral, _ = integrate_adaptive_simpson(lambda s: float(rate(s)), 0.0, float(t))
    return float(1.0 - np.exp(-integral))


def _contraction_rate(spec: GeneratorFamily) -> RateFunction:
    """Isotropic Bloch contraction rate -M_zz as a rate function."""
    if isinstance(spec, (PhaseCovariantForm, PauliForm)):
        rates = spec.rate_set()
        factor = 0.5 if isinstance(spec, PhaseCovariantForm) else 2.0
        return ScaledRate(SumRate((rates.gamma1, rates.gamma2)), factor)
    raise ConfigurationError(f"{spec.family} generator is not of depolarizing form")


__all__ = [
    "GeneratorFamily",
    "GeneratorSpec",
    "PhaseCovariantForm",
    "PhaseCovariant",
    "JaynesCummings",
    "TimeDependentModel",
    "PauliForm",
    "Pauli",
    "EternalNM",
    "GenericLindblad",
    "evaluate_generator",
    "bloch_generator",
    "commutative_pc_gh",
    "depolarizing_parameter",
    "jc_rate",
    "jc_b",
    "jc_b_dot",
]
