"""Declarative rate functions and the phase-covariant / Pauli rate set.

Rates are a closed family of frozen dataclasses so that scenarios stay
reproducible from config files and cumulative integrals can be memoized on
the rate itself.
"""

from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np

from core.jaynes_cummings import jc_rate


def _output(values: np.ndarray, t):
    return float(values) if np.ndim(t) == 0 else values


class RateFunction(ABC):
    """A real function of time (units 1/time)."""

    @abstractmethod
    def evaluate(self, t: np.ndarray) -> np.ndarray:
        """Vectorized evaluation on a float array."""

    def __call__(self, t):
        values = self.evaluate(np.asarray(t, dtype=float))
        return _output(np.asarray(values, dtype=float), t)

    @property
    def is_constant(self) -> bool:
        return False


@dataclass(frozen=True)
class ConstantRate(RateFunction):
    value: float

    def __post_init__(self):
        if not np.isfinite(self.value):
            raise ValueError(f"Constant rate must be finite, got {self.value}")

    def evaluate(self, t: np.ndarray) -> np.ndarray:
        return np.full_like(t, float(self.value), dtype=float)

    @property
    def is_constant(self) -> bool:
        return True


@dataclass(frozen=True)
class JaynesCummingsRate(RateFunction):
    """Decay rate of the resonant damped Jaynes-Cummings model."""

    gamma0: float
    lam: float

    def evaluate(self, t: np.ndarray) -> np.ndarray:
        return np.asarray(jc_rate(t, self.gamma0, self.lam), dtype=float)


@dataclass(frozen=True)
class TanhRate(RateFunction):
    """offset + scale * tanh(t)."""

    scale: float
    offset: float = 0.0

    def evaluate(self, t: np.ndarray) -> np.ndarray:
        return self.offset + self.scale * np.tanh(t)


@dataclass(frozen=True)
class ExpSinusoidRate(RateFunction):
    """amplitude * exp(-decay t) * (offset + sin_coef sin(wt) + cos_coef cos(wt))."""

    amplitude: float = 1.0
    decay: float = 0.0
    offset: float = 0.0
    sin_coef: float = 0.0
    cos_coef: float = 0.0
    frequency: float = 1.0

    def evaluate(self, t: np.ndarray) -> np.ndarray:
        phase = self.frequency * t
        return (
            self.amplitude
            * np.exp(-self.decay * t)
            * (self.offset + self.sin_coef * np.sin(phase) + self.cos_coef * np.cos(phase))
        )

    @property
    def is_constant(self) -> bool:
        oscillating = (self.sin_coef != 0.0 or self.cos_coef != 0.0) and self.frequency != 0.0
        return self.decay == 0.0 and not oscillating


@dataclass(frozen=True)
class TabulatedRate(RateFunction):
    """Piecewise-linear interpolation of user samples, held flat outside the table."""

    times: Tuple[float, ...]
    values: Tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "times", tuple(float(v) for v in self.times))
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))
        if len(self.times) != len(self.values) or len(self.times) < 2:
            raise ValueError("Tabulated rate needs at least two (time, value) samples of equal length")
        if np.any(np.diff(self.times) <= 0.0):
            raise ValueError("Tabulated rate times must be strictly increasing")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("Tabulated rate values must be finite")

    def evaluate(self, t: np.ndarray) -> np.ndarray:
        return np.interp(t, self.times, self.values)


@dataclass(frozen=True)
class ScaledRate(RateFunction):
    base: RateFunction
    factor: float

    def evaluate(self, t: np.ndarray) -> np.ndarray:
        return self.factor * np.asarray(self.base.evaluate(t), dtype=float)

    @property
    def is_constant(self) -> bool:
        return self.factor == 0.0 or self.base.is_constant


@dataclass(frozen=True)
class SumRate(RateFunction):
    terms: Tuple[RateFunction, ...]

    def evaluate(self, t: np.ndarray) -> np.ndarray:
        total = np.zeros_like(t, dtype=float)
        for term in self.terms:
            total = total + term.evaluate(t)
        return total

    @property
    def is_constant(self) -> bool:
        return all(term.is_constant for term in self.terms)


ZERO_RATE = ConstantRate(0.0)


def as_rate(value) -> RateFunction:
    if isinstance(value, RateFunction):
        return value
    return ConstantRate(float(value))


@dataclass(frozen=True)
class RateSet:
    """gamma1 (pumping, sigma+), gamma2 (decay, sigma-), gamma3 (dephasing), omega.

    For Pauli dynamics gamma_i multiplies the sigma_i dissipator instead.
    ``kappa`` is set when the set belongs to the commutative class
    gamma2 = kappa * gamma1.
    """

    gamma1: RateFunction
    gamma2: RateFunction
    gamma3: RateFunction = ZERO_RATE
    omega: RateFunction = ZERO_RATE
    kappa: Optional[float] = field(default=None)

    def __post_init__(self):
        for name in ("gamma1", "gamma2", "gamma3", "omega"):
            object.__setattr__(self, name, as_rate(getattr(self, name)))

    @classmethod
    def constant(cls, gamma1: float, gamma2: float, gamma3: float = 0.0, omega: float = 0.0) -> "RateSet":
        return cls(ConstantRate(gamma1), ConstantRate(gamma2), ConstantRate(gamma3), ConstantRate(omega))

    @classmethod
    def commutative(
        cls,
        gamma: RateFunction,
        kappa: float,
        gamma3: RateFunction = ZERO_RATE,
        omega: RateFunction = ZERO_RATE,
    ) -> "RateSet":
        """Commutative phase-covariant rates gamma1 = gamma, gamma2 = kappa * gamma."""
        if not 0.0 <= kappa <= 1.0:
            raise ValueError(f"kappa must lie in [0, 1], got {kappa}")
        gamma = as_rate(gamma)
        return cls(gamma, ScaledRate(gamma, float(kappa)), as_rate(gamma3), as_rate(omega), kappa=float(kappa))

    @property
    def is_constant(self) -> bool:
        return all(r.is_constant for r in (self.gamma1, self.gamma2, self.gamma3, self.omega))

    def evaluate(self, t) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        t = np.asarray(t, dtype=float)
        values = tuple(np.asarray(r.evaluate(t), dtype=float) for r in (self.gamma1, self.gamma2, self.gamma3, self.omega))
        for name, value in zip(("gamma1", "gamma2", "gamma3", "omega"), values):
            if not np.all(np.isfinite(value)):
                raise ValueError(f"Rate {name} is not finite on the requested times")
        return values

    def constants(self) -> Tuple[float, float, float, float]:
        """Values of a constant rate set."""
        if not self.is_constant:
            raise ValueError("Rate set is time dependent")
        gamma1, gamma2, gamma3, omega = (float(v[0]) for v in self.evaluate(np.zeros(1)))
        return gamma1, gamma2, gamma3, omega
