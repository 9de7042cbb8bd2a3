"""Shared fixtures for the QSLab test suite."""

import numpy as np
import pytest

from core.generators import EternalNM, JaynesCummings, Pauli, PhaseCovariant, TimeDependentModel
from core.rates import ConstantRate, ExpSinusoidRate, RateSet


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def jc_strong():
    """Strong coupling: first zero of b(t) near t = 1.26."""
    return JaynesCummings(gamma0=5.0, lam=1.0)


@pytest.fixture
def jc_weak():
    return JaynesCummings(gamma0=0.2, lam=1.0)


@pytest.fixture
def pc_123():
    return PhaseCovariant(RateSet.constant(1.0, 2.0, 3.0))


@pytest.fixture
def pauli_123():
    return Pauli(RateSet.constant(1.0, 2.0, 3.0))


@pytest.fixture
def eternal():
    return EternalNM()


@pytest.fixture
def time_dependent():
    return TimeDependentModel()


@pytest.fixture
def sinusoidal_gamma():
    """gamma(t) = 1 + 2 cos 2t, negative on (pi/3, 2 pi/3)."""
    return ExpSinusoidRate(offset=1.0, cos_coef=2.0, frequency=2.0)


@pytest.fixture
def commutative_pc():
    """Factory for gamma1 = gamma, gamma2 = kappa gamma with omega = gamma3 = 0."""

    def build(kappa, gamma=None):
        return PhaseCovariant(RateSet.commutative(gamma if gamma is not None else ConstantRate(1.0), kappa))

    return build


@pytest.fixture
def shipped_models(jc_strong, pc_123, pauli_123, eternal, time_dependent):
    return {
        "jaynes_cummings": jc_strong,
        "phase_covariant": pc_123,
        "pauli": pauli_123,
        "eternal_nm": eternal,
        "time_dependent": time_dependent,
    }
