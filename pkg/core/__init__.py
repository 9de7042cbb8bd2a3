"""QSLab core: qubit states, generator families and affine Bloch maps."""

from .exceptions import (
    ConfigurationError,
    NoClosedFormError,
    NonphysicalStateError,
    NumericalGateError,
    PhysicsInvariantError,
    QSLabError,
    StepSizeError,
)
from .generators import (
    EternalNM,
    GenericLindblad,
    JaynesCummings,
    Pauli,
    PhaseCovariant,
    TimeDependentModel,
    evaluate_generator,
)
from .propagation import AffineBlochMap, Trajectory, affine_map, propagate
from .qubit import BlochVector, DensityMatrix, PureState
from .rates import RateSet

__version__ = "0.1.0"

__all__ = [
    "AffineBlochMap",
    "BlochVector",
    "ConfigurationError",
    "DensityMatrix",
    "EternalNM",
    "GenericLindblad",
    "JaynesCummings",
    "NoClosedFormError",
    "NonphysicalStateError",
    "NumericalGateError",
    "Pauli",
    "PhaseCovariant",
    "PhysicsInvariantError",
    "PureState",
    "QSLabError",
    "RateSet",
    "StepSizeError",
    "TimeDependentModel",
    "Trajectory",
    "affine_map",
    "evaluate_generator",
    "propagate",
]
