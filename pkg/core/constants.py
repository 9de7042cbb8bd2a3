"""Numerical tolerances and defaults shared across the laboratory."""

from dataclasses import dataclass


@dataclass(frozen=True)
class Tolerances:
    """Central tolerance record.

    Construction checks on density matrices use ``construction``; formula
    cross-checks use ``cross_check``; the drift allowed on propagated states
    before a warning is ``physics_drift`` and before a hard error
    ``propagation_drift``.
    """

    construction: float = 1e-12
    cross_check: float = 1e-12
    physics_drift: float = 1e-9
    propagation_drift: float = 1e-6
    richardson: float = 1e-7
    series_switch: float = 1e-4
    quadrature: float = 1e-10
    root: float = 1e-10
    coherence: float = 1e-10
    deadband: float = 1e-10
    optimality: float = 1e-10
    ratio_flag: float = 1e-6
    gate: float = 1e-6
    touch: float = 1e-12
    crossing_dedupe: float = 1e-6


TOL = Tolerances()

# Steps of the fixed-step integrator per unit of evolution time.
DEFAULT_STEPS_PER_UNIT_TIME = 2048
MIN_STEPS = 16

DEFAULT_PAIR_RESOLUTION = 144
DEFAULT_TAU_SUBGRID = 256
DEFAULT_REGION_SAMPLES = 4096
POSITIVITY_DIRECTIONS = 64

# Angle (radians) within which an optimal pair counts as the z axis or the equator.
PAIR_AXIS_TOLERANCE = 0.1
