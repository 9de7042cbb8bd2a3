"""BLP non-Markovianity and the phase-covariant region boundaries.

The trace distance of a pair evolved by an affine map is D(t) = |A(t) dr0|/2;
the translation s(t) cancels. Backflow is the positive variation of D,
computed from the smooth proxy |A dr0|^2 so that extrema where D touches
zero stay resolvable.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Any, Callable, Dict, List, Optional, Tuple

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from core.constants import DEFAULT_PAIR_RESOLUTION, DEFAULT_REGION_SAMPLES, PAIR_AXIS_TOLERANCE, TOL
from core.generators import GeneratorFamily, JaynesCummings, PhaseCovariantForm
from core.jaynes_cummings import jc_b, jc_extremum_times
from core.propagation import AffineBlochMap, affine_map, resolve_steps
from core.quadrature import SampledFunction, cumulative_rate_integral, positive_variation, sqrt_half
from core.qubit import BlochVector, fibonacci_sphere
from core.rates import RateFunction, RateSet

logger = logging.getLogger(__name__)


PAIR_SEARCH = "numeric-pair-search"
FIXED_PAIR = "numeric-fixed-pair"
ANALYTIC = "analytic"


def pair_kind(pair: Tuple[BlochVector, BlochVector]) -> str:
    """'z_axis', 'equatorial' or 'general', from the direction of r1 - r2."""
    delta = pair[0].as_array() - pair[1].as_array()
    polar = float(np.arccos(min(abs(delta[2]) / np.linalg.norm(delta), 1.0)))
    if polar < PAIR_AXIS_TOLERANCE:
        return "z_axis"
    if abs(polar - 0.5 * np.pi) < PAIR_AXIS_TOLERANCE:
        return "equatorial"
    return "general"


@dataclass(frozen=True)
class BLPResult:
    value: float
    pair: Tuple[BlochVector, BlochVector]
    method: str

    @property
    def pair_kind(self) -> str:
        return pair_kind(self.pair)


@dataclass(frozen=True)
class RegionFlags:
    """Signed boundary values gamma' + 4 gamma3, gamma' + 2 gamma3 and gamma' at time t."""

    t: float
    blp_boundary: float
    secondary_boundary: float
    semigroup_boundary: float

    @property
    def blp_violated(self) -> bool:
        return self.blp_boundary < 0.0


@dataclass(frozen=True)
class CPDivisibilityReport:
    violated: bool
    first_violation: Optional[float]


# --------------------------------------------------
# Pair backflow
# --------------------------------------------------


def pair_backflow(affine: AffineBlochMap, delta) -> float:
    """Positive variation of |A(t) delta|/2 on the map's grid."""
    delta = np.asarray(delta, dtype=float)
    separation = np.einsum("nij,j->ni", affine.A, delta)
    separation_dot = np.einsum("nij,j->ni", affine.A_dot, delta)
    squared = np.sum(separation * separation, axis=-1)
    squared_dot = 2.0 * np.sum(separation * separation_dot, axis=-1)
    return positive_variation(SampledFunction(affine.times, squared, squared_dot), transform=sqrt_half)


def _pair_values(affine: AffineBlochMap, deltas: np.ndarray, threads: int) -> np.ndarray:
    if threads > 1 and len(deltas) > 1:
        with ThreadPoolExecutor(max_workers=threads) as executor:
            return np.fromiter(executor.map(lambda d: pair_backflow(affine, d), deltas), dtype=float)
    return np.array([pair_backflow(affine, d) for d in deltas])


def blp_pair(
    spec: GeneratorFamily,
    r1: BlochVector,
    r2: BlochVector,
    tau: float,
    steps: Optional[int] = None,
    affine: Optional[AffineBlochMap] = None,
) -> float:
    """Backflow of trace distance for one fixed pair of initial states."""
    delta = r1.as_array() - r2.as_array()
    if np.linalg.norm(delta) <= TOL.cross_check:
        raise ValueError("BLP pair needs two distinct initial states")
    for r in (r1, r2):
        if r.norm > 1.0 + TOL.physics_drift:
            raise ValueError(f"Initial Bloch vector {r} is not a state")
    if tau <= 0.0:
        return 0.0
    affine = affine if affine is not None else affine_map(spec, tau, steps)
    return pair_backflow(affine, delta)


def _tangent_patch(u: np.ndarray, spacing: float, half_width: int = 2) -> np.ndarray:
    helper = np.array([1.0, 0.0, 0.0]) if abs(u[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
    e1 = np.cross(u, helper)
    e1 /= np.linalg.norm(e1)
    e2 = np.cross(u, e1)
    offsets = np.arange(-half_width, half_width + 1) * spacing
    grid = u + offsets[:, None, None] * e1 + offsets[None, :, None] * e2
    grid = grid.reshape(-1, 3)
    return grid / np.linalg.norm(grid, axis=-1, keepdims=True)


def blp_measure(
    spec: GeneratorFamily,
    tau: float,
    resolution: int = DEFAULT_PAIR_RESOLUTION,
    steps: Optional[int] = None,
    full_search: bool = False,
    threads: int = 1,
    affine: Optional[AffineBlochMap] = None,
) -> BLPResult:
    """Maximal backflow over antipodal pure pairs.

    Directions come from a Fibonacci grid of ``resolution`` points; the best
    cell is refined twice with spacing divided by 4. ``full_search`` also
    tries every pair of distinct grid states, which is only useful to
    falsify the antipodal restriction.
    """
    if tau <= 0.0:
        up = BlochVector(0.0, 0.0, 1.0)
        return BLPResult(0.0, (up, BlochVector(0.0, 0.0, -1.0)), PAIR_SEARCH)
    affine = affine if affine is not None else affine_map(spec, tau, steps)

    directions = fibonacci_sphere(resolution)
    values = _pair_values(affine, 2.0 * directions, threads)
    best = int(np.argmax(values))
    best_value, best_u = float(values[best]), directions[best]

    spacing = np.sqrt(4.0 * np.pi / resolution)
    for level in (1, 2):
        spacing /= 4.0
        patch = _tangent_patch(best_u, spacing)
        patch_values = _pair_values(affine, 2.0 * patch, threads)
        k = int(np.argmax(patch_values))
        if patch_values[k] > best_value:
            best_value, best_u = float(patch_values[k]), patch[k]
        logger.debug(f"Pair search level {level}: best backflow {best_value:.6e}")

    pair = (BlochVector.from_array(best_u), BlochVector.from_array(-best_u))
    if full_search:
        points = fibonacci_sphere(min(resolution, 64))
        i, j = np.triu_indices(len(points), k=1)
        pair_values = _pair_values(affine, points[i] - points[j], threads)
        k = int(np.argmax(pair_values))
        if pair_values[k] > best_value:
            logger.warning("Two-state search beat the antipodal pairs")
            best_value = float(pair_values[k])
            pair = (BlochVector.from_array(points[i[k]]), BlochVector.from_array(points[j[k]]))

    logger.info(f"BLP measure for {spec.family} at tau={tau}: {best_value:.6e}")
    return BLPResult(best_value, pair, PAIR_SEARCH)


# --------------------------------------------------
# Closed forms
# --------------------------------------------------


def blp_jc_analytic(tau: float, gamma0: float, lam: float) -> float:
    """(1/2) int |d|b|^2/dt| + (1/2)(|b_tau|^2 - 1), telescoped over the extrema of |b|^2."""
    if tau <= 0.0:
        return 0.0
    points = np.concatenate([[0.0], jc_extremum_times(tau, gamma0, lam), [tau]])
    populations = np.asarray(jc_b(points, gamma0, lam)) ** 2
    value = 0.5 * np.sum(np.abs(np.diff(populations))) + 0.5 * (populations[-1] - 1.0)
    return float(max(value, 0.0))


def blp_commutative_pc_analytic(kappa: float, gamma: RateFunction, tau: float, steps: Optional[int] = None) -> float:
    """Backflow of |g| for the commutative class, with dg/dt = -(1 + kappa)/2 gamma g."""
    if tau <= 0.0:
        return 0.0
    steps = resolve_steps(tau, steps)
    times = np.linspace(0.0, tau, steps + 1)
    rate = 0.5 * (1.0 + kappa)
    g = np.exp(-rate * cumulative_rate_integral(gamma, tau, steps))
    g_dot = -rate * np.asarray(gamma.evaluate(times)) * g
    return positive_variation(SampledFunction(times, g, g_dot))


def blp_closed_form(spec: GeneratorFamily, tau: float, steps: Optional[int] = None) -> Optional[BLPResult]:
    """Closed-form backflow of the +-z pair, or None when the family has none."""
    if isinstance(spec, JaynesCummings):
        value = blp_jc_analytic(tau, spec.gamma0, spec.lam)
    elif isinstance(spec, PhaseCovariantForm) and spec.rate_set().kappa is not None:
        rates = spec.rate_set()
        value = blp_commutative_pc_analytic(rates.kappa, rates.gamma1, tau, steps)
    else:
        return None
    return BLPResult(value, (BlochVector(0.0, 0.0, 1.0), BlochVector(0.0, 0.0, -1.0)), ANALYTIC)


# --------------------------------------------------
# Phase-covariant rate criterion
# --------------------------------------------------


def region_boundaries(rates: RateSet, times) -> Dict[str, np.ndarray]:
    times = np.asarray(times, dtype=float)
    gamma1, gamma2, gamma3, _ = rates.evaluate(times)
    gamma_prime = gamma1 + gamma2
    return {
        "gamma_prime": gamma_prime,
        "gamma3": gamma3,
        "blp_boundary": gamma_prime + 4.0 * gamma3,
        "secondary_boundary": gamma_prime + 2.0 * gamma3,
        "semigroup_boundary": gamma_prime,
    }


def pc_blp_criterion(rates: RateSet, t: float) -> RegionFlags:
    """BLP non-Markovian at t exactly when gamma1 + gamma2 + 4 gamma3 < 0."""
    values = region_boundaries(rates, np.array([t]))
    return RegionFlags(
        t=float(t),
        blp_boundary=float(values["blp_boundary"][0]),
        secondary_boundary=float(values["secondary_boundary"][0]),
        semigroup_boundary=float(values["semigroup_boundary"][0]),
    )


def _zeros(f: Callable[[np.ndarray], np.ndarray], t_max: float, samples: int) -> List[float]:
    grid = np.linspace(0.0, t_max, samples + 1)
    values = f(grid)
    scalar = lambda t: float(f(np.array([t]))[0])  # noqa: E731

    roots = [float(t) for t in grid[1:][values[1:] == 0.0]]
    crossings = np.flatnonzero(values[:-1] * values[1:] < 0.0)
    for k in crossings:
        roots.append(brentq(scalar, grid[k], grid[k + 1], xtol=1e-14))

    magnitude = np.abs(values)
    for k in range(1, samples):
        window = values[k - 1 : k + 2]
        local_min = magnitude[k] <= magnitude[k - 1] and magnitude[k] <= magnitude[k + 1]
        if not local_min or values[k] == 0.0 or np.any(window[:-1] * window[1:] < 0.0):
            continue
        result = minimize_scalar(
            lambda t: abs(scalar(t)),
            bounds=(grid[k - 1], grid[k + 1]),
            method="bounded",
            options={"xatol": 1e-12},
        )
        if result.fun <= TOL.touch:
            roots.append(float(result.x))

    deduped: List[float] = []
    for root in sorted(roots):
        if root > 0.0 and (not deduped or root - deduped[-1] > TOL.crossing_dedupe):
            deduped.append(root)
    return deduped


def region_crossings(rates: RateSet, t_max: float, samples: int = DEFAULT_REGION_SAMPLES) -> Dict[str, List[float]]:
    """Crossing and touching times of the three boundary lines on (0, t_max]."""
    crossings = {}
    for name in ("blp_boundary", "secondary_boundary", "semigroup_boundary"):
        crossings[name] = _zeros(lambda t, key=name: region_boundaries(rates, t)[key], t_max, samples)
    merged: List[float] = []
    for root in sorted(r for roots in crossings.values() for r in roots):
        if not merged or root - merged[-1] > TOL.crossing_dedupe:
            merged.append(root)
    crossings["all"] = merged
    return crossings


def cp_divisibility_indicator(spec: GeneratorFamily, times) -> CPDivisibilityReport:
    """Rate-sign proxy for CP-divisibility: violated when any rate is negative."""
    times = np.asarray(times, dtype=float)
    negative = np.zeros(times.shape, dtype=bool)
    for rate in spec.rate_functions():
        with np.errstate(invalid="ignore"):
            negative |= np.asarray(rate.evaluate(times)) < 0.0
    if not np.any(negative):
        return CPDivisibilityReport(False, None)
    return CPDivisibilityReport(True, float(times[np.argmax(negative)]))


# --------------------------------------------------
# Pipeline stage
# --------------------------------------------------


class NonMarkovAnalyzer:
    """Backflow, closed-form cross-checks and the rate-sign indicator for one spec."""

    def __init__(self, resolution: int = DEFAULT_PAIR_RESOLUTION, full_search: bool = False, threads: int = 1):
        self.resolution = resolution
        self.full_search = full_search
        self.threads = threads
        logger.info("Initialized NonMarkovAnalyzer")

    def process(self, spec: GeneratorFamily, tau: float, steps: Optional[int] = None) -> Dict[str, Any]:
        logger.info(f"Measuring non-Markovianity of {spec.family} up to tau={tau}")
        affine = affine_map(spec, tau, steps)
        measure = blp_measure(
            spec, tau, self.resolution, full_search=self.full_search, threads=self.threads, affine=affine
        )
        up, down = BlochVector(0.0, 0.0, 1.0), BlochVector(0.0, 0.0, -1.0)
        result: Dict[str, Any] = {
            "blp": measure,
            "blp_z_pair": BLPResult(blp_pair(spec, up, down, tau, affine=affine), (up, down), FIXED_PAIR),
            "cp_divisibility": cp_divisibility_indicator(spec, affine.times[1:]),
        }
        closed = blp_closed_form(spec, tau, len(affine.times) - 1)
        if closed is not None:
            result["blp_analytic"] = closed
        if isinstance(spec, PhaseCovariantForm) and not isinstance(spec, JaynesCummings):
            times = affine.times[1:]
            boundary = region_boundaries(spec.rate_set(), times)["blp_boundary"]
            result["criterion_fires"] = bool(np.any(boundary < 0.0))
        logger.info(f"BLP analysis complete: {measure.value:.6e}")
        return result
