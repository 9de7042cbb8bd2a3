"""Optimality conditions for initial states that saturate the speed limit.

A pure state evolves optimally at time t when the generator output is
diagonal in the {psi0, psi0_perp} basis with a non-positive psi0 weight,
i.e. <psi0|L_t(rho_t)|psi0_perp> = 0 and <psi0|L_t(rho_t)|psi0> <= 0. In
Bloch terms dr/dt is anti-parallel to r0.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Tuple

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from analyzers.qsl_metrics import ratio_profile
from core.constants import DEFAULT_TAU_SUBGRID, TOL
from core.exceptions import ConfigurationError
from core.generators import (
    EternalNM,
    GeneratorFamily,
    Pauli,
    PhaseCovariant,
    TimeDependentModel,
    evaluate_generator,
)
from core.propagation import AffineBlochMap, affine_map
from core.qubit import DensityMatrix, PureState, bloch_to_density_array, norm_triple, velocity_to_matrix_array
from core.rates import RateSet

logger = logging.getLogger(__name__)

RESIDUAL_FAMILIES = ("phase_covariant", "pauli", "eternal_nm", "time_dependent")


@dataclass(frozen=True)
class OptimalityReport:
    c1: complex
    c2: float
    satisfied: bool
    t: float
    op_norm: float


@dataclass(frozen=True)
class ScanEntry:
    a: float
    theta: float
    min_ratio: float
    optimal: bool


@dataclass(frozen=True, eq=False)
class StateScan:
    """Ratios on the (a, theta, tau') grid and the flagged optimal states."""

    tau: float
    taus: np.ndarray
    a_values: np.ndarray
    thetas: np.ndarray
    ratios: np.ndarray
    polished_roots: Tuple[float, ...] = field(default=())

    @property
    def min_ratio(self) -> np.ndarray:
        return self.ratios.min(axis=-1)

    @property
    def optimal(self) -> np.ndarray:
        return self.min_ratio >= 1.0 - TOL.ratio_flag

    @property
    def entries(self) -> List[ScanEntry]:
        min_ratio, optimal = self.min_ratio, self.optimal
        return [
            ScanEntry(float(a), float(theta), float(min_ratio[i, j]), bool(optimal[i, j]))
            for i, a in enumerate(self.a_values)
            for j, theta in enumerate(self.thetas)
        ]

    def optimal_set(self) -> np.ndarray:
        """Populations a that are optimal for every sampled phase."""
        return self.a_values[np.all(self.optimal, axis=1)]


# --------------------------------------------------
# Condition chain
# --------------------------------------------------


def optimality_conditions(
    spec: GeneratorFamily,
    psi0: PureState,
    t: float,
    steps: Optional[int] = None,
    affine: Optional[AffineBlochMap] = None,
) -> OptimalityReport:
    """c1 = <psi0|rho_dot|psi0_perp> and c2 = <psi0|rho_dot|psi0> along the trajectory from psi0."""
    if t < 0.0:
        raise ValueError(f"t must be non-negative, got {t}")
    r0 = psi0.bloch_array()
    if affine is not None:
        index = int(np.argmin(np.abs(affine.times - t)))
        if abs(affine.times[index] - t) > 1e-12:
            raise ValueError(f"t={t} is not on the supplied grid")
    else:
        affine = affine_map(spec, t, steps)
        index = -1
    r_t = affine.apply(r0)[index]
    rho_t = DensityMatrix(bloch_to_density_array(r_t), tolerance=TOL.propagation_drift)

    try:
        rho_dot = evaluate_generator(spec, rho_t, t)
    except ValueError:
        # Rate pole: the map derivative stays finite.
        rho_dot = velocity_to_matrix_array(affine.velocity(r0)[index])

    ket, perp = psi0.ket, psi0.orthogonal_ket
    c1 = complex(ket.conj() @ rho_dot @ perp)
    c2 = float(np.real(ket.conj() @ rho_dot @ ket))
    satisfied = abs(c1) <= TOL.optimality and c2 <= TOL.optimality
    return OptimalityReport(c1=c1, c2=c2, satisfied=satisfied, t=float(t), op_norm=norm_triple(rho_dot).op)


# --------------------------------------------------
# Closed-form residuals (positive prefactors stripped)
# --------------------------------------------------


def _pc_residual(a, t, rates: RateSet):
    gamma1, gamma2, gamma3, _ = rates.constants()
    total = gamma1 + gamma2
    bracket = -4.0 * np.exp(gamma3 * t) * ((a - 1.0) * gamma1 + a * gamma2) - (1.0 - 2.0 * a) * np.exp(
        0.25 * total * t
    ) * (total + 4.0 * gamma3)
    return (a - 1.0) * a * bracket / 16.0


def _pauli_residual(a, t, rates: RateSet):
    gamma1, gamma2, gamma3, _ = rates.constants()
    bracket = (gamma2 + gamma3) * np.exp(2.0 * gamma1 * t) - (gamma1 + gamma2) * np.exp(2.0 * gamma3 * t)
    return (1.0 - 2.0 * a) ** 2 * (a - 1.0) * a * bracket**2


def _eternal_residual(a, t):
    return (1.0 - 2.0 * a) ** 2 * (a - 1.0) * a * np.exp(-4.0 * t)


def _time_dependent_residual(a, t, steps: Optional[int]):
    def single(value: float) -> float:
        if value in (0.0, 1.0):
            return 0.0
        if value == 0.5:
            f = 1.0 + 4.0 * np.cos(t) + np.sin(t)
            return 0.5 * (f - abs(f))
        report = optimality_conditions(TimeDependentModel(), PureState(value), t, steps)
        return report.op_norm + report.c2

    return np.vectorize(single, otypes=[float])(a)


def condition_residual(
    family: str,
    a,
    t: float,
    rates: Optional[RateSet] = None,
    steps: Optional[int] = None,
):
    """Residual whose zero set in ``a`` is the set of optimal initial populations.

    Args:
        family: One of "phase_covariant", "pauli" (constant rates, omega = 0),
            "eternal_nm" or "time_dependent".
        a: Excited population(s).
        t: Time.
        rates: Required for the constant-rate families.

    Raises:
        ConfigurationError: if the family or its rates do not match a residual.
    """
    a_arr = np.asarray(a, dtype=float)
    if family in ("phase_covariant", "pauli"):
        if rates is None or not rates.is_constant:
            raise ConfigurationError(f"The {family} residual needs constant rates", field_path="model")
        if family == "phase_covariant" and rates.constants()[3] != 0.0:
            raise ConfigurationError("The phase_covariant residual assumes omega = 0", field_path="model.omega")
        values = _pc_residual(a_arr, t, rates) if family == "phase_covariant" else _pauli_residual(a_arr, t, rates)
    elif family == "eternal_nm":
        values = _eternal_residual(a_arr, t)
    elif family == "time_dependent":
        values = _time_dependent_residual(a_arr, t, steps)
    else:
        raise ConfigurationError(f"No optimality residual for family {family!r}", field_path="model.family")
    return float(values) if a_arr.ndim == 0 else values


def residual_family(spec: GeneratorFamily) -> Optional[Tuple[str, Optional[RateSet]]]:
    """Closed-form residual applicable to ``spec``, if any."""
    if isinstance(spec, EternalNM):
        return "eternal_nm", None
    if isinstance(spec, TimeDependentModel):
        return "time_dependent", None
    if isinstance(spec, (PhaseCovariant, Pauli)) and spec.rates.is_constant:
        if isinstance(spec, PhaseCovariant) and spec.rates.constants()[3] != 0.0:
            return None
        return spec.family, spec.rates
    return None


# --------------------------------------------------
# State scan
# --------------------------------------------------


# Families whose residual vanishes only on isolated populations, with a jump
# rather than a sign change next to them.
DISCRETE_ROOTS = {"time_dependent": (0.0, 0.5, 1.0)}


def _snap_root(residual: Callable[[float], float], candidates: Tuple[float, ...], a_k: float, spacing: float) -> Optional[float]:
    nearest = min(candidates, key=lambda c: abs(c - a_k))
    if abs(nearest - a_k) <= 0.5 * spacing and abs(residual(nearest)) <= TOL.optimality:
        return nearest
    return None


def _polish_roots(family: str, rates: Optional[RateSet], tau: float, a_values: np.ndarray, flagged: np.ndarray) -> List[float]:
    residual = lambda a: condition_residual(family, a, tau, rates)  # noqa: E731
    spacing = float(a_values[1] - a_values[0])
    roots: List[float] = []
    for k in np.flatnonzero(flagged):
        a_k = float(a_values[k])
        if family in DISCRETE_ROOTS:
            root = _snap_root(residual, DISCRETE_ROOTS[family], a_k, spacing)
            if root is None:
                logger.warning(f"Flagged a={a_k} is not an isolated optimum of {family} at tau={tau}")
            else:
                roots.append(root)
            continue
        value = residual(a_k)
        if abs(value) <= TOL.optimality:
            roots.append(a_k)
            continue
        low = float(a_values[max(k - 1, 0)])
        high = float(a_values[min(k + 1, len(a_values) - 1)])
        for neighbour in (low, high):
            if neighbour != a_k and value * residual(neighbour) < 0.0:
                roots.append(brentq(residual, min(a_k, neighbour), max(a_k, neighbour), xtol=TOL.root))
                break
        else:
            result = minimize_scalar(lambda a: abs(residual(a)), bounds=(low, high), method="bounded", options={"xatol": TOL.root})
            if result.fun <= TOL.optimality:
                roots.append(float(result.x))
            else:
                logger.warning(f"Flagged a={a_k} has no residual root nearby (min {result.fun:.3e})")
    return sorted(set(np.round(roots, 12)))


def optimal_state_scan(
    spec: GeneratorFamily,
    tau: float,
    a_grid: int = 101,
    theta_grid: int = 1,
    tau_points: int = DEFAULT_TAU_SUBGRID,
    steps: Optional[int] = None,
    threads: int = 1,
    affine: Optional[AffineBlochMap] = None,
) -> StateScan:
    """Minimum over a tau' sub-grid of the speed-limit ratio for every (a, theta).

    A state is flagged optimal when that minimum is at least 1 - 1e-6. Flagged
    populations are confirmed against the closed-form residual of the family
    where one exists; families in ``DISCRETE_ROOTS`` snap to their isolated
    optima instead of bracketing a sign change.
    """
    if a_grid < 11:
        raise ValueError(f"a_grid must be at least 11, got {a_grid}")
    if tau <= 0.0:
        raise ValueError("State scan needs tau > 0")
    affine = affine if affine is not None else affine_map(spec, tau, steps)

    a_values = np.linspace(0.0, 1.0, a_grid)
    thetas = np.linspace(0.0, 2.0 * np.pi, theta_grid, endpoint=False)
    states = np.array([PureState(a, theta).bloch_array() for a in a_values for theta in thetas])
    sub = np.unique(np.round(np.linspace(0, affine.times.size - 1, tau_points)).astype(int))

    chunks = [states[i : i + 64] for i in range(0, len(states), 64)]
    profile = lambda chunk: ratio_profile(affine, chunk)[:, sub]  # noqa: E731
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as executor:
            parts = list(executor.map(profile, chunks))
    else:
        parts = [profile(chunk) for chunk in chunks]
    ratios = np.concatenate(parts, axis=0).reshape(a_grid, theta_grid, sub.size)

    scan = StateScan(tau=float(tau), taus=affine.times[sub], a_values=a_values, thetas=thetas, ratios=ratios)
    family = residual_family(spec)
    if family is not None:
        flagged = np.all(scan.optimal, axis=1)
        roots = _polish_roots(family[0], family[1], tau, a_values, flagged)
        scan = StateScan(scan.tau, scan.taus, a_values, thetas, ratios, tuple(roots))
    logger.info(f"State scan of {spec.family}: optimal a = {scan.optimal_set().round(6).tolist()}")
    return scan


# --------------------------------------------------
# Pipeline stage
# --------------------------------------------------


class OptimalityAnalyzer:
    """Optimal-state scan plus residual confirmation for one spec."""

    def __init__(self, threads: int = 1):
        self.threads = threads
        logger.info("Initialized OptimalityAnalyzer")

    def process(
        self,
        spec: GeneratorFamily,
        tau: float,
        a_grid: int = 101,
        theta_grid: int = 1,
        tau_points: int = DEFAULT_TAU_SUBGRID,
        steps: Optional[int] = None,
    ) -> Dict[str, Any]:
        scan = optimal_state_scan(spec, tau, a_grid, theta_grid, tau_points, steps, self.threads)
        return {
            "scan": scan,
            "optimal_set": scan.optimal_set(),
            "polished_roots": list(scan.polished_roots),
        }


