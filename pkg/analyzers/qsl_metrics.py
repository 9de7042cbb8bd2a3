"""Quantum speed limit time and ratio.

For a qubit, d rho/dt = (dr/dt . sigma)/2, so the generator output is
Hermitian and traceless and its three norms are |dr/dt|/2, |dr/dt| and
|dr/dt|/sqrt(2). With sin^2 of the Bures angle equal to (1 - r0.r)/2 the
ratio becomes (1 - r0.r(tau)) / int |dr/dt| dt.
"""

import logging
from dataclasses import dataclass
from typing import Any, Dict, Optional

import numpy as np

from analyzers.nonmarkov import blp_jc_analytic
from core.constants import TOL
from core.generators import GeneratorFamily, JaynesCummings
from core.jaynes_cummings import jc_b
from core.propagation import AffineBlochMap, affine_map
from core.quadrature import SampledFunction, cumulative_speed_integral, positive_variation
from core.qubit import (
    DensityMatrix,
    PureState,
    bloch_to_density_array,
    fidelity_and_bures,
    norm_triple_array,
    velocity_to_matrix_array,
)

logger = logging.getLogger(__name__)

_NEGLIGIBLE = 1e-15


@dataclass(frozen=True)
class QSLResult:
    tau: float
    lambda_op: float
    lambda_tr: float
    lambda_hs: float
    bures: float
    fidelity: float
    tau_qsl: float
    tau_qsl_tr: float
    tau_qsl_hs: float
    ratio: float
    revivals_F: float


def ratio_profile(affine: AffineBlochMap, r0: np.ndarray) -> np.ndarray:
    """tau_QSL/tau at every grid time for initial vectors r0 of shape (..., 3).

    The value at t = 0, and wherever no path length has accumulated yet, is 1.
    """
    r0 = np.asarray(r0, dtype=float)
    bloch = affine.apply(r0)
    velocity = affine.velocity(r0)
    speeds = np.linalg.norm(velocity, axis=-1)
    dt = affine.times[1] - affine.times[0] if affine.times.size > 1 else 0.0
    arc = cumulative_speed_integral(velocity, speeds, dt)
    distance = 1.0 - np.einsum("...j,...nj->...n", r0, bloch)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(arc > _NEGLIGIBLE, distance / arc, 1.0)
    return ratio


def qsl_from_map(affine: AffineBlochMap, psi0: PureState) -> QSLResult:
    """Speed limit quantities for one pure initial state on an existing map."""
    tau = affine.tau
    r0 = psi0.bloch_array()
    bloch = affine.apply(r0)
    velocity = affine.velocity(r0)

    rho_tau = DensityMatrix(bloch_to_density_array(bloch[-1]), tolerance=TOL.propagation_drift)
    fidelity, bures = fidelity_and_bures(psi0, rho_tau)
    op, tr, hs = norm_triple_array(velocity_to_matrix_array(velocity))
    overlap = SampledFunction(affine.times, bloch @ r0, velocity @ r0)
    revivals = positive_variation(overlap)

    if tau == 0.0:
        return QSLResult(0.0, float(op[0]), float(tr[0]), float(hs[0]), bures, fidelity, 0.0, 0.0, 0.0, 1.0, 0.0)

    dt = affine.times[1] - affine.times[0]
    lambdas = [float(cumulative_speed_integral(velocity, norm, dt)[-1]) / tau for norm in (op, tr, hs)]
    sin2 = 1.0 - fidelity
    if lambdas[0] * tau <= _NEGLIGIBLE:
        tau_qsl = tau_tr = tau_hs = tau
        ratio = 1.0
    else:
        tau_qsl, tau_tr, tau_hs = (sin2 / lam for lam in lambdas)
        ratio = tau_qsl / tau
    return QSLResult(
        tau=tau,
        lambda_op=lambdas[0],
        lambda_tr=lambdas[1],
        lambda_hs=lambdas[2],
        bures=bures,
        fidelity=fidelity,
        tau_qsl=tau_qsl,
        tau_qsl_tr=tau_tr,
        tau_qsl_hs=tau_hs,
        ratio=ratio,
        revivals_F=revivals,
    )


def qsl_time(
    spec: GeneratorFamily,
    psi0: PureState,
    tau: float,
    steps: Optional[int] = None,
    affine: Optional[AffineBlochMap] = None,
) -> QSLResult:
    """Quadrature route to tau_QSL = sin^2(L) / Lambda_op.

    tau = 0 gives ratio 1 by convention.
    """
    if tau < 0.0:
        raise ValueError(f"tau must be non-negative, got {tau}")
    if affine is None or abs(affine.tau - tau) > 1e-12:
        affine = affine_map(spec, tau, steps)
    return qsl_from_map(affine, psi0)


def qsl_ratio_jc_closed(tau: float, gamma0: float, lam: float) -> float:
    """1 / (2 N / (1 - |b_tau|^2) + 1) for the excited initial state."""
    if tau <= 0.0:
        return 1.0
    blp = blp_jc_analytic(tau, gamma0, lam)
    gap = 1.0 - float(jc_b(tau, gamma0, lam)) ** 2
    if gap <= TOL.cross_check:
        return 1.0 if blp <= _NEGLIGIBLE else 0.0
    return 1.0 / (2.0 * blp / gap + 1.0)


def _check_branch(branch: int) -> None:
    if branch not in (1, -1):
        raise ValueError(f"branch must be +1 or -1 for z(0) = +-1, got {branch}")


def revivals_of_fidelity(g: SampledFunction, h: SampledFunction, tau: float, branch: int) -> float:
    """Accumulated increase of g + branch * h on [0, tau]."""
    _check_branch(branch)
    overlap = (g + h.scaled(float(branch))).restrict(tau)
    return positive_variation(overlap)


def qsl_ratio_class_B(g: SampledFunction, h: SampledFunction, tau: float, branch: int) -> float:
    """(F_tau / (1 - F) + 1)^-1 for a map that keeps z-basis states on the z axis."""
    _check_branch(branch)
    if tau <= 0.0:
        return 1.0
    revivals = revivals_of_fidelity(g, h, tau, branch)
    overlap_tau = float(g(tau)) + branch * float(h(tau))
    infidelity = 0.5 * (1.0 - overlap_tau)
    if infidelity < TOL.cross_check:
        return 1.0 if revivals <= _NEGLIGIBLE else 0.0
    return 1.0 / (revivals / infidelity + 1.0)


# --------------------------------------------------
# Pipeline stage
# --------------------------------------------------


class QSLAnalyzer:
    """Quadrature speed-limit ratio with closed-form cross-checks where they exist."""

    def __init__(self):
        logger.info("Initialized QSLAnalyzer")

    def process(self, spec: GeneratorFamily, psi0: PureState, tau: float, steps: Optional[int] = None) -> Dict[str, Any]:
        logger.info(f"Computing QSL for {spec.family}, a={psi0.a}, theta={psi0.theta}, tau={tau}")
        result = qsl_time(spec, psi0, tau, steps)
        analysis: Dict[str, Any] = {"qsl": result, "closed_form": None}
        if isinstance(spec, JaynesCummings) and psi0.a == 1.0:
            analysis["closed_form"] = qsl_ratio_jc_closed(tau, spec.gamma0, spec.lam)
        logger.info(f"QSL ratio {result.ratio:.12g}")
        return analysis
