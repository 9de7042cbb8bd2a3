"""Classification of qubit maps by how they move the z-basis pair.

Class A maps create coherence from a basis state; class B maps keep both
basis states on the axis, so z(t) = g(t) +- h(t). The C refinements couple
the signs of dg/dt and dh/dt, and D is the unital (h = 0) case. Every class
below B has a closed-form speed-limit ratio in terms of g, h and the backflow
of the pair.
"""

import logging
from dataclasses import dataclass
from typing import Any, Dict, Optional

import numpy as np

from analyzers.qsl_metrics import ratio_profile
from core.constants import TOL
from core.exceptions import NoClosedFormError
from core.generators import GeneratorFamily
from core.propagation import AffineBlochMap, affine_map
from core.quadrature import SampledFunction, positive_variation, sqrt_clipped, total_variation

logger = logging.getLogger(__name__)

CLOSED_FORM_CLASSES = ("Ci", "Cii", "Ciii", "Civ", "D")
_BRANCH = {"Ci": 1, "Ciii": 1, "D": 1, "Cii": -1, "Civ": -1}


@dataclass(frozen=True)
class TaxonomyLabel:
    label: str
    branch: int
    g_tau: float
    h_tau: float
    formula_id: Optional[str]
    violation_time: Optional[float] = None
    ambiguous: bool = False

    @property
    def has_closed_form(self) -> bool:
        return self.formula_id is not None


def _formula_id(label: str, g_tau: float) -> Optional[str]:
    if label in ("Ciii", "Civ"):
        return f"{label.lower()}_{'pos' if g_tau >= 0.0 else 'neg'}"
    if label in ("Ci", "Cii", "D"):
        return label.lower()
    return None


def _coherence_growth(affine: AffineBlochMap) -> Optional[float]:
    """Grid time preceding the first transverse excursion of +z or -z, if any."""
    column, shift = affine.A[:, :2, 2], affine.s[:, :2]
    up = np.linalg.norm(shift + column, axis=-1)
    down = np.linalg.norm(shift - column, axis=-1)
    exceeded = np.flatnonzero(np.maximum(up, down) > TOL.coherence)
    if exceeded.size == 0:
        return None
    return float(affine.times[max(exceeded[0] - 1, 0)])


def classify_map(
    spec: GeneratorFamily,
    tau: float,
    steps: Optional[int] = None,
    basis: Optional[np.ndarray] = None,
    affine: Optional[AffineBlochMap] = None,
) -> TaxonomyLabel:
    """Label the map on [0, tau] relative to the pair along the third column of ``basis``.

    The default basis is the identity, i.e. the +-z pair.
    """
    if tau <= 0.0:
        raise ValueError(f"Classification needs tau > 0, got {tau}")
    affine = affine if affine is not None else affine_map(spec, tau, steps)
    if basis is not None:
        affine = affine.in_basis(basis)

    g_tau, h_tau = float(affine.g[-1]), float(affine.h[-1])
    violation = _coherence_growth(affine)
    if violation is not None:
        logger.info(f"{spec.family}: coherence grows from t={violation:.6g}, class A")
        return TaxonomyLabel("A", 1, g_tau, h_tau, None, violation_time=violation)

    if np.max(np.abs(affine.h)) <= TOL.coherence:
        return TaxonomyLabel("D", 1, g_tau, h_tau, "d")

    dg, dh, band = affine.g_dot, affine.h_dot, TOL.deadband
    grows_g, falls_g = dg > band, dg < -band
    grows_h, falls_h = dh > band, dh < -band
    same_sign = not np.any((grows_g & falls_h) | (falls_g & grows_h))
    opposite_sign = not np.any((grows_g & grows_h) | (falls_g & falls_h))

    if same_sign:
        label = "Ciii" if not np.any(grows_g | grows_h) else "Ci"
    elif opposite_sign:
        label = "Civ" if not np.any(grows_g | falls_h) else "Cii"
    else:
        logger.warning(f"{spec.family}: derivative signs of g and h are not coupled, class B only")
        return TaxonomyLabel("B", 1, g_tau, h_tau, None, ambiguous=True)

    return TaxonomyLabel(label, _BRANCH[label], g_tau, h_tau, _formula_id(label, g_tau))


# --------------------------------------------------
# Closed-form ratios
# --------------------------------------------------


def pair_blp_from_g(g: SampledFunction) -> float:
    """Backflow of the basis pair, whose trace distance is |g|."""
    squared = g.map_values(np.square, lambda v: 2.0 * v)
    return positive_variation(squared, transform=sqrt_clipped)


def taxonomy_ratio(label: TaxonomyLabel, g: SampledFunction, h: SampledFunction, blp: float) -> float:
    """Closed-form tau_QSL/tau of a class C or D map at the end of the samples.

    Raises:
        NoClosedFormError: for class A and for B maps without a C refinement.
    """
    if label.label not in CLOSED_FORM_CLASSES:
        raise NoClosedFormError(f"Class {label.label} has no closed-form speed-limit ratio")
    g_tau = float(g.values[-1])
    h_tau = float(h.values[-1])
    if label.label == "D":
        numerator = 1.0 - g_tau
        denominator = 2.0 * blp + 1.0 - abs(g_tau)
    else:
        signed_h = h_tau if label.branch == 1 else -h_tau
        numerator = 1.0 - g_tau - signed_h
        if label.label in ("Ci", "Cii"):
            denominator = 2.0 * blp + 1.0 - abs(g_tau) + total_variation(h)
        elif g_tau >= 0.0:
            denominator = 2.0 * blp + numerator
        else:
            denominator = 2.0 * blp + 1.0 + g_tau - signed_h
    if denominator <= TOL.cross_check:
        return 1.0
    return numerator / denominator


# --------------------------------------------------
# Pipeline stage
# --------------------------------------------------


class TaxonomyAnalyzer:
    """Classify a map and compare the class formula with the quadrature ratio over time."""

    def __init__(self, profile_points: int = 64):
        self.profile_points = profile_points
        logger.info("Initialized TaxonomyAnalyzer")

    def process(
        self,
        spec: GeneratorFamily,
        tau: float,
        steps: Optional[int] = None,
        basis: Optional[np.ndarray] = None,
    ) -> Dict[str, Any]:
        affine = affine_map(spec, tau, steps)
        if basis is not None:
            affine = affine.in_basis(basis)
        label = classify_map(spec, tau, affine=affine)
        logger.info(f"{spec.family} classified as {label.label} (branch {label.branch}, formula {label.formula_id})")

        g, h = affine.sampled_g(), affine.sampled_h()
        indices = np.unique(np.round(np.linspace(1, affine.times.size - 1, self.profile_points)).astype(int))
        times = affine.times[indices]
        pipeline = ratio_profile(affine, np.array([0.0, 0.0, float(label.branch)]))[indices]

        predicted = np.full(times.shape, np.nan)
        if label.has_closed_form:
            for k, t in enumerate(times):
                g_t, h_t = g.restrict(t), h.restrict(t)
                predicted[k] = taxonomy_ratio(label, g_t, h_t, pair_blp_from_g(g_t))

        gap = np.abs(predicted - pipeline)
        max_gap = float(np.nanmax(gap)) if label.has_closed_form else None
        return {
            "label": label,
            "times": times,
            "g": affine.g[indices],
            "h": affine.h[indices],
            "predicted_ratio": predicted,
            "pipeline_ratio": pipeline,
            "gap": gap,
            "max_gap": max_gap,
        }
