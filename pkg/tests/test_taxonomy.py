"""Tests for map classification and the class ratio formulas."""

import numpy as np
import pytest

from analyzers.nonmarkov import blp_jc_analytic
from analyzers.taxonomy import (
    TaxonomyAnalyzer,
    TaxonomyLabel,
    classify_map,
    pair_blp_from_g,
    taxonomy_ratio,
)
from core.exceptions import NoClosedFormError
from core.generators import GenericLindblad
from core.propagation import affine_map
from core.quadrature import SampledFunction
from core.qubit import SIGMA_MINUS, SIGMA_X
from core.rates import ConstantRate


@pytest.fixture
def coherent_drive():
    return GenericLindblad(0.5 * SIGMA_X, ((SIGMA_MINUS, ConstantRate(1.0)),))


def _linear(start, slope, tau=1.0, points=101):
    t = np.linspace(0.0, tau, points)
    return SampledFunction(t, start + slope * t, np.full_like(t, slope))


class TestClassify:
    def test_jaynes_cummings_before_and_after_first_zero(self, jc_strong):
        early = classify_map(jc_strong, 1.0)
        assert (early.label, early.branch, early.formula_id) == ("Ciii", 1, "ciii_pos")
        late = classify_map(jc_strong, 3.0)
        assert (late.label, late.branch, late.formula_id) == ("Ci", 1, "ci")
        assert late.g_tau == pytest.approx(late.h_tau + 1.0)

    def test_commutative_constant_rate(self, commutative_pc):
        label = classify_map(commutative_pc(0.5), 2.0)
        assert (label.label, label.branch, label.formula_id) == ("Civ", -1, "civ_pos")
        assert label.h_tau > 0.0

    def test_balanced_rates_are_unital(self, commutative_pc, pauli_123, eternal, time_dependent):
        for spec in (commutative_pc(1.0), pauli_123, eternal, time_dependent):
            label = classify_map(spec, 2.0)
            assert (label.label, label.formula_id) == ("D", "d")

    def test_sinusoidal_rate_changes_class_once_g_revives(self, commutative_pc, sinusoidal_gamma):
        spec = commutative_pc(0.5, sinusoidal_gamma)
        assert classify_map(spec, 1.0).label == "Civ"
        assert classify_map(spec, 3.0).label == "Cii"

    def test_coherent_drive_is_class_a(self, coherent_drive):
        label = classify_map(coherent_drive, 2.0)
        assert label.label == "A"
        assert label.violation_time == 0.0
        assert not label.has_closed_form

    def test_basis_override(self, pc_123):
        assert classify_map(pc_123, 1.0).label == "Ciii"
        # Third column e_x: the +-x pair picks up a z translation.
        basis = np.array([[0.0, 0.0, 1.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]])
        label = classify_map(pc_123, 1.0, basis=basis)
        assert label.label == "A"

    def test_tau_must_be_positive(self, pc_123):
        with pytest.raises(ValueError):
            classify_map(pc_123, 0.0)


class TestFormulas:
    def test_pair_backflow_of_g(self, jc_strong):
        affine = affine_map(jc_strong, 5.0)
        assert pair_blp_from_g(affine.sampled_g()) == pytest.approx(blp_jc_analytic(5.0, 5.0, 1.0), abs=1e-8)

    def test_unital_map_through_zero_stays_optimal(self):
        # |g| falls to 0 and recovers to 0.5, so the backflow equals |g(tau)|.
        g = _linear(1.0, -1.5)
        h = _linear(0.0, 0.0)
        assert pair_blp_from_g(g) == pytest.approx(0.5, abs=1e-8)
        label = TaxonomyLabel("D", 1, -0.5, 0.0, "d")
        assert taxonomy_ratio(label, g, h, pair_blp_from_g(g)) == pytest.approx(1.0, abs=1e-8)

    def test_negative_g_branch(self):
        g = _linear(1.0, -1.5)
        h = _linear(0.0, -0.2)
        label = TaxonomyLabel("Ciii", 1, -0.5, -0.2, "ciii_neg")
        # (1 - g - h) / (2N + 1 + g - h) with N = 0.5.
        assert taxonomy_ratio(label, g, h, 0.5) == pytest.approx(1.7 / 1.7)
        assert taxonomy_ratio(label, g, h, 1.0) == pytest.approx(1.7 / 2.7)

    def test_positive_g_branch(self):
        g = _linear(1.0, -0.5)
        h = _linear(0.0, 0.25)
        label = TaxonomyLabel("Civ", -1, 0.5, 0.25, "civ_pos")
        numerator = 1.0 - 0.5 + 0.25
        assert taxonomy_ratio(label, g, h, 0.1) == pytest.approx(numerator / (0.2 + numerator))

    def test_ci_uses_translation_variation(self):
        t = np.linspace(0.0, np.pi, 201)
        g = SampledFunction(t, np.exp(-t), -np.exp(-t))
        h = SampledFunction(t, 0.1 * np.sin(t), 0.1 * np.cos(t))
        label = TaxonomyLabel("Ci", 1, float(g.values[-1]), float(h.values[-1]), "ci")
        numerator = 1.0 - np.exp(-np.pi) - 0.1 * np.sin(np.pi)
        expected = numerator / (1.0 - np.exp(-np.pi) + 0.2)
        assert taxonomy_ratio(label, g, h, 0.0) == pytest.approx(expected, abs=1e-9)

    def test_no_evolution_gives_one(self):
        g = _linear(1.0, 0.0)
        h = _linear(0.0, 0.0)
        assert taxonomy_ratio(TaxonomyLabel("D", 1, 1.0, 0.0, "d"), g, h, 0.0) == 1.0

    @pytest.mark.parametrize("name", ["A", "B"])
    def test_classes_without_closed_form(self, name):
        g = _linear(1.0, -0.5)
        with pytest.raises(NoClosedFormError):
            taxonomy_ratio(TaxonomyLabel(name, 1, 0.5, 0.0, None), g, g, 0.0)


class TestAnalyzer:
    @pytest.mark.parametrize("tau", [1.0, 3.0])
    def test_jaynes_cummings_formula_matches_quadrature(self, jc_strong, tau):
        analysis = TaxonomyAnalyzer().process(jc_strong, tau)
        assert analysis["max_gap"] < 1e-6
        assert analysis["times"].size == analysis["predicted_ratio"].size == 64

    def test_commutative_formulas_match_quadrature(self, commutative_pc, sinusoidal_gamma):
        for spec in (commutative_pc(0.5), commutative_pc(1.0), commutative_pc(0.5, sinusoidal_gamma)):
            analysis = TaxonomyAnalyzer(profile_points=32).process(spec, 3.0)
            assert analysis["max_gap"] < 1e-6, analysis["label"].label

    def test_class_a_has_no_prediction(self, coherent_drive):
        analysis = TaxonomyAnalyzer(profile_points=16).process(coherent_drive, 2.0)
        assert analysis["max_gap"] is None
        assert np.all(np.isnan(analysis["predicted_ratio"]))
        # Coherence grows from t = 0, so the +z state never saturates the bound.
        assert np.all(analysis["pipeline_ratio"] < 1.0 - 1e-3)
