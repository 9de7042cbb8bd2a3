"""Tests for speed-limit times and ratios."""

import numpy as np
import pytest

from analyzers.qsl_metrics import (
    QSLAnalyzer,
    qsl_ratio_class_B,
    qsl_ratio_jc_closed,
    qsl_time,
    ratio_profile,
    revivals_of_fidelity,
)
from core.generators import JaynesCummings
from core.jaynes_cummings import jc_b, jc_stationary_times
from core.propagation import affine_map
from core.quadrature import SampledFunction
from core.qubit import PureState

EXCITED = PureState(1.0)


def test_norms_of_traceless_generator_output(pc_123):
    result = qsl_time(pc_123, PureState(0.3, 1.1), 2.0)
    assert result.lambda_tr == pytest.approx(2.0 * result.lambda_op, rel=1e-10)
    assert result.lambda_hs == pytest.approx(np.sqrt(2.0) * result.lambda_op, rel=1e-10)
    assert result.tau_qsl == pytest.approx(np.sin(result.bures) ** 2 / result.lambda_op, rel=1e-12)
    assert result.tau_qsl >= result.tau_qsl_hs >= result.tau_qsl_tr
    assert result.ratio == pytest.approx(result.tau_qsl / 2.0)


def test_markovian_jc_saturates_the_bound():
    result = qsl_time(JaynesCummings(0.1, 1.0), EXCITED, 5.0)
    assert result.ratio == pytest.approx(1.0, abs=1e-6)
    assert result.revivals_F == 0.0


@pytest.mark.parametrize("tau", [0.5, 1.0, 2.0])
def test_eternal_equatorial_state_saturates(eternal, tau):
    assert qsl_time(eternal, PureState(0.5), tau).ratio == pytest.approx(1.0, abs=1e-9)


def test_short_times_saturate_for_aligned_decay(pc_123):
    assert qsl_time(pc_123, EXCITED, 1e-6).ratio == pytest.approx(1.0, abs=1e-6)


def test_zero_and_negative_tau(pc_123):
    result = qsl_time(pc_123, EXCITED, 0.0)
    assert result.ratio == 1.0
    assert result.tau_qsl == 0.0
    with pytest.raises(ValueError):
        qsl_time(pc_123, EXCITED, -1.0)


def test_jc_closed_form_matches_quadrature(jc_strong):
    result = qsl_time(jc_strong, EXCITED, 3.0)
    closed = qsl_ratio_jc_closed(3.0, 5.0, 1.0)
    assert closed < 1.0
    assert result.ratio == pytest.approx(closed, abs=1e-6)


def test_jc_operator_norm_is_population_rate(jc_strong):
    affine = affine_map(jc_strong, 1.0)
    velocity = affine.velocity([0.0, 0.0, 1.0])
    b = jc_b(affine.times, 5.0, 1.0)
    population_rate = np.gradient(b * b, affine.times, edge_order=2)
    np.testing.assert_allclose(0.5 * np.linalg.norm(velocity, axis=-1), np.abs(population_rate), atol=1e-5)


class TestJCClosedForm:
    @pytest.mark.parametrize("gamma0", [0.1, 0.3, 0.5])
    def test_markovian_couplings_give_one(self, gamma0):
        for tau in (0.5, 3.0, 10.0):
            assert qsl_ratio_jc_closed(tau, gamma0, 1.0) == 1.0

    def test_plateau_before_first_revival(self):
        assert qsl_ratio_jc_closed(1.0, 5.0, 1.0) == 1.0
        assert qsl_ratio_jc_closed(0.0, 5.0, 1.0) == 1.0


class TestClassB:
    def test_jc_branch_matches_quadrature(self, jc_strong):
        affine = affine_map(jc_strong, 3.0)
        ratio = qsl_ratio_class_B(affine.sampled_g(), affine.sampled_h(), 3.0, 1)
        assert ratio == pytest.approx(qsl_time(jc_strong, EXCITED, 3.0, affine=affine).ratio, abs=1e-6)

    def test_monotone_decay_gives_one(self, pc_123):
        affine = affine_map(pc_123, 2.0)
        assert qsl_ratio_class_B(affine.sampled_g(), affine.sampled_h(), 2.0, 1) == 1.0
        assert qsl_ratio_class_B(affine.sampled_g(), affine.sampled_h(), 0.0, -1) == 1.0

    def test_return_to_initial_state_gives_zero(self):
        t = np.linspace(0.0, np.pi, 201)
        g = SampledFunction(t, np.cos(t) ** 2, -np.sin(2.0 * t))
        h = SampledFunction(t, np.zeros_like(t), np.zeros_like(t))
        assert qsl_ratio_class_B(g, h, np.pi, 1) == 0.0

    def test_branch_must_be_a_sign(self, pc_123):
        affine = affine_map(pc_123, 1.0, steps=64)
        with pytest.raises(ValueError):
            qsl_ratio_class_B(affine.sampled_g(), affine.sampled_h(), 1.0, 0)


class TestRevivals:
    def test_jc_revivals_telescope(self, jc_strong):
        affine = affine_map(jc_strong, 5.0)
        peaks = jc_stationary_times(5.0, 5.0, 1.0)
        # Troughs of 2 b^2 - 1 sit at -1, so each revival climbs 2 b^2 at the next peak.
        expected = float(np.sum(2.0 * jc_b(peaks, 5.0, 1.0) ** 2))
        revivals = revivals_of_fidelity(affine.sampled_g(), affine.sampled_h(), 5.0, 1)
        assert revivals == pytest.approx(expected, abs=1e-8)

    def test_no_revival_before_first_zero(self, jc_strong):
        affine = affine_map(jc_strong, 2.0)
        assert revivals_of_fidelity(affine.sampled_g(), affine.sampled_h(), 1.0, 1) == 0.0

    def test_monotone_decay(self, pc_123):
        affine = affine_map(pc_123, 2.0, steps=256)
        assert revivals_of_fidelity(affine.sampled_g(), affine.sampled_h(), 2.0, -1) == 0.0


def test_ratio_never_exceeds_one(shipped_models):
    a = np.linspace(0.0, 1.0, 21)
    r0 = np.stack([PureState(value).bloch_array() for value in a])
    for name, spec in shipped_models.items():
        for tau in (0.5, 1.0, 2.0, 5.0):
            affine = affine_map(spec, tau)
            profile = ratio_profile(affine, r0)
            assert profile.shape == (21, affine.times.size)
            assert np.all(profile <= 1.0 + 1e-9), f"{name} at tau={tau}"
            assert np.all(profile >= -1e-12), f"{name} at tau={tau}"


def test_ratio_profile_ends_at_qsl_ratio(jc_strong):
    affine = affine_map(jc_strong, 3.0)
    profile = ratio_profile(affine, [0.0, 0.0, 1.0])
    assert profile[0] == 1.0
    assert profile[-1] == pytest.approx(qsl_time(jc_strong, EXCITED, 3.0, affine=affine).ratio, abs=1e-12)


def test_analyzer_attaches_closed_form_only_for_jc_excited(jc_strong, pc_123):
    analyzer = QSLAnalyzer()
    analysis = analyzer.process(jc_strong, EXCITED, 3.0)
    assert analysis["closed_form"] == pytest.approx(analysis["qsl"].ratio, abs=1e-6)
    assert analyzer.process(jc_strong, PureState(0.5), 3.0)["closed_form"] is None
    assert analyzer.process(pc_123, EXCITED, 1.0)["closed_form"] is None
