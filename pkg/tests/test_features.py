import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

import gossiptd as g
from gossiptd.errors import AssumptionViolationError
from gossiptd.features import pythagoras_gap

from helpers import random_basis


def _eta2():
    return g.StationaryWeights(eta=np.array([5 / 6, 1 / 6]))


class TestValidateIndependence:
    def test_identity_columns_ok(self):
        g.validate_independence(g.FeatureBasis(phi=np.eye(4)[:, :2]))

    def test_duplicated_column_rejected(self):
        phi = np.ones((4, 2))
        with pytest.raises(AssumptionViolationError, match=r"\(A1\)"):
            g.validate_independence(g.FeatureBasis(phi=phi))

    def test_queue_agent_bases_ok(self, queue_bases):
        for b in queue_bases.bases:
            g.validate_independence(b)

    def test_more_features_than_states_rejected(self):
        with pytest.raises(AssumptionViolationError, match=r"\(A1\)"):
            g.validate_independence(g.FeatureBasis(phi=np.ones((2, 3))))


class TestProjectionApply:
    def test_fixes_its_range(self, queue_bases, queue_eta):
        basis = queue_bases.bases[0]
        x = basis.phi @ np.array([1.0, -2.0, 0.5, 3.0])
        np.testing.assert_allclose(
            g.projection_apply(basis, queue_eta, x), x, atol=1e-10
        )

    def test_idempotent(self, queue_bases, queue_eta):
        rng = np.random.default_rng(0)
        for basis in queue_bases.bases:
            x = rng.normal(size=51)
            px = g.projection_apply(basis, queue_eta, x)
            np.testing.assert_allclose(
                g.projection_apply(basis, queue_eta, px), px, atol=1e-9
            )

    def test_nonexpansive_sampled(self, queue_bases, queue_eta):
        rng = np.random.default_rng(1)
        for _ in range(100):
            x = rng.normal(size=51)
            for basis in queue_bases.bases:
                px = g.projection_apply(basis, queue_eta, x)
                assert g.weighted_norm(px, queue_eta) <= g.weighted_norm(
                    x, queue_eta
                ) + 1e-12

    @settings(max_examples=50, deadline=None)
    @given(arrays(np.float64, 8, elements=st.floats(-100, 100)))
    def test_pythagoras_property(self, x):
        rng = np.random.default_rng(42)
        basis = random_basis(rng, 8, 3)
        eta = rng.random(8) + 0.1
        eta = g.StationaryWeights(eta=eta / eta.sum())
        assert pythagoras_gap(basis, eta, x) < 1e-9 * max(
            1.0, g.weighted_norm(x, eta) ** 2
        )


class TestOrthogonalizeAgainstOnes:
    def test_constant_column_rejected(self, queue_eta):
        phi = np.column_stack([np.ones(51), np.arange(51.0)])
        with pytest.raises(AssumptionViolationError, match=r"\(A1\)"):
            g.orthogonalize_against_ones(g.FeatureBasis(phi=phi), queue_eta)

    def test_already_orthogonal_unchanged(self, queue_eta):
        col = np.arange(51.0)
        col = col - queue_eta.eta @ col
        basis = g.FeatureBasis(phi=col[:, None])
        out = g.orthogonalize_against_ones(basis, queue_eta)
        np.testing.assert_allclose(out.phi, basis.phi, atol=1e-12)

    def test_queue_bases_orthogonalized(self, queue_bases, queue_eta):
        for basis in queue_bases.bases:
            out = g.orthogonalize_against_ones(basis, queue_eta)
            assert np.max(np.abs(queue_eta.eta @ out.phi)) < 1e-12


class TestProjectionOntoOnesComplement:
    def test_ones_map_to_zero(self, queue_eta):
        np.testing.assert_allclose(
            g.projection_onto_ones_complement(queue_eta, np.ones(51)),
            np.zeros(51),
            atol=1e-12,
        )

    def test_orthogonal_vector_unchanged(self):
        eta = _eta2()
        x = np.array([1.0, -5.0])  # eta^T x = 0
        np.testing.assert_allclose(
            g.projection_onto_ones_complement(eta, x), x, atol=1e-12
        )

    def test_basic_differential_value_is_fixed(self, queue_model, queue_eta):
        J = g.basic_differential_value(queue_model, queue_eta)
        np.testing.assert_allclose(
            g.projection_onto_ones_complement(queue_eta, J), J, atol=1e-9
        )


class TestBuildQueueBases:
    def test_agent_sizes(self, queue_bases):
        assert queue_bases.sizes == (4, 3, 2)

    def test_linear_feature_normalization(self, queue_bases):
        # mean of 0..50 is 25, so the linear feature equals 1 at state 25
        assert queue_bases.bases[0].phi[25, 3] == pytest.approx(1.0)

    def test_indicator_cutoffs_strict(self, queue_bases):
        phi1 = queue_bases.bases[0].phi
        assert phi1[5, 0] == 0.0 and phi1[6, 0] == 1.0
        phi2 = queue_bases.bases[1].phi
        assert phi2[20, 0] == 0.0 and phi2[21, 0] == 1.0 and phi2[29, 0] == 1.0
        assert phi2[30, 0] == 0.0

    def test_all_bases_full_rank(self, queue_bases):
        for b in queue_bases.bases:
            g.validate_independence(b)

    def test_json_round_trip(self, queue_bases):
        clone = g.BasisEnsemble.from_json(queue_bases.to_json())
        assert clone.sizes == queue_bases.sizes
        for a, b in zip(clone.bases, queue_bases.bases):
            np.testing.assert_array_equal(a.phi, b.phi)
