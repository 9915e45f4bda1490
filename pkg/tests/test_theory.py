import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from graphost.csbm import CsbmParams
from graphost.theory import (
    BoundarySpec,
    boundary_from_means,
    boundary_signed_value,
    class_separation_distance,
    degree_relaxation_constraint,
    direction,
    expected_embedding,
    imbalanced_boundary,
    lemma_check,
    midpoint,
    misclassification_prob,
    monte_carlo_theorem_check,
    multiclass_separation,
    phi_vs_simulation,
    separation_check,
    std_normal_cdf,
)

SYMMETRIC = np.array([[1.0, 0.0], [-1.0, 0.0]])


def axis_params(p, q, n=500, a=2.0):
    return CsbmParams(
        class_means=((a / 2, 0.0), (-a / 2, 0.0)),
        class_sizes=(n, n),
        intra_prob=p,
        inter_prob=q,
    )


class TestNormalCdf:
    def test_against_erfc_oracle(self):
        # independent stdlib oracle; the rational approximation is specified
        # to 7.5e-8 absolute error
        for x in np.linspace(-8, 8, 2001):
            exact = 0.5 * math.erfc(-x / math.sqrt(2.0))
            assert abs(std_normal_cdf(float(x)) - exact) <= 7.5e-8

    def test_symmetry(self):
        assert std_normal_cdf(0.0) == pytest.approx(0.5)
        assert std_normal_cdf(1.5) + std_normal_cdf(-1.5) == pytest.approx(1.0)


class TestExpectedEmbedding:
    def test_equal_probabilities_give_midpoint(self):
        for cls in (0, 1):
            out = expected_embedding(cls, 0.4, 0.4, SYMMETRIC)
            assert np.allclose(out, [0.0, 0.0])

    def test_pure_intra_returns_own_mean(self):
        assert np.allclose(expected_embedding(0, 0.7, 0.0, SYMMETRIC), SYMMETRIC[0])
        assert np.allclose(expected_embedding(1, 0.7, 0.0, SYMMETRIC), SYMMETRIC[1])

    def test_hand_value(self):
        # (0.8 - 0.2) / (0.8 + 0.2) = 0.6
        out = expected_embedding(0, 0.8, 0.2, SYMMETRIC)
        assert np.allclose(out, [0.6, 0.0])

    def test_degenerate_rejected(self):
        with pytest.raises(ValueError, match="positive"):
            expected_embedding(0, 0.0, 0.0, SYMMETRIC)

    def test_multiclass_form(self):
        means = np.array([[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0]])
        out = expected_embedding(0, 0.5, 0.1, means)
        expected = (0.5 * means[0] + 0.1 * (means[1] + means[2])) / 0.7
        assert np.allclose(out, expected)


class TestBoundary:
    def test_midpoint_and_direction(self):
        assert np.allclose(midpoint(SYMMETRIC), [0.0, 0.0])
        assert np.allclose(direction(SYMMETRIC), [1.0, 0.0])

    def test_direction_rejects_equal_means(self):
        with pytest.raises(ValueError, match="coincide"):
            direction(np.array([[1.0, 0.0], [1.0, 0.0]]))

    def test_midpoint_of_expected_embeddings_is_invariant(self, rng):
        # closed-form identity checked numerically over random (p, q)
        for _ in range(50):
            p, q = rng.uniform(0.01, 1.0, size=2)
            e0 = expected_embedding(0, p, q, SYMMETRIC)
            e1 = expected_embedding(1, p, q, SYMMETRIC)
            assert np.allclose((e0 + e1) / 2.0, midpoint(SYMMETRIC), atol=1e-12)

    def test_embedding_difference_direction_sign(self):
        o = direction(SYMMETRIC)
        diff_hom = expected_embedding(0, 0.8, 0.2, SYMMETRIC) - expected_embedding(1, 0.8, 0.2, SYMMETRIC)
        diff_het = expected_embedding(0, 0.2, 0.8, SYMMETRIC) - expected_embedding(1, 0.2, 0.8, SYMMETRIC)
        assert np.dot(diff_hom, o) > 0
        assert np.dot(diff_het, o) < 0

    def test_signed_value_on_boundary(self):
        boundary = boundary_from_means(SYMMETRIC)
        assert boundary_signed_value(boundary.midpoint, boundary) == pytest.approx(0.0)

    def test_signed_value_at_class_mean(self):
        boundary = boundary_from_means(SYMMETRIC)
        assert boundary_signed_value(SYMMETRIC[0], boundary) == pytest.approx(1.0)

    def test_rescaled_direction_same_decisions(self, rng):
        o = np.array([3.0, 4.0])
        boundary = BoundarySpec(direction=o / np.linalg.norm(o), midpoint=np.zeros(2))
        h = rng.normal(size=(20, 2))
        signs = np.sign(boundary_signed_value(h, boundary))
        raw = np.sign(h @ o)
        assert np.array_equal(signs, raw)

    def test_unit_norm_enforced(self):
        with pytest.raises(ValueError, match="unit"):
            BoundarySpec(direction=np.array([1.0, 1.0]), midpoint=np.zeros(2))


class TestClosedForms:
    def test_separation_zero_at_equal_probs(self):
        assert class_separation_distance(0.3, 0.3, 5.0) == 0.0

    def test_separation_hand_value(self):
        assert class_separation_distance(0.8, 0.2, 2.0) == pytest.approx(0.6)

    def test_separation_monotone_in_contrast(self):
        base = class_separation_distance(0.5, 0.3, 1.0)
        for p, q in [(0.55, 0.25), (0.6, 0.2), (0.7, 0.1)]:
            better = class_separation_distance(p, q, 1.0)
            assert better > base
            base = better

    def test_misclassification_half_at_equal_probs(self):
        assert misclassification_prob(0.3, 0.3, 100, 100, 2.0) == pytest.approx(0.5)

    def test_misclassification_vanishes_for_large_distance(self):
        assert misclassification_prob(0.05, 0.01, 500, 500, 100.0) <= 1e-12

    def test_misclassification_degenerate_degree(self):
        with pytest.raises(ValueError, match="degree"):
            misclassification_prob(0.0, 0.0, 100, 100, 2.0)

    def test_imbalanced_boundary_balanced_reduction(self):
        assert imbalanced_boundary(1.0, 3.0, 1.0, 50, 50) == pytest.approx(2.0)

    def test_imbalanced_boundary_shift_sign(self):
        balanced = imbalanced_boundary(0.0, 2.0, 1.0, 100, 100)
        shifted = imbalanced_boundary(0.0, 2.0, 1.0, 100, 300)
        assert shifted > balanced

    def test_imbalanced_boundary_hand_value(self):
        # mu = 0, 2, sigma = 1, n2/n1 = e^2 -> 1 + 1 = 2
        n1 = 1000
        n2 = int(round(n1 * math.e**2))
        value = imbalanced_boundary(0.0, 2.0, 1.0, n1, n2)
        assert value == pytest.approx(2.0, abs=1e-4)

    def test_imbalanced_boundary_validation(self):
        with pytest.raises(ValueError, match="sigma"):
            imbalanced_boundary(0.0, 1.0, 0.0, 10, 10)


class TestDegreeRelaxationConstraint:
    def test_identity_transform_is_false(self):
        assert not degree_relaxation_constraint(0.02, 0.01, 0.02, 0.01, 500, 500, "homophilic")

    def test_homophilic_example(self):
        assert degree_relaxation_constraint(0.02, 0.01, 0.03, 0.005, 500, 500, "homophilic")

    def test_degree_preserving_improvement(self):
        # p' n1 + q' n2 = p n1 + q n2 with p' > p, q' < q: variance terms
        # cancel and the contrast strictly improves
        p, q, n1, n2 = 0.02, 0.01, 500, 500
        p2 = 0.025
        q2 = (p * n1 + q * n2 - p2 * n1) / n2
        assert degree_relaxation_constraint(p, q, p2, q2, n1, n2, "homophilic")

    def test_regime_mismatch_rejected(self):
        with pytest.raises(ValueError, match="homophilic regime"):
            degree_relaxation_constraint(0.01, 0.02, 0.03, 0.005, 500, 500, "homophilic")
        with pytest.raises(ValueError, match="heterophilic regime"):
            degree_relaxation_constraint(0.02, 0.01, 0.005, 0.03, 500, 500, "heterophilic")

    @given(st.integers(0, 10_000))
    @settings(max_examples=60)
    def test_agrees_with_phi_formula_sign(self, seed):
        # cross-check: the constraint must match the sign of the closed-form
        # error difference
        rng = np.random.default_rng(seed)
        p = rng.uniform(0.02, 0.2)
        q = rng.uniform(0.001, p * 0.9)
        p2 = rng.uniform(0.02, 0.2)
        q2 = rng.uniform(0.001, p2 * 0.9)
        n1 = n2 = 400
        holds = degree_relaxation_constraint(p, q, p2, q2, n1, n2, "homophilic")
        diff = misclassification_prob(p, q, n1, n2, 2.0) - misclassification_prob(
            p2, q2, n1, n2, 2.0
        )
        if abs(diff) > 1e-12:  # Phi saturates for extreme arguments
            assert holds == (diff > 0)


class TestMulticlassSeparation:
    def test_reduction_to_binary(self, rng):
        for _ in range(100):
            p, q = rng.uniform(0.01, 0.99, size=2)
            a = rng.uniform(0.1, 5.0)
            assert abs(
                multiclass_separation(p, q, 2, a)
                - 2.0 * class_separation_distance(p, q, a)
            ) <= 1e-12

    def test_zero_at_equal_probs(self):
        for s in range(2, 8):
            assert multiclass_separation(0.2, 0.2, s, 3.0) == 0.0

    def test_strictly_decreasing_in_class_count(self):
        values = [multiclass_separation(0.1, 0.02, s, 2.0) for s in range(2, 12)]
        assert all(a > b for a, b in zip(values, values[1:]))

    def test_validation(self):
        with pytest.raises(ValueError, match="s must"):
            multiclass_separation(0.1, 0.02, 1, 2.0)


class TestMonteCarloTheoremCheck:
    def test_null_transform_no_systematic_change(self):
        params = axis_params(0.02, 0.01)
        report = monte_carlo_theorem_check(params, params, trials=10, seed=3)
        assert not report.constraint_satisfied
        assert abs(report.mean_difference) <= 0.02
        assert report.regime == "homophilic"

    def test_homophilic_improvement(self):
        report = monte_carlo_theorem_check(
            axis_params(0.02, 0.01), axis_params(0.03, 0.005), trials=10, seed=0
        )
        assert report.constraint_satisfied
        assert report.improved_trials >= 9
        assert report.mean_difference > 0

    def test_heterophilic_improvement(self):
        report = monte_carlo_theorem_check(
            axis_params(0.01, 0.02), axis_params(0.005, 0.03), trials=10, seed=0
        )
        assert report.regime == "heterophilic"
        assert report.improved_trials >= 9

    def test_regime_inconsistent_rejected(self):
        with pytest.raises(ValueError, match="regime-inconsistent"):
            monte_carlo_theorem_check(
                axis_params(0.02, 0.01), axis_params(0.005, 0.03), trials=2, seed=0
            )

    def test_means_must_match(self):
        with pytest.raises(ValueError, match="means"):
            monte_carlo_theorem_check(
                axis_params(0.02, 0.01), axis_params(0.03, 0.005, a=4.0), trials=2, seed=0
            )

    def test_samples_per_trial_override(self):
        report = monte_carlo_theorem_check(
            axis_params(0.05, 0.01, n=500),
            axis_params(0.06, 0.005, n=500),
            trials=2,
            samples_per_trial=100,
            seed=1,
        )
        assert report.params["class_sizes"] == [50, 50]

    def test_report_serialization(self):
        report = monte_carlo_theorem_check(
            axis_params(0.02, 0.01), axis_params(0.03, 0.005), trials=3, seed=0
        )
        doc = report.to_dict()
        assert doc["trials"] == 3
        assert len(doc["rates_before"]) == 3
        rows = report.to_csv_rows()
        assert rows[0][0] == "trial"
        assert len(rows) == 4


class TestEmpiricalChecks:
    def test_lemma_check_small(self):
        result = lemma_check(axis_params(0.05, 0.02, n=800), seed=1)
        assert result["midpoint_error"] <= 0.1
        assert abs(result["direction_cosine"]) >= 0.99

    def test_lemma_sign_flips_with_regime(self):
        hom = lemma_check(axis_params(0.04, 0.01, n=800), seed=2)
        het = lemma_check(axis_params(0.01, 0.04, n=800), seed=2)
        assert hom["direction_cosine"] > 0.99
        assert het["direction_cosine"] < -0.99

    def test_separation_check_close(self):
        result = separation_check(axis_params(0.05, 0.02, n=1000), seed=4)
        assert result["relative_error"] <= 0.05

    def test_phi_vs_simulation_within_band(self):
        result = phi_vs_simulation(0.02, 0.01, 500, 500, 2.0, samples=50_000, seed=7)
        assert result["within_3_std_errors"]

    def test_phi_simulation_heterophilic(self):
        result = phi_vs_simulation(0.01, 0.02, 500, 500, 2.0, samples=50_000, seed=8)
        assert result["within_3_std_errors"]
