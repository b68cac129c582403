"""Variance decomposition and effective-degrees-of-freedom oracles."""

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from isocorr.cross_section import (
    DenseCovariance,
    FactorModel,
    IsotropicModel,
    equal_weight_variance,
    factor_nstar,
    iso_nstar_asymptote,
    iso_nstar_curve,
    loadings_mean_inequality,
    rho_hat_from_nstar,
    risk_partition,
)
from isocorr.errors import DegenerateVarianceError, InfeasibleCorrelationError


def brute_force_decomposition(matrix: np.ndarray):
    """Independent oracle: explicit double loops over the covariance."""
    n = matrix.shape[0]
    v_p = 0.0
    v_i = 0.0
    for i in range(n):
        v_i += matrix[i, i]
        for j in range(n):
            v_p += matrix[i, j]
    v_p /= n * n
    v_i /= n * n
    return v_p, v_i, n * v_i / v_p


def random_spd(n: int, seed: int) -> np.ndarray:
    a = np.random.default_rng(seed).normal(size=(n, n))
    return a @ a.T + 0.5 * np.eye(n)


class TestEqualWeightVariance:
    def test_diagonal_equal_variances(self):
        sigma2 = 1.7
        dec = equal_weight_variance(DenseCovariance(sigma2 * np.eye(8)))
        assert dec.v_p == pytest.approx(sigma2 / 8, abs=1e-15)
        assert dec.v_c == pytest.approx(0.0, abs=1e-15)
        assert dec.n_star == pytest.approx(8.0, abs=1e-12)

    def test_homoskedastic_isotropic_by_substitution(self):
        model = IsotropicModel.homoskedastic(10, 0.2)
        dec = equal_weight_variance(model)
        assert dec.v_p == pytest.approx(0.28, abs=1e-15)
        assert dec.n_star == pytest.approx(10.0 / 2.8, abs=1e-12)

    def test_random_spd_matches_brute_force(self):
        matrix = random_spd(6, seed=3)
        dec = equal_weight_variance(DenseCovariance(matrix))
        v_p, v_i, n_star = brute_force_decomposition(matrix)
        assert dec.v_p == pytest.approx(v_p, rel=1e-12)
        assert dec.v_i == pytest.approx(v_i, rel=1e-12)
        assert dec.n_star == pytest.approx(n_star, rel=1e-12)

    def test_parts_sum_and_covariance_floor(self):
        for seed in range(20):
            dec = equal_weight_variance(DenseCovariance(random_spd(9, seed)))
            assert dec.v_p == pytest.approx(dec.v_i + dec.v_c, abs=1e-15)
            assert dec.v_c >= -dec.v_i

    def test_degenerate_variance_rejected(self):
        # a perfect two-asset hedge has zero portfolio variance
        matrix = np.array([[1.0, -1.0], [-1.0, 1.0]])
        with pytest.raises(DegenerateVarianceError):
            equal_weight_variance(DenseCovariance(matrix))

    def test_heteroskedastic_exact_sums(self):
        sigmas = np.array([0.5, 1.0, 2.0, 0.1])
        model = IsotropicModel(4, 0.25, sigmas)
        dec = equal_weight_variance(model)
        oracle = equal_weight_variance(DenseCovariance(model.dense()))
        assert dec.v_p == pytest.approx(oracle.v_p, rel=1e-13)
        assert dec.n_star == pytest.approx(oracle.n_star, rel=1e-13)


class TestIsoCurve:
    def test_asymptote_is_reciprocal_rho(self):
        assert iso_nstar_asymptote(0.2) == pytest.approx(5.0, abs=1e-12)

    def test_zero_rho_gives_nominal_count(self):
        ns = [1, 2, 10, 100]
        assert np.allclose(iso_nstar_curve(0.0, ns), ns, atol=1e-15)

    def test_target_thirty_needs_three_percent(self):
        # a cap of thirty effective assets pins the correlation near 1/30
        assert iso_nstar_asymptote(1.0 / 30.0) == pytest.approx(30.0, abs=1e-12)
        big = iso_nstar_curve(1.0 / 30.0, [10**7])[0]
        assert big == pytest.approx(30.0, rel=1e-4)

    def test_unit_size_always_one(self):
        for rho in [0.0, 0.3, 0.9]:
            assert iso_nstar_curve(rho, [1])[0] == pytest.approx(1.0, abs=1e-15)

    def test_continuity_toward_zero_rho(self):
        ns = [5, 50, 500]
        tiny = iso_nstar_curve(1e-12, ns)
        assert np.allclose(tiny, ns, rtol=1e-9)

    def test_monotone_in_n_for_positive_rho(self):
        curve = iso_nstar_curve(0.3, list(range(1, 200)))
        assert np.all(np.diff(curve) > 0)

    def test_infeasible_rho_rejected(self):
        with pytest.raises(InfeasibleCorrelationError):
            iso_nstar_curve(-0.3, [2, 10])


class TestRhoHat:
    def test_formula_pin_at_index_scale(self):
        # (503 - 7.44) / (502 * 7.44), frozen from rational arithmetic
        assert rho_hat_from_nstar(503, 7.44) == pytest.approx(
            0.13268431649745105, abs=1e-15
        )

    def test_full_nstar_means_independent(self):
        assert rho_hat_from_nstar(17, 17.0) == pytest.approx(0.0, abs=1e-15)

    def test_round_trip_through_curve(self):
        n_star = iso_nstar_curve(0.3, [100])[0]
        assert rho_hat_from_nstar(100, n_star) == pytest.approx(0.3, abs=1e-12)

    def test_domain_errors(self):
        with pytest.raises(ValueError):
            rho_hat_from_nstar(1, 1.0)
        with pytest.raises(ValueError):
            rho_hat_from_nstar(10, 0.0)
        with pytest.raises(ValueError):
            rho_hat_from_nstar(10, 10.5)


class TestFactorNstar:
    def test_no_factors_gives_asset_count(self):
        fm = FactorModel(np.zeros((12, 0)), np.full(12, 0.3))
        assert factor_nstar(fm) == pytest.approx(12.0, abs=1e-12)

    def test_random_instance_matches_dense_oracle(self):
        rng = np.random.default_rng(5)
        fm = FactorModel(rng.normal(size=(40, 3)), rng.uniform(0.2, 1.0, size=40))
        dense = equal_weight_variance(DenseCovariance(fm.dense()))
        assert factor_nstar(fm) == pytest.approx(dense.n_star, abs=1e-10)

    def test_many_random_instances_match_dense_oracle(self):
        rng = np.random.default_rng(99)
        for _ in range(100):
            n = int(rng.integers(2, 65))
            k = int(rng.integers(0, min(n, 8) + 1))
            fm = FactorModel(rng.normal(size=(n, k)), rng.uniform(0.1, 2.0, size=n))
            dense = equal_weight_variance(DenseCovariance(fm.dense()))
            assert abs(factor_nstar(fm) - dense.n_star) <= 1e-10

    def test_identical_loadings_large_n_limit(self):
        # constant loadings collapse onto a single common factor: the exact
        # large-n limit is (k b^2 + s^2) / (k b^2), a constant
        b, s2, k = 0.3, 0.8, 5
        fm = FactorModel(np.full((20000, k), b), np.full(20000, s2))
        limit = (k * b * b + s2) / (k * b * b)
        assert factor_nstar(fm) == pytest.approx(limit, rel=1e-3)

    def test_full_pca_reproduces_dense_decomposition(self):
        # k = n loadings taken from the eigendecomposition of any SPD matrix
        # with zero idiosyncratic variance reproduce that matrix exactly
        for seed in range(5):
            sigma = random_spd(7, seed)
            w, v = np.linalg.eigh(sigma)
            loadings = v @ np.diag(np.sqrt(w))
            fm = FactorModel(loadings, np.zeros(7))
            want = equal_weight_variance(DenseCovariance(sigma)).n_star
            assert factor_nstar(fm) == pytest.approx(want, abs=1e-10)

    def test_diagonal_full_pca_gives_asset_count(self):
        diag = np.diag(np.array([0.5, 1.0, 2.0, 4.0]))
        loadings = np.sqrt(diag)
        fm = FactorModel(loadings, np.zeros(4))
        assert factor_nstar(fm) == pytest.approx(4.0, abs=1e-12)


class TestLoadingsMeanInequality:
    def test_constant_matrix_is_equality(self):
        fm = FactorModel(np.full((9, 4), 0.7), np.full(9, 0.1))
        lhs, rhs, holds = loadings_mean_inequality(fm)
        assert holds
        assert lhs == pytest.approx(rhs, rel=1e-14)

    def test_random_matrix_holds(self):
        rng = np.random.default_rng(2)
        fm = FactorModel(rng.normal(size=(30, 6)), np.full(30, 0.2))
        lhs, rhs, holds = loadings_mean_inequality(fm)
        assert holds and lhs > rhs

    def test_single_nonzero_column_consistency(self):
        col = np.arange(1.0, 9.0)
        loadings = np.zeros((8, 3))
        loadings[:, 1] = col
        fm = FactorModel(loadings, np.full(8, 0.5))
        lhs, rhs, holds = loadings_mean_inequality(fm)
        assert holds
        assert lhs == pytest.approx(np.sum(col**2) / (8 * 3), rel=1e-14)
        assert rhs == pytest.approx(col.mean() ** 2 / 3, rel=1e-14)

    def test_no_factor_error(self):
        with pytest.raises(ValueError):
            loadings_mean_inequality(FactorModel(np.zeros((5, 0)), np.ones(5)))

    @given(
        n=st.integers(min_value=1, max_value=30),
        k=st.integers(min_value=1, max_value=8),
        seed=st.integers(min_value=0, max_value=2**31),
        scale=st.floats(min_value=1e-3, max_value=1e3),
    )
    @settings(max_examples=200, deadline=None)
    def test_property_holds_for_arbitrary_matrices(self, n, k, seed, scale):
        k = min(k, n)
        loadings = scale * np.random.default_rng(seed).normal(size=(n, k))
        fm = FactorModel(loadings, np.ones(n))
        lhs, rhs, holds = loadings_mean_inequality(fm)
        assert holds


class TestRiskPartition:
    def test_quarter_rho_ratio_three(self):
        part = risk_partition(1.0, 0.25, 10**4)
        assert part.v_r / part.v_s == pytest.approx(3.0, rel=0.01)
        assert part.ratio_asymptote == pytest.approx(3.0, abs=1e-12)

    def test_half_rho_ratio_one(self):
        part = risk_partition(1.0, 0.5, 10**4)
        assert part.v_r / part.v_s == pytest.approx(1.0, rel=0.01)

    def test_perfect_correlation_kills_residual(self):
        part = risk_partition(2.0, 1.0, 500)
        assert part.v_r == 0.0
        assert part.v_s > 0

    def test_parts_sum_to_total_variance(self):
        for n in [1, 2, 10, 1000]:
            for rho in [0.0, 0.3, 0.9]:
                part = risk_partition(1.5, rho, n)
                assert part.v_s + part.v_r == pytest.approx(1.5**2 / n, rel=1e-12)

    def test_nonpositive_rho_flagged_not_error(self):
        part = risk_partition(1.0, 0.0, 100)
        assert part.ratio_asymptote is None
        part = risk_partition(1.0, -0.001, 100)
        assert part.ratio_asymptote is None
