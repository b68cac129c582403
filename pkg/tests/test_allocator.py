"""Closed-form optimizers against dense solves and taper properties."""

import math

import numpy as np
import pytest

from isocorr.allocator import (
    AlphaVector,
    _omega_closed_form,
    _omega_series,
    centering_factor,
    laplace_allocation,
    laplace_omega,
    mahalanobis_z_sq,
    mvo_isotropic,
    scaled_allocation,
)
from isocorr.cross_section import IsotropicModel
from isocorr.errors import DimensionMismatchError, SingularMatrixError
from isocorr.experiment import fit_large_n
from isocorr.experiment import DofTrial


def dense_mvo(model: IsotropicModel, alphas, lam):
    return np.linalg.solve(model.dense(), alphas) / (2.0 * lam)


def random_model(rng, n):
    lo = 1.0 / (1.0 - n) if n > 1 else 0.0
    rho = lo + (0.98 - lo) * rng.uniform(0.02, 1.0)
    sigmas = rng.uniform(0.05, 2.0, size=n)
    return IsotropicModel(n, float(rho), sigmas)


class TestAlphaVector:
    def test_scores_divide_by_volatility(self):
        model = IsotropicModel(3, 0.2, np.array([0.5, 1.0, 2.0]))
        alpha = AlphaVector.for_model(model, np.array([0.1, 0.1, 0.1]))
        assert np.allclose(alpha.z_scores, [0.2, 0.1, 0.05], atol=1e-15)

    def test_dimension_checked(self):
        model = IsotropicModel.homoskedastic(4, 0.1)
        with pytest.raises(DimensionMismatchError):
            AlphaVector.for_model(model, np.ones(5))


class TestMvoIsotropic:
    def test_identity_covariance_returns_alpha(self):
        model = IsotropicModel.homoskedastic(6, 0.0)
        alphas = np.array([0.5, -0.2, 0.1, 0.0, 0.3, -0.4])
        res = mvo_isotropic(model, alphas, lam=0.5)
        assert np.allclose(res.weights, alphas, atol=1e-14)
        assert res.omega == 1.0

    def test_zero_mean_alpha_kills_centering(self):
        for rho in [-0.9, 0.0, 0.5, 0.9]:
            model = IsotropicModel.homoskedastic(2, rho)
            lam = 0.7
            res = mvo_isotropic(model, np.array([1.0, -1.0]), lam)
            expected = np.array([1.0, -1.0]) / (2 * lam * (1 - rho))
            assert np.allclose(res.weights, expected, atol=1e-12)

    def test_matches_dense_solve(self):
        rng = np.random.default_rng(40)
        model = IsotropicModel(20, 0.3, rng.uniform(0.1, 2.0, size=20))
        alphas = rng.normal(size=20)
        res = mvo_isotropic(model, alphas, lam=1.3)
        want = dense_mvo(model, alphas, 1.3)
        assert np.max(np.abs(res.weights - want)) / np.max(np.abs(want)) <= 1e-10

    def test_many_random_instances_match_dense(self):
        rng = np.random.default_rng(41)
        for _ in range(100):
            n = int(rng.integers(1, 65))
            model = random_model(rng, n)
            alphas = rng.normal(size=n)
            lam = float(rng.uniform(0.1, 3.0))
            res = mvo_isotropic(model, alphas, lam)
            want = dense_mvo(model, alphas, lam)
            scale = max(np.max(np.abs(want)), 1e-30)
            assert np.max(np.abs(res.weights - want)) / scale <= 1e-10

    def test_singular_model_rejected(self):
        with pytest.raises(SingularMatrixError):
            mvo_isotropic(IsotropicModel.homoskedastic(5, 1.0), np.ones(5), 0.5)
        with pytest.raises(SingularMatrixError):
            mvo_isotropic(IsotropicModel.homoskedastic(3, -0.5), np.ones(3), 0.5)

    def test_lambda_must_be_positive(self):
        with pytest.raises(ValueError):
            mvo_isotropic(IsotropicModel.homoskedastic(3, 0.1), np.ones(3), 0.0)

    def test_large_n_limit_is_relative_alpha(self):
        rho, sigma, lam = 0.3, 1.4, 0.8
        rng = np.random.default_rng(42)
        deviations = {}
        for n in [1000, 10000]:
            model = IsotropicModel.homoskedastic(n, rho, sigma)
            alphas = rng.normal(size=n)
            res = mvo_isotropic(model, alphas, lam)
            limit = (alphas - alphas.mean()) / (2 * lam * (1 - rho) * sigma**2)
            deviations[n] = np.max(np.abs(res.weights - limit))
        assert deviations[10000] < deviations[1000]
        # O(1/n) decay: max deviation is |mean z| / (2 lam sigma (1+(n-1)rho))
        for n, dev in deviations.items():
            assert dev < 1.0 / (n * rho) / (2 * lam * sigma * 0.9)


class TestCenteringFactor:
    def test_zero_rho(self):
        for n in [1, 10, 1000]:
            assert centering_factor(0.0, n) == 0.0

    def test_limit_is_one(self):
        assert centering_factor(0.5, 10**9) == pytest.approx(1.0, abs=1e-8)

    def test_substitution(self):
        assert centering_factor(0.2, 10) == pytest.approx(2.0 / 2.8, abs=1e-15)

    def test_single_asset_equals_rho(self):
        assert centering_factor(0.37, 1) == pytest.approx(0.37, abs=1e-15)


class TestMahalanobis:
    def test_zero_alpha(self):
        model = IsotropicModel.homoskedastic(7, 0.2)
        assert mahalanobis_z_sq(model, np.zeros(7)) == 0.0

    def test_independent_unit_vol_is_sum_of_squares(self):
        model = IsotropicModel.homoskedastic(5, 0.0)
        alphas = np.array([1.0, 2.0, -1.0, 0.5, 0.0])
        assert mahalanobis_z_sq(model, alphas) == pytest.approx(
            float(np.sum(alphas**2)), rel=1e-14
        )

    def test_matches_dense_quadratic_form(self):
        rng = np.random.default_rng(43)
        model = IsotropicModel(15, 0.25, rng.uniform(0.2, 1.5, size=15))
        alphas = rng.normal(size=15)
        want = float(alphas @ np.linalg.solve(model.dense(), alphas))
        assert mahalanobis_z_sq(model, alphas) == pytest.approx(want, rel=1e-10)

    def test_grows_linearly_in_n(self):
        # i.i.d. scores with fixed dispersion: the squared length scales
        # with the asset count; a line fit over a size sweep is near-perfect
        # once per-size sampling noise is averaged down
        rng = np.random.default_rng(44)
        rho, points = 0.2, []
        for n in range(100, 1001, 100):
            model = IsotropicModel.homoskedastic(n, rho)
            mean_z_sq = float(np.mean(
                [mahalanobis_z_sq(model, rng.normal(size=n)) for _ in range(50)]
            ))
            points.append(DofTrial(0, n, (), 1.0, 1.0, mean_z_sq))
        fit = fit_large_n(points, 100, 1000)
        assert fit.slope > 0
        assert fit.r_squared > 0.99


class TestLaplaceOmega:
    def test_origin_limit_is_two(self):
        assert laplace_omega(0.0, 10) == 2.0

    def test_large_score_vanishes(self):
        n = 10
        big = 1e12
        expected = 2.0 / math.sqrt(big / (n + 1))
        assert laplace_omega(big, n) == pytest.approx(expected, rel=1e-5)
        assert laplace_omega(big, n) < 1e-5

    def test_exact_unit_value(self):
        for n in [1, 10, 499]:
            assert laplace_omega(2.0 * (n + 1), n) == 1.0

    def test_series_and_formula_agree_at_crossover(self):
        for n in [1, 10, 100]:
            x = 1e-8 / (n + 1)
            assert _omega_series(x) == pytest.approx(_omega_closed_form(x), abs=1e-12)

    def test_monotone_decreasing(self):
        values = [laplace_omega(z, 9) for z in np.linspace(0.0, 50.0, 400)]
        assert all(b < a for a, b in zip(values, values[1:]))

    def test_domain_errors(self):
        with pytest.raises(ValueError):
            laplace_omega(-0.1, 5)
        with pytest.raises(ValueError):
            laplace_omega(1.0, 0)


class TestLaplaceAllocation:
    def test_zero_alpha_zero_weights(self):
        model = IsotropicModel.homoskedastic(6, 0.3)
        res = laplace_allocation(model, np.zeros(6), lam=0.5)
        assert np.all(res.weights == 0.0)
        assert res.omega == 2.0

    def test_dividing_by_omega_recovers_mvo(self):
        rng = np.random.default_rng(45)
        model = IsotropicModel(10, 0.2, rng.uniform(0.5, 1.5, size=10))
        alphas = rng.normal(size=10)
        lap = laplace_allocation(model, alphas, lam=0.6)
        mvo = mvo_isotropic(model, alphas, lam=0.6)
        assert np.allclose(lap.weights / lap.omega, mvo.weights, rtol=1e-13)

    def test_weights_parallel_to_mvo(self):
        rng = np.random.default_rng(46)
        model = IsotropicModel(30, 0.4, rng.uniform(0.2, 2.0, size=30))
        alphas = rng.normal(size=30)
        lap = laplace_allocation(model, alphas, lam=0.9)
        mvo = mvo_isotropic(model, alphas, lam=0.9)
        cosine = (lap.weights @ mvo.weights) / (
            np.linalg.norm(lap.weights) * np.linalg.norm(mvo.weights)
        )
        assert cosine >= 1.0 - 1e-12

    def test_conviction_scaling_damps_weights(self):
        # doubling alphas less than doubles holdings under fat tails
        model = IsotropicModel.homoskedastic(10, 0.2)
        base = np.random.default_rng(47).normal(size=10)
        ratios = []
        for scale in [1.0, 2.0, 4.0]:
            res = laplace_allocation(model, scale * base, lam=0.5)
            ratios.append(np.linalg.norm(res.weights) / scale)
        assert ratios[0] > ratios[1] > ratios[2]

    def test_custom_scaling_hook(self):
        model = IsotropicModel.homoskedastic(4, 0.1)
        alphas = np.array([0.1, 0.2, -0.1, 0.05])
        res = scaled_allocation(model, alphas, 0.5, lambda z_sq, n: 0.25)
        mvo = mvo_isotropic(model, alphas, 0.5)
        assert np.allclose(res.weights, 0.25 * mvo.weights, atol=1e-15)
        assert res.omega == 0.25
