import numpy as np
import numpy.testing as npt
import pytest

from egakit.correlation import tetrachoric_matrix
from egakit.datagen import (FactorSpec, SimulationCondition,
                            build_implied_sigma, condition_grid, dichotomize,
                            sample_dataset)
from egakit.exceptions import NotPositiveDefiniteError
from egakit.ggm import standardize_precision


def brute_force_sigma(spec: FactorSpec) -> np.ndarray:
    # Element-by-element oracle for Lambda Psi Lambda' + Theta.
    lam = spec.loading_matrix()
    psi = spec.factor_cov()
    p, m = lam.shape
    sigma = np.zeros((p, p))
    for i in range(p):
        for j in range(p):
            total = 0.0
            for a in range(m):
                for b in range(m):
                    total += lam[i, a] * psi[a, b] * lam[j, b]
            sigma[i, j] = total
    return sigma + spec.residual_var * np.eye(p)


class TestBuildImpliedSigma:
    def test_two_orthogonal_singletons(self):
        sigma = build_implied_sigma(FactorSpec(2, 1, 0.0))
        npt.assert_array_equal(sigma, [[2.0, 0.0], [0.0, 2.0]])

    def test_two_correlated_singletons(self):
        sigma = build_implied_sigma(FactorSpec(2, 1, 0.5))
        npt.assert_allclose(sigma, [[2.0, 0.5], [0.5, 2.0]])

    def test_matches_brute_force(self):
        spec = FactorSpec(2, 2, 0.5)
        sigma = build_implied_sigma(spec)
        npt.assert_allclose(sigma, brute_force_sigma(spec), atol=1e-12)
        # within-factor covariance 1.0, between-factor 0.5
        assert sigma[0, 1] == pytest.approx(1.0)
        assert sigma[0, 2] == pytest.approx(0.5)
        assert sigma[0, 0] == pytest.approx(2.0)

    def test_invalid_spec(self):
        with pytest.raises(ValueError):
            FactorSpec(0, 5, 0.0)
        with pytest.raises(ValueError):
            FactorSpec(2, 5, 1.0)
        with pytest.raises(ValueError):
            FactorSpec(2, 5, -0.1)


class TestSampleDataset:
    def test_deterministic(self):
        sigma = build_implied_sigma(FactorSpec(2, 5, 0.5))
        a = sample_dataset(sigma, 40, seed=9)
        b = sample_dataset(sigma, 40, seed=9)
        npt.assert_array_equal(a.values, b.values)

    def test_distinct_seeds_differ(self):
        sigma = build_implied_sigma(FactorSpec(2, 5, 0.5))
        a = sample_dataset(sigma, 40, seed=9)
        b = sample_dataset(sigma, 40, seed=10)
        assert not np.array_equal(a.values, b.values)

    def test_rejects_empty(self):
        sigma = build_implied_sigma(FactorSpec(2, 5, 0.5))
        with pytest.raises(ValueError):
            sample_dataset(sigma, 0, seed=1)

    def test_law_of_large_numbers(self):
        sigma = build_implied_sigma(FactorSpec(2, 5, 0.5))
        data = sample_dataset(sigma, 50_000, seed=77)
        sample_cov = np.cov(data.values, rowvar=False)
        npt.assert_allclose(sample_cov, sigma, atol=0.03)

    def test_cholesky_failure_names_minor(self):
        bad = np.array([[1.0, 2.0], [2.0, 1.0]])  # indefinite
        with pytest.raises(NotPositiveDefiniteError) as err:
            sample_dataset(bad, 10, seed=0)
        assert err.value.minor == 2


class TestDichotomize:
    def test_sign_rule(self):
        out = dichotomize(np.array([[-0.1, 0.2], [0.0, 3.0]]))
        npt.assert_array_equal(out.values, [[0, 1], [0, 1]])

    def test_all_negative_column(self):
        out = dichotomize(np.array([[-1.0, 1.0], [-2.0, -1.0], [-0.5, 2.0]]))
        npt.assert_array_equal(out.values[:, 0], [0, 0, 0])

    def test_latent_correlation_recovered(self):
        # Quadrant oracle: p11 = 1/4 + arcsin(rho)/(2 pi); the tetrachoric
        # of the dichotomized pair recovers the latent rho = 0.5.
        sigma = np.array([[1.0, 0.5], [0.5, 1.0]])
        data = dichotomize(sample_dataset(sigma, 200_000, seed=5))
        r = tetrachoric_matrix(data.values)
        assert r.values[0, 1] == pytest.approx(0.5, abs=0.01)


class TestConditionGrid:
    def test_exactly_64(self):
        assert len(condition_grid()) == 64

    def test_contains_and_order(self):
        grid = condition_grid()
        assert SimulationCondition(2, 5, 100, 0.0) in grid
        assert grid[0] == SimulationCondition(2, 5, 100, 0.0)
        assert grid == sorted(grid)

    def test_levels(self):
        grid = condition_grid()
        assert {c.n_factors for c in grid} == {2, 4}
        assert {c.items_per_factor for c in grid} == {5, 10}
        assert {c.sample_size for c in grid} == {100, 500, 1000, 5000}
        assert {c.factor_corr for c in grid} == {0.0, 0.2, 0.5, 0.7}


class TestStructuralInvariants:
    def test_orthogonal_precision_block_diagonal(self):
        for items in (5, 10):
            spec = FactorSpec(2, items, 0.0)
            k = np.linalg.inv(build_implied_sigma(spec))
            between = k[:items, items:]
            assert np.max(np.abs(between)) < 1e-10

    @pytest.mark.parametrize("corr", [0.2, 0.5, 0.7])
    def test_between_partials_smaller_than_within(self, corr):
        spec = FactorSpec(4, 5, corr)
        k = np.linalg.inv(build_implied_sigma(spec))
        rho = np.abs(standardize_precision(k))
        within = []
        between = []
        for i in range(spec.n_items):
            for j in range(i + 1, spec.n_items):
                if i // 5 == j // 5:
                    within.append(rho[i, j])
                else:
                    between.append(rho[i, j])
        assert max(between) < min(within)

    def test_marginal_proportion_half(self):
        sigma = build_implied_sigma(FactorSpec(2, 5, 0.7))
        n = 100_000
        binary = dichotomize(sample_dataset(sigma, n, seed=13))
        se = 0.5 / np.sqrt(n)
        npt.assert_allclose(binary.values.mean(axis=0), 0.5, atol=3 * se)
