import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.integrate import quad
from scipy.special import ndtri

from loctime import ks_distance, least_squares_fit, mean_stderr, normal_cdf

# frozen from quadrature of the Gaussian density over (-20, 1]
PHI_AT_1 = 0.8413447460685429


class TestNormalCdf:
    def test_symmetry_point(self):
        assert normal_cdf(0.0) == 0.5

    def test_tail(self):
        assert normal_cdf(8.0) > 1.0 - 1e-14

    def test_at_one_against_quadrature(self):
        oracle, err = quad(lambda x: math.exp(-x * x / 2) / math.sqrt(2 * math.pi),
                           -20.0, 1.0, epsabs=1e-13)
        assert abs(oracle - PHI_AT_1) < 1e-12
        assert abs(normal_cdf(1.0) - PHI_AT_1) < 1e-10

    @given(st.floats(min_value=-6, max_value=6))
    def test_complement(self, x):
        assert normal_cdf(x) + normal_cdf(-x) == pytest.approx(1.0, abs=1e-14)


class TestKsDistance:
    def test_single_point_at_zero(self):
        assert ks_distance([0.0]) == pytest.approx(0.5)

    def test_exact_quantile_grid(self):
        n = 100
        xs = ndtri((np.arange(1, n + 1) - 0.5) / n)
        assert ks_distance(xs) == pytest.approx(1.0 / (2 * n), abs=1e-12)

    def test_displaced_mass(self):
        assert ks_distance(np.full(50, 10.0)) > 0.99

    @given(st.lists(st.floats(min_value=-5, max_value=5), min_size=1, max_size=50))
    def test_sorting_invariance_and_positivity(self, xs):
        d = ks_distance(xs)
        assert d == ks_distance(sorted(xs, reverse=True))
        assert 0.0 < d <= 1.0

    def test_rejects_empty(self):
        with pytest.raises(ValueError):
            ks_distance([])


class TestLeastSquares:
    def test_linear_through_origin(self):
        xs = np.array([0.05, 0.1, 0.2, 0.4])
        coef = least_squares_fit(xs, 4.0 * xs, degree=1)
        assert coef[0] == pytest.approx(4.0, abs=1e-12)

    def test_quadratic_exact(self):
        xs = np.array([0.05, 0.1, 0.2, 0.4])
        coef = least_squares_fit(xs, 4.0 * xs + 2.0 * xs ** 2, degree=2)
        assert coef == pytest.approx([4.0, 2.0], abs=1e-10)

    def test_intercept_form(self):
        xs = np.array([1.0, 2.0, 3.0])
        coef = least_squares_fit(xs, 5.0 - 2.0 * xs, degree=1, intercept=True)
        assert coef == pytest.approx([5.0, -2.0], abs=1e-12)

    def test_noisy_slope_recovery(self, rng):
        xs = np.linspace(0.1, 1.0, 200)
        noise = rng.standard_normal(200) * 0.01
        coef = least_squares_fit(xs, 4.0 * xs + noise, degree=1)
        # closed-form OLS sd: sigma / sqrt(sum x^2)
        sd = 0.01 / math.sqrt(float(np.sum(xs ** 2)))
        assert abs(coef[0] - 4.0) < 4 * sd

    def test_singular_design_rejected(self):
        with pytest.raises(ValueError):
            least_squares_fit([1.0, 1.0], [2.0, 3.0], degree=2)

    @given(st.lists(st.integers(min_value=-30, max_value=30).map(lambda k: k / 10.0),
                    min_size=4, max_size=12, unique=True),
           st.integers(min_value=0, max_value=2 ** 32 - 1))
    def test_residual_orthogonality(self, xs, seed):
        xs = np.asarray(xs)
        ys = np.asarray(np.random.default_rng(seed).standard_normal(len(xs)))
        coef = least_squares_fit(xs, ys, degree=2)
        resid = ys - (coef[0] * xs + coef[1] * xs ** 2)
        scale = max(1.0, float(np.abs(ys).max()))
        assert abs(float(resid @ xs)) < 1e-9 * scale * len(xs)
        assert abs(float(resid @ xs ** 2)) < 1e-9 * scale * len(xs)


class TestMeanStderr:
    def test_constant_sample(self):
        assert mean_stderr([1.0, 1.0, 1.0]) == (1.0, 0.0)

    def test_two_point_samples(self):
        assert mean_stderr([0.0, 2.0]) == pytest.approx((1.0, 1.0))
        assert mean_stderr([-1.0, 1.0]) == pytest.approx((0.0, 1.0))

    def test_rejects_short(self):
        with pytest.raises(ValueError):
            mean_stderr([])
        with pytest.raises(ValueError):
            mean_stderr([1.0])
