import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.integrate import quad

from loctime import (PathGrid, alpha_diagonal, alpha_from_field, alpha_triangular,
                     bracket, bracket_naive, clark_ocone_reconstruct, covariation,
                     g_modulus, occupation_field, psi, psi_series,
                     triangular_kernel_constants, u_hat, u_hat_l2, u_hat_series)
from loctime._fast import triangular_pair_sum


def path_from_values(values, t=None):
    values = np.asarray(values, dtype=np.float64)
    n = len(values) - 1
    t = t if t is not None else float(n)
    return PathGrid(dt=t / n, values=values, t=t)


def constant_path(n=1024, t=1.0):
    return PathGrid(dt=t / n, values=np.zeros(n + 1), t=t)


def unit_slope_path(n=1024, t=1.0):
    return PathGrid(dt=t / n, values=np.linspace(0.0, t, n + 1), t=t)


def brownian_path(seed, n=1024, t=1.0):
    rng = np.random.default_rng(seed)
    dt = t / n
    incr = rng.standard_normal(n) * math.sqrt(dt)
    return PathGrid(dt=dt, values=np.concatenate([[0.0], np.cumsum(incr)]), t=t)


random_walks = st.lists(st.integers(min_value=-6, max_value=6), min_size=2, max_size=80)


class TestGModulus:
    def test_zero_shift(self):
        fld = occupation_field(constant_path(), 0.1, 0.5)
        assert g_modulus(fld, 0.0) == 0.0

    def test_unit_slope_closed_form(self):
        # the field is the indicator of [0,1]; the lag-h square integral is 2h
        fld = occupation_field(unit_slope_path(), 1.0 / 64, 0.25)
        assert g_modulus(fld, 0.125) == pytest.approx(0.25, abs=1e-14)

    def test_snap_to_grid(self):
        fld = occupation_field(unit_slope_path(), 1.0 / 64, 0.25)
        h = 0.125 + 0.003  # snaps back to 8 bins
        assert g_modulus(fld, h) == g_modulus(fld, 0.125)

    def test_resolution_guard(self):
        fld = occupation_field(constant_path(), 0.1, 0.5)
        with pytest.raises(ValueError):
            g_modulus(fld, 0.3)

    def test_padding_guard(self):
        fld = occupation_field(unit_slope_path(), 1.0 / 64, 0.1)
        with pytest.raises(ValueError):
            g_modulus(fld, 0.5)


class TestAlphaEstimators:
    def test_field_unit_slope(self):
        fld = occupation_field(unit_slope_path(), 1.0 / 64, 0.25)
        assert alpha_from_field(fld) == pytest.approx(1.0, abs=1e-14)

    def test_field_zero_mass(self):
        fld = occupation_field(constant_path(t=1.0), 0.1, 0.5)
        # all occupation in one bin: alpha = w * (t/w)^2 = t^2 / w
        assert alpha_from_field(fld) == pytest.approx(10.0)

    def test_diagonal_constant_path(self):
        # closed form: 2 dt^2 n(n-1)/(2w) = t^2 (1 - 1/n) / w
        n, w, t = 256, 0.125, 1.0
        got = alpha_diagonal(constant_path(n=n, t=t), w)
        assert got == pytest.approx(t * t * (1 - 1 / n) / w, rel=1e-12)

    def test_diagonal_matches_field_on_constant_path(self):
        n, w = 4096, 0.125
        p = constant_path(n=n)
        fld = occupation_field(p, w, 0.5)
        # agreement up to the O(dt/w) self-pair correction
        assert alpha_diagonal(p, w) == pytest.approx(alpha_from_field(fld), rel=1e-3)

    def test_triangular_steep_path_is_zero(self):
        # every increment exceeds h, so no pair contributes
        p = unit_slope_path(n=16, t=16.0)
        assert alpha_triangular(p, 0.5) == 0.0

    def test_triangular_rejects_bad_h(self):
        with pytest.raises(ValueError):
            alpha_triangular(constant_path(), 0.0)

    @given(st.lists(st.floats(min_value=-5, max_value=5, allow_nan=False), min_size=2, max_size=40),
           st.floats(min_value=0.05, max_value=3.0, allow_nan=False))
    def test_pair_sum_matches_bruteforce(self, vals, h):
        arr = np.sort(np.asarray(vals, dtype=np.float64))
        brute = 0.0
        for i in range(len(arr)):
            for j in range(i + 1, len(arr)):
                brute += max(h - abs(arr[j] - arr[i]), 0.0) ** 2
        assert triangular_pair_sum(arr, h) == pytest.approx(brute, rel=1e-12, abs=1e-12)

    def test_consistency_triangle_across_resolutions(self):
        # mean |alpha_field - alpha_diag| tracks the dt/w self-pair term and
        # |alpha_field - alpha_tri| the O(h) kernel bias: halving (dt/w, h)
        # should roughly halve both
        def level(n, w, h, reps=50):
            dev_d, dev_t = [], []
            for seed in range(reps):
                p = brownian_path(seed + 9000, n=n)
                fld = occupation_field(p, w, h + w)
                af = alpha_from_field(fld)
                dev_d.append(abs(af - alpha_diagonal(p, w)))
                dev_t.append(abs(af - alpha_triangular(p, h)))
            return np.mean(dev_d), np.mean(dev_t)

        coarse = level(2 ** 12, 0.0125, 0.1)
        fine = level(2 ** 14, 0.00625, 0.05)
        assert fine[0] < 0.75 * coarse[0]
        assert fine[1] < 0.75 * coarse[1]

    def test_triangular_matches_exact_finite_h_mean(self):
        # frozen oracle: E of the kernel pair-sum estimator at h = 0.05 equals
        # 3 h^-3 int_0^1 (1-s) * 2 int_0^h (h-x)^2 p_s(x) dx ds = 1.039241
        # (the kernel carries a -0.49 h smoothing bias against E alpha = 1.06385)
        reps, n, h = 200, 2 ** 13, 0.05
        vals = []
        for seed in range(reps):
            vals.append(alpha_triangular(brownian_path(seed, n=n), h))
        vals = np.asarray(vals)
        se = vals.std(ddof=1) / math.sqrt(reps)
        assert abs(vals.mean() - 1.039241) < 3 * se + 0.02


class TestPsi:
    def test_constant_path_cancels(self):
        p = constant_path(n=64)
        assert all(psi(p, 0.25, m) == 0.0 for m in range(65))
        assert not psi_series(p, 0.25).any()

    def test_unit_slope_value(self):
        # all of the trailing h-window counts below, nothing above
        p = unit_slope_path(n=1024)
        h = 0.125
        m = 768
        expect = p.dt * math.floor(h / p.dt)
        assert psi(p, h, m) == pytest.approx(expect, abs=p.dt + 1e-15)

    def test_tie_convention(self):
        # revisiting a level: ties sit in both windows and cancel
        p = path_from_values([0.0, 1.0, 0.0, 1.0], t=1.0)
        assert psi(p, 0.5, 2) == 0.0

    def test_index_range(self):
        p = constant_path(n=8)
        with pytest.raises(IndexError):
            psi(p, 0.1, 9)
        with pytest.raises(IndexError):
            psi(p, 0.1, -1)

    def test_sign_flip_antisymmetry(self):
        p = brownian_path(5, n=512)
        flipped = PathGrid(dt=p.dt, values=-p.values, t=p.t)
        for m in (1, 100, 512):
            assert psi(p, 0.2, m) == -psi(flipped, 0.2, m)
        assert np.array_equal(psi_series(p, 0.2), -psi_series(flipped, 0.2))

    @given(random_walks, st.integers(min_value=1, max_value=32))
    def test_series_matches_naive(self, steps, sixteenths):
        # dyadic walk values and dyadic h keep every comparison exact, so the
        # streaming and direct counts must agree to the bit
        h = sixteenths / 16.0
        values = np.concatenate([[0.0], np.cumsum(np.array(steps) * 0.25)])
        p = path_from_values(values, t=1.0)
        series = psi_series(p, h)
        for m in range(p.n_steps + 1):
            assert series[m] == psi(p, h, m)

    def test_series_matches_naive_brownian_4096(self):
        p = brownian_path(17, n=4096)
        for h in (0.05, 0.2):
            series = psi_series(p, h)
            sample = [0, 1, 7, 63, 1024, 2049, 4096]
            for m in sample:
                assert series[m] == psi(p, h, m)


class TestBracketCovariation:
    def test_constant_path_zero(self):
        p = constant_path(n=128)
        assert bracket(p, 0.2) == 0.0
        assert covariation(p, 0.2) == 0.0

    def test_naive_equals_fast_exactly(self):
        for seed in (1, 2):
            p = brownian_path(seed, n=2048)
            for h in (0.1, 0.3):
                assert bracket(p, h) == bracket_naive(p, h)

    def test_sign_flip(self):
        p = brownian_path(11, n=512)
        flipped = PathGrid(dt=p.dt, values=-p.values, t=p.t)
        assert bracket(p, 0.2) == bracket(flipped, 0.2)
        assert covariation(p, 0.2) == -covariation(flipped, 0.2)

    def test_rejects_bad_h(self):
        with pytest.raises(ValueError):
            bracket(constant_path(), -0.1)


class TestUHat:
    def test_h_zero(self):
        p = brownian_path(3, n=64)
        assert u_hat(p, 1.0, 0.0, 32) == 0.0

    def test_rejects_r_at_horizon(self):
        p = constant_path(n=64)
        with pytest.raises(ValueError):
            u_hat(p, 1.0, 0.1, 64)

    def test_symmetric_past_cancels(self):
        # paired past samples at +a and -a around the current point
        p = path_from_values([0.0, 0.8, -0.8, 0.0], t=0.5)
        assert u_hat(p, 1.0, 0.4, 3) == pytest.approx(0.0, abs=1e-12)

    def test_single_sample_against_quadrature(self):
        # one past sample a distance z below the current point, s = t - r = 1
        dt = 0.25
        p = PathGrid(dt=dt, values=np.array([0.0, 0.5, 0.5, 0.5]), t=0.75)
        z, h = 0.5, 1.0
        oracle, _ = quad(lambda eta: (math.exp(-((z - eta) ** 2) / 2.0)
                                      - math.exp(-((z + eta) ** 2) / 2.0))
                         / math.sqrt(2 * math.pi), 0.0, h, epsabs=1e-13)
        assert u_hat(p, 1.0 + dt, h, 1) == pytest.approx(4.0 * dt * oracle, abs=1e-12)

    def test_at_zero_separation_is_zero(self):
        # the lag integrand is odd in the separation
        dt = 0.25
        p = PathGrid(dt=dt, values=np.array([0.0, 0.0, 0.0, 0.0]), t=0.75)
        assert u_hat(p, 1.0 + dt, 1.0, 1) == pytest.approx(0.0, abs=1e-14)

    def test_series_matches_pointwise(self):
        p = brownian_path(23, n=256)
        series = u_hat_series(p, 1.0, 0.2, 1)
        for m in (0, 1, 100, 255):
            assert series[m] == pytest.approx(u_hat(p, 1.0, 0.2, m), rel=1e-12, abs=1e-13)

    def test_l2_zero_at_h_zero(self):
        p = brownian_path(3, n=64)
        assert u_hat_l2(p, 1.0, 0.0) == 0.0

    def test_l2_stride_consistency(self):
        p = brownian_path(29, n=512)
        full = u_hat_l2(p, 1.0, 0.2, 1)
        coarse = u_hat_l2(p, 1.0, 0.2, 4)
        assert coarse == pytest.approx(full, rel=0.05)

    def test_l2_grid_refinement_stability(self):
        # halving dt moves the replica mean by less than the replica spread
        h, t, reps = 0.2, 1.0, 40
        means = {}
        for n in (512, 1024):
            vals = []
            for seed in range(reps):
                rng = np.random.default_rng((n, seed))
                incr = rng.standard_normal(n) * math.sqrt(t / n)
                p = PathGrid(dt=t / n, values=np.concatenate([[0.0], np.cumsum(incr)]), t=t)
                vals.append(u_hat_l2(p, t, h, 2))
            vals = np.asarray(vals)
            means[n] = (vals.mean(), vals.std(ddof=1) / math.sqrt(reps))
        gap = abs(means[512][0] - means[1024][0])
        assert gap < 2.0 * (means[512][1] + means[1024][1])


class TestReconstruction:
    def test_h_zero_returns_mean(self):
        p = brownian_path(31, n=128)
        assert clark_ocone_reconstruct(p, 1.0, 0.0, 0.42, 4) == 0.42

    def test_integrand_signs(self):
        # the window-count part enters negatively: an upward step taken right
        # above a cluster of past occupation must lower the reconstruction
        values = np.concatenate([np.zeros(64), [0.05, 0.10]])
        p = path_from_values(values, t=0.5)
        rec = clark_ocone_reconstruct(p, 1.0, 0.2, 0.0, p.n_steps)
        assert rec < 0.0


class TestKernelConstants:
    def test_quadrature_values(self):
        # plain calculus: the squared triangle integrates to (2/3) h^3 and the
        # triangle itself to h^2
        for h in (0.1, 1.0, 10.0):
            sq, lin = triangular_kernel_constants(h)
            assert sq == pytest.approx(2.0 / 3.0, abs=1e-12)
            assert lin == pytest.approx(1.0, abs=1e-12)
