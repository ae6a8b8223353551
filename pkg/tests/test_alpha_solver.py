import math

import numpy as np
import pytest

from uplink_training.alpha_solver import (
    alpha_star_mrc_unconstrained,
    alpha_star_unconstrained,
    alpha_star_zf_unconstrained,
    feasible_alpha,
    solve_fixed_td,
)
from uplink_training.grid_oracle import GridSpec, grid_argmax_fixed_td
from uplink_training.sinr_model import ConfigError, Receiver, SystemConfig, sinr_at

EPS = np.finfo(float).eps


def cfg_(M=20, K=10, T=196, rho=1.0, ratio=1e3):
    return SystemConfig(M=M, K=K, T=T, rho=rho, rho_max=ratio * rho)


class TestFeasibleAlpha:
    def test_single_point_at_equal_power(self):
        cfg = cfg_(ratio=1.0)
        for td in (1.0, 50.0, 186.0):
            iv = feasible_alpha(td, cfg)
            assert iv.is_point
            assert iv.lo == pytest.approx((cfg.T - td) / cfg.T, rel=1e-15)

    def test_inactive_when_peak_is_large(self):
        iv = feasible_alpha(186.0, cfg_(ratio=1e3))
        assert (iv.lo, iv.hi) == (0.0, 1.0)

    def test_hand_evaluated_bounds(self):
        iv = feasible_alpha(186.0, cfg_(ratio=1.2))
        assert iv.lo == 0.0
        assert iv.hi == pytest.approx(1.2 * 10 / 196, rel=1e-15)
        assert iv.hi == pytest.approx(0.0612244897959, rel=1e-12)

    def test_rejects_td_beyond_training_minimum(self):
        with pytest.raises(ConfigError):
            feasible_alpha(190.0, cfg_())


class TestUnconstrained:
    @pytest.mark.parametrize("rx", list(Receiver))
    @pytest.mark.parametrize("rho", [1e-3, 1.0, 1e4])
    def test_half_when_td_equals_k(self, rx, rho):
        assert alpha_star_unconstrained(10.0, cfg_(rho=rho), rx) == 0.5

    @pytest.mark.parametrize("rx", list(Receiver))
    @pytest.mark.parametrize("td", [50.0, 100.0, 186.0])
    def test_low_snr_half(self, rx, td):
        assert abs(alpha_star_unconstrained(td, cfg_(rho=1e-4), rx) - 0.5) < 0.01

    def test_high_snr_mrc(self):
        # (sqrt(K T_d) - K) / (T_d - K) with K = 10, T_d = 90
        high = (math.sqrt(10 * 90) - 10) / (90 - 10)
        assert high == pytest.approx(0.25)
        assert abs(alpha_star_mrc_unconstrained(90.0, cfg_(rho=1e6)) - 0.25) < 1e-3

    def test_zf_hand_value(self):
        cfg = cfg_(rho=1.0)
        gamma = (10 * 196 + 186) / (196 * (186 - 10))
        assert gamma == pytest.approx(2146 / 34496)
        by_hand = -gamma + math.sqrt(gamma * (gamma + 1))
        assert by_hand == pytest.approx(0.19486, abs=1e-5)
        assert alpha_star_zf_unconstrained(186.0, cfg) == pytest.approx(by_hand, rel=1e-12)
        grid = grid_argmax_fixed_td(186.0, cfg, "ZF", GridSpec(alpha_step=1e-6, td_step=1.0, refine_iters=0))
        assert abs(grid.alpha - by_hand) <= 1e-6

    def test_zf_short_data_branch_matches_explicit_root(self):
        cfg = cfg_(rho=0.7)
        td = 4.0
        gamma = (10 * 0.7 * 196 + td) / (0.7 * 196 * (td - 10))
        by_hand = -gamma - math.sqrt(gamma * (gamma + 1))
        assert alpha_star_zf_unconstrained(td, cfg) == pytest.approx(by_hand, rel=1e-12)

    def test_mrc_explicit_root(self):
        cfg = cfg_(rho=0.3)
        td = 120.0
        rt = cfg.rho * cfg.T
        by_hand = (math.sqrt((rt * 10 + td) * (rt * td + td)) - (rt * 10 + td)) / (rt * (td - 10))
        assert alpha_star_mrc_unconstrained(td, cfg) == pytest.approx(by_hand, rel=1e-12)

    def test_continuous_across_td_equals_k(self):
        cfg = cfg_(rho=2.0)
        for rx in Receiver:
            left = alpha_star_unconstrained(10.0 - 1e-7, cfg, rx)
            right = alpha_star_unconstrained(10.0 + 1e-7, cfg, rx)
            assert abs(left - 0.5) < 1e-7 and abs(right - 0.5) < 1e-7

    def test_single_user_mrc_falls_back_to_search(self):
        # with K = 1 the MRC and ZF SINRs are the same function of alpha
        cfg = SystemConfig(M=8, K=1, T=50, rho=0.8, rho_max=100)
        for td in (5.0, 20.0, 49.0):
            assert alpha_star_mrc_unconstrained(td, cfg) == pytest.approx(
                alpha_star_zf_unconstrained(td, cfg), abs=1e-8)

    def test_mrc_and_zf_share_the_stationary_point(self):
        rng = np.random.default_rng(3)
        for _ in range(200):
            K = int(rng.integers(2, 30))
            cfg = cfg_(M=K + 5, K=K, T=K + int(rng.integers(1, 300)), rho=10 ** rng.uniform(-3, 3))
            td = rng.uniform(0.01, 1) * (cfg.T - cfg.K)
            assert alpha_star_mrc_unconstrained(td, cfg) == pytest.approx(
                alpha_star_zf_unconstrained(td, cfg), rel=1e-10)

    @pytest.mark.parametrize("rx", list(Receiver))
    def test_stationarity(self, rx):
        rng = np.random.default_rng(8)
        h = 1e-5
        for _ in range(100):
            K = int(rng.integers(2, 20))
            cfg = cfg_(M=K + int(rng.integers(1, 50)), K=K, T=K + int(rng.integers(1, 200)),
                       rho=10 ** rng.uniform(-2, 2))
            td = rng.uniform(0.05, 1) * (cfg.T - cfg.K)
            a = alpha_star_unconstrained(td, cfg, rx)
            s = sinr_at(np.array([a - h, a, a + h]), td, cfg, rx)
            slope = (s[2] - s[0]) / (2 * h) / s[1]
            assert abs(slope) <= 1e-8

    @pytest.mark.parametrize("rx", list(Receiver))
    def test_matches_grid_oracle(self, rx):
        rng = np.random.default_rng(21)
        spec = GridSpec(alpha_step=1e-6, td_step=1.0, refine_iters=2)
        for _ in range(20):
            K = int(rng.integers(2, 20))
            cfg = cfg_(M=K + int(rng.integers(1, 50)), K=K, T=K + int(rng.integers(1, 300)),
                       rho=10 ** rng.uniform(-2, 3))
            td = rng.uniform(0.05, 1) * (cfg.T - cfg.K)
            closed = alpha_star_unconstrained(td, cfg, rx)
            assert abs(closed - grid_argmax_fixed_td(td, cfg, rx, spec).alpha) <= 2e-6


class TestConcavity:
    @pytest.mark.parametrize("rx", list(Receiver))
    def test_second_differences_nonpositive(self, rx):
        rng = np.random.default_rng(17)
        h = 1e-4
        grid = np.linspace(2 * h, 1 - 2 * h, 2000)
        for _ in range(200):
            K = int(rng.integers(2, 20))
            cfg = cfg_(M=K + int(rng.integers(1, 50)), K=K, T=K + int(rng.integers(1, 300)),
                       rho=10 ** rng.uniform(-2, 2))
            td = rng.uniform(0.01, 1) * (cfg.T - cfg.K)
            s0 = sinr_at(grid, td, cfg, rx)
            d2 = sinr_at(grid + h, td, cfg, rx) - 2 * s0 + sinr_at(grid - h, td, cfg, rx)
            assert np.all(d2 <= 16 * EPS * s0.max())


class TestCubicPositivity:
    def test_positive_on_unit_interval(self):
        rng = np.random.default_rng(2)
        x = np.linspace(1e-3, 1 - 1e-3, 999)
        for _ in range(2000):
            b = 10 ** rng.uniform(-4, 3)
            a = 1 - b + 10 ** rng.uniform(-6, 3) if rng.random() < 0.7 else rng.uniform(1 - b, 50)
            f = (a - 1) * x ** 3 + 3 * b * x ** 2 - 3 * b * x + a * b + b * b
            assert np.all(f > 0)
            assert a * b + b * b > 0  # f(0)
            assert (a - 1) + a * b + b * b >= -1e-12 * (1 + abs(a * b))  # f(1)


class TestSolveFixedTd:
    def test_interior_unchanged(self):
        cfg = cfg_(ratio=1e3)
        sol = solve_fixed_td(186.0, cfg, "MRC")
        assert not sol.clipped
        assert sol.alpha_star == alpha_star_mrc_unconstrained(186.0, cfg)

    def test_zf_clipped_to_pilot_peak(self):
        cfg = cfg_(ratio=1.2)
        sol = solve_fixed_td(186.0, cfg, "ZF")
        assert alpha_star_zf_unconstrained(186.0, cfg) > 0.0612245
        assert sol.clipped
        assert sol.alpha_star == pytest.approx(1.2 * 10 / 196, rel=1e-15)
        assert sol.sinr_at_star == pytest.approx(float(sinr_at(sol.alpha_star, 186.0, cfg, "ZF")))

    def test_equal_power_forced(self):
        cfg = cfg_(ratio=1.0)
        for td in (20.0, 186.0):
            sol = solve_fixed_td(td, cfg, "MRC")
            assert sol.alpha_star == pytest.approx((cfg.T - td) / cfg.T, rel=1e-15)
            assert sol.clipped

    @pytest.mark.parametrize("rx", list(Receiver))
    def test_clipped_solution_beats_random_feasible_points(self, rx):
        rng = np.random.default_rng(4)
        for _ in range(50):
            K = int(rng.integers(2, 20))
            cfg = cfg_(M=K + 10, K=K, T=K + int(rng.integers(1, 200)),
                       rho=10 ** rng.uniform(-2, 2), ratio=rng.uniform(1, 3))
            td = rng.uniform(0.01, 1) * (cfg.T - cfg.K)
            sol = solve_fixed_td(td, cfg, rx)
            iv = feasible_alpha(td, cfg)
            assert sol.alpha_star in iv
            samples = rng.uniform(iv.lo, iv.hi, 1000)
            assert np.all(sinr_at(samples, td, cfg, rx) <= sol.sinr_at_star * (1 + 1e-12))
