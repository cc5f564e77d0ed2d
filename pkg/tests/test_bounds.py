import math

import numpy as np
import pytest

from dpnilm.bounds import (
    c_of_p,
    hierarchical_bounds,
    lower_bound_one_shot,
    multi_shot_bounds,
    one_shot_bounds,
    rip_constant,
    upper_bound_one_shot,
)
from dpnilm.hierarchy import decompose
from dpnilm.model import AppliancePowerVector

from oracles import hierarchical_reference, rip_exhaustive


class TestRipConstant:
    def test_single_appliance_zero(self):
        assert rip_constant(AppliancePowerVector([5.0]), 1) == 0.0

    def test_three_four(self):
        # normalized (0.6, 0.8): worst deviation max(|0.36-1|, |0.64-1|)
        assert rip_constant(AppliancePowerVector([3.0, 4.0]), 1) == pytest.approx(0.64)

    def test_singular_value_saturates(self, rng):
        for _ in range(10):
            n = int(rng.integers(2, 8))
            fleet = AppliancePowerVector(rng.uniform(1, 50, n))
            assert rip_constant(fleet, 2, "singular-value") >= 1.0

    def test_matches_exhaustive_enumeration(self, rng):
        for _ in range(30):
            n = int(rng.integers(1, 10))
            fleet = AppliancePowerVector(rng.uniform(0.5, 20.0, n))
            s = int(rng.integers(1, n + 1))
            for sv in (False, True):
                interp = "singular-value" if sv else "subset-norm"
                assert rip_constant(fleet, s, interp) == pytest.approx(
                    rip_exhaustive(fleet.powers, s, sv), rel=1e-12)

    def test_large_fleet_prefix_path(self, rng):
        # beyond the enumeration cutoff the prefix shortcut must agree with
        # the closed-form worst case (smallest single entry)
        powers = rng.uniform(1.0, 30.0, 24)
        fleet = AppliancePowerVector(powers)
        unit = powers / np.linalg.norm(powers)
        expected = 1.0 - float((unit**2).min())
        assert rip_constant(fleet, 3) == pytest.approx(expected, rel=1e-12)

    def test_range_validation(self, small_fleet):
        with pytest.raises(ValueError):
            rip_constant(small_fleet, 0)
        with pytest.raises(ValueError):
            rip_constant(small_fleet, 4)
        with pytest.raises(ValueError):
            rip_constant(small_fleet, 1, "bogus")


class TestRecoveryConstant:
    def test_override_wins(self, small_fleet):
        assert c_of_p(small_fleet, 2, override=0.015) == 0.015

    def test_single_appliance_value(self):
        # zero deviations, norm 4: 4 / ((sqrt(3) - 1) * 4)
        assert c_of_p(AppliancePowerVector([4.0]), 1) == pytest.approx(
            1.3660254037844386, rel=1e-12)

    def test_singular_value_undefined(self, rng):
        for _ in range(5):
            n = int(rng.integers(2, 7))
            fleet = AppliancePowerVector(rng.uniform(1, 9, n))
            assert math.isnan(c_of_p(fleet, 1, "singular-value"))

    def test_subset_norm_undefined_for_multi_appliance(self, rng):
        # any second appliance pushes the deviation past the usable range
        for _ in range(5):
            n = int(rng.integers(2, 9))
            fleet = AppliancePowerVector(rng.uniform(1, 9, n))
            assert math.isnan(c_of_p(fleet, 1))


class TestOneShotBounds:
    def test_lower_frozen_value(self):
        entry = lower_bound_one_shot(2.0, 1.0, 8, 0.015)
        assert entry.raw == pytest.approx(0.3089051724471125, rel=1e-12)
        assert entry.intermediates["b"] == pytest.approx(7.94)
        assert entry.intermediates["A1"] == pytest.approx(7.94)
        assert entry.intermediates["B1"] == 6.0

    def test_lower_small_epsilon_clamps(self):
        entry = lower_bound_one_shot(2.0, 0.01, 8, 0.015)
        assert entry.raw == pytest.approx(-0.70574461658268, rel=1e-10)
        assert entry.clamped == 0.0

    def test_lower_zero_budget_limit(self):
        assert lower_bound_one_shot(0.0, 1.0, 8, 0.015).raw == 1.0

    def test_upper_frozen_value(self):
        entry = upper_bound_one_shot(2.0, 1.0, 8, 10.0)
        assert entry.raw == pytest.approx(0.9867793325829013, rel=1e-12)

    def test_upper_a2_identity(self, rng):
        for _ in range(10_000):
            delta = float(rng.uniform(1e-3, 10.0))
            n = int(rng.integers(1, 13))
            p_norm = float(rng.uniform(1.0, 50.0))
            entry = upper_bound_one_shot(delta, float(rng.uniform(1e-3, 1e3)), n, p_norm)
            assert abs(entry.intermediates["A2"]) <= 1e-9

    def test_upper_long_epsilon_limit(self):
        assert upper_bound_one_shot(2.0, 1e4, 8, 10.0).raw == pytest.approx(1.0, abs=1e-12)

    def test_lower_monotone_in_epsilon(self, rng):
        # monotone on the domain where b >= 0, i.e. (2 + C) delta <= n
        grid = np.geomspace(1e-3, 1e3, 25)
        for _ in range(300):
            n = int(rng.integers(1, 13))
            c = float(rng.uniform(0.0, 1.0))
            delta = float(rng.uniform(0.0, n / (2.0 + c)))
            values = [lower_bound_one_shot(delta, e, n, c).raw for e in grid]
            diffs = np.diff(values)
            assert np.all(diffs >= -1e-9)

    def test_clamped_lower_below_clamped_upper(self, rng):
        for _ in range(500):
            n = int(rng.integers(1, 13))
            c = float(rng.uniform(0.0, 0.5))
            delta = float(rng.uniform(1e-3, 0.9 * n / (2.0 + c)))
            p_norm = float(rng.uniform(1.0, 100.0))
            eps = float(rng.uniform(1e-3, 1e3))
            rep = one_shot_bounds(delta, eps, n, c, p_norm)
            assert rep.clamped_lower <= rep.clamped_upper + 1e-12

    def test_parameter_validation(self):
        with pytest.raises(ValueError):
            lower_bound_one_shot(1.0, 0.0, 8, 0.015)
        with pytest.raises(ValueError):
            upper_bound_one_shot(1.0, 1.0, 8, 0.0)


class TestMultiShotBounds:
    def test_horizon_one_degenerates(self):
        rep = multi_shot_bounds(2.0, 1.0, 8, 1, 0.015, 10.0)
        assert rep.lower == 1.0
        assert rep.upper == pytest.approx(0.9867793325829013, rel=1e-12)

    def test_as_stated_lower_exceeds_one(self):
        # frozen from the independent evaluation: the as-stated telescope
        # multiplies through b*n and overshoots 1
        rep = multi_shot_bounds(2.0, 1.0, 8, 10, 0.015, 10.0)
        assert rep.lower == pytest.approx(7.62058620809605, rel=1e-10)
        assert rep.clamped_lower == 1.0
        assert rep.upper == pytest.approx(0.99867793325829, rel=1e-12)

    def test_corrected_variant(self):
        rep = multi_shot_bounds(2.0, 1.0, 8, 10, 0.015, 10.0, "corrected")
        b = rep.intermediates["b_delta_eps"]
        assert b == pytest.approx(0.3089051724471125, rel=1e-12)
        assert rep.intermediates["G"] == pytest.approx((1.0 - b) * 8)
        assert rep.lower == pytest.approx(1.0 - 9 * (1.0 - b) * 8 / 2.0, rel=1e-12)

    def test_validation(self):
        with pytest.raises(ValueError):
            multi_shot_bounds(1.0, 1.0, 8, 0, 0.015, 10.0)
        with pytest.raises(ValueError):
            multi_shot_bounds(1.0, 1.0, 8, 5, 0.015, 10.0, "bogus")


class TestHierarchicalBounds:
    def test_two_group_frozen_recursion(self):
        fleet = AppliancePowerVector([6.0, 6.0, 1.0, 1.0])
        hs = decompose(fleet, 0.1, u_max=1)
        rep = hierarchical_bounds(hs, 0.1, 1.0, 5, 1, 0.015)
        m_i = rep.intermediates["m_i"]
        big_i = rep.intermediates["M_i"]
        assert m_i[0] == pytest.approx(-0.28943122768352262, rel=1e-10)
        assert big_i[0] == pytest.approx(0.99626063056702299, rel=1e-10)
        assert m_i[1] == pytest.approx(-119718.22420486625, rel=1e-10)
        assert big_i[1] == pytest.approx(-2.0857740376880165, rel=1e-10)
        assert rep.lower == pytest.approx(-59859.256818046968, rel=1e-10)
        assert rep.upper == pytest.approx(-0.54475670356049674, rel=1e-10)
        assert rep.intermediates["delta_prime_i"][0] == 0.5

    def test_matches_reference_on_random_fleets(self, rng):
        for _ in range(50):
            n = int(rng.integers(2, 10))
            fleet = AppliancePowerVector(rng.uniform(1.0, 200.0, n))
            delta = float(rng.uniform(0.01, 0.45))
            u_max = int(rng.integers(1, 4))
            t = int(rng.integers(1, 20))
            eps = float(rng.uniform(0.05, 20.0))
            c = float(rng.uniform(0.0, 0.5))
            hs = decompose(fleet, delta, u_max)
            rep = hierarchical_bounds(hs, delta, eps, t, u_max, c)
            groups = [(h.n_i, h.power_subvector.l2_norm, h.p_u) for h in hs]
            lower, upper, m_list, big_list = hierarchical_reference(groups, delta, eps, t, c)
            assert rep.lower == pytest.approx(lower, rel=1e-9, abs=1e-9)
            assert rep.upper == pytest.approx(upper, rel=1e-9, abs=1e-9)
            np.testing.assert_allclose(rep.intermediates["m_i"], m_list, rtol=1e-9)
            np.testing.assert_allclose(rep.intermediates["M_i"], big_list, rtol=1e-9)

    def test_single_group_base_case(self):
        # no smaller appliances: the recursion seed is zero disturbance
        fleet = AppliancePowerVector([5.0, 5.5, 6.0])
        hs = decompose(fleet, 0.1, u_max=2)
        assert len(hs) == 1 and hs[0].p_u == 0.0
        rep = hierarchical_bounds(hs, 0.1, 1.0, 5, 2, 0.015)
        plain = multi_shot_bounds(0.1, 1.0, 3, 5, 0.015, fleet.l2_norm)
        assert rep.lower == pytest.approx(plain.lower, rel=1e-12)
        assert rep.upper == pytest.approx(plain.upper, rel=1e-12)

    def test_disturbance_recursion_algebra(self, rng):
        # delta_i' = p_u/2 + sum_{k<i} n_k * T * (1 - clamped m_k) * |P_k|;
        # in particular clamped floors of 1 leave only the p_u/2 seed
        fleet = AppliancePowerVector([10.0, 10.0, 1000.0, 1000.0])
        hs = decompose(fleet, 0.2, u_max=1)
        t = 3
        rep = hierarchical_bounds(hs, 0.2, 2.0, t, 1, 0.015)
        d_primes = rep.intermediates["delta_prime_i"]
        m_clamped = rep.intermediates["m_i_clamped"]
        for i, h in enumerate(hs):
            carried = sum(
                hs[k].n_i * t * (1.0 - m_clamped[k]) * hs[k].power_subvector.l2_norm
                for k in range(i)
            )
            assert d_primes[i] == pytest.approx(h.p_u / 2.0 + carried, rel=1e-12)

    def test_zero_budget_single_group_floor_is_one(self):
        fleet = AppliancePowerVector([7.0, 7.5, 8.0])
        hs = decompose(fleet, 0.0, u_max=2)
        rep = hierarchical_bounds(hs, 0.0, 1.0, 4, 2, 0.015)
        assert rep.intermediates["m_i_clamped"] == (1.0,)
        assert rep.intermediates["delta_prime_i"] == (0.0,)

    def test_nan_recovery_constant_flags(self):
        fleet = AppliancePowerVector([6.0, 6.0, 1.0, 1.0])
        hs = decompose(fleet, 0.1, u_max=1)
        rep = hierarchical_bounds(hs, 0.1, 1.0, 5, 1, math.nan)
        assert math.isnan(rep.lower) and math.isnan(rep.clamped_lower)
        # the first group's ceiling does not involve the constant
        assert math.isfinite(rep.intermediates["M_i"][0])

    def test_per_group_constants(self):
        fleet = AppliancePowerVector([6.0, 6.0, 1.0, 1.0])
        hs = decompose(fleet, 0.1, u_max=1)
        rep = hierarchical_bounds(hs, 0.1, 1.0, 5, 1, [0.015, 0.3])
        assert rep.intermediates["C_i"] == (0.015, 0.3)
        with pytest.raises(ValueError):
            hierarchical_bounds(hs, 0.1, 1.0, 5, 1, [0.015])
