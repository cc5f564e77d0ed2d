import math

import numpy as np
import pytest

from dpnilm.mechanisms import (
    NoiseSample,
    StaircaseDraw,
    inject_noise,
    laplace_noise,
    laplace_pdf,
    laplace_sample,
    sensitivity,
    staircase_gamma,
    staircase_noise,
    staircase_sample,
    staircase_value,
)
from dpnilm.model import DpConfig, Mechanism, MeterSeries
from dpnilm.rng import stream

from oracles import dp_ratio_ok


class TestSensitivity:
    def test_constant_gap(self):
        assert sensitivity([(0.0, 1.0), (0.0, 1.0)]) == (1.0, 2.0)

    def test_degenerate_point_bounds(self):
        assert sensitivity([(0.0, 0.0)]) == (0.0, 0.0)

    def test_household_bounds_give_budget_two(self):
        # per-slot envelopes whose widest gap is 1 W, the configuration used
        # for the eight-appliance household studies
        bounds = [(y - 0.5, y + 0.5) for y in (230.0, 310.0, 158.0, 404.0)]
        delta_f, delta = sensitivity(bounds)
        assert delta_f == 1.0 and delta == 2.0

    def test_errors(self):
        with pytest.raises(ValueError):
            sensitivity([])
        with pytest.raises(ValueError):
            sensitivity([(1.0, 0.0)])


class TestLaplacePdf:
    def test_peak(self):
        assert laplace_pdf(0.0, 1.0) == 0.5

    def test_at_one_scale(self):
        # independent evaluation: exp(-1)/4
        assert laplace_pdf(2.0, 2.0) == pytest.approx(0.09196986029286058, rel=1e-12)

    def test_even(self, rng):
        for s in rng.normal(0, 3, size=100):
            assert laplace_pdf(-s, 1.7) == laplace_pdf(s, 1.7)

    def test_scale_validation(self):
        with pytest.raises(ValueError):
            laplace_pdf(0.0, 0.0)


class TestLaplaceSampler:
    def test_deterministic_in_seed_and_draw(self):
        dp = DpConfig(0.5, 1.0, Mechanism.LAPLACE, seed=9)
        a = laplace_sample(dp, draw=3)
        b = laplace_sample(dp, draw=3)
        c = laplace_sample(dp, draw=4)
        assert a.value == b.value and a.value != c.value
        assert a.mechanism is Mechanism.LAPLACE and a.draw == 3

    def test_epsilon_validation(self):
        dp = DpConfig(0.0, 1.0, Mechanism.NONE)
        with pytest.raises(ValueError):
            laplace_sample(dp)

    def test_mean_absolute_value(self):
        # E|n| = lambda; Var|n| = lambda^2
        dp = DpConfig(1.0, 1.0, Mechanism.LAPLACE)
        draws = laplace_noise(dp, stream(101), 100_000)
        sigma = 1.0 / math.sqrt(draws.size)
        assert abs(np.abs(draws).mean() - 1.0) < 3 * sigma

    def test_variance(self):
        # Var(n) = 2 lambda^2; Var(n^2) = E n^4 - (E n^2)^2 = 24l^4 - 4l^4
        dp = DpConfig(0.5, 1.0, Mechanism.LAPLACE)
        lam = 2.0
        draws = laplace_noise(dp, stream(102), 100_000)
        sigma = math.sqrt(20.0 * lam**4 / draws.size)
        assert abs(draws.var() - 2.0 * lam**2) < 3 * sigma

    def test_paired_difference_statistic(self):
        # E|n_t - n_{t-1}| = 3*lambda/2 = 3*delta/(4*eps); Var = 1.75 lambda^2
        for delta, eps, seed in [(2.0, 0.5, 7), (2.0, 1.0, 8), (20.0, 2.0, 9)]:
            dp = DpConfig(eps, delta / 2.0, Mechanism.LAPLACE)
            lam = dp.delta_f / eps
            draws = laplace_noise(dp, stream(seed), 200_000)
            pairs = draws[1::2] - draws[0::2]
            sigma = math.sqrt(1.75 * lam**2 / pairs.size)
            assert abs(np.abs(pairs).mean() - 3.0 * delta / (4.0 * eps)) < 3 * sigma


class TestStaircase:
    def test_gamma_validation_and_limit(self):
        assert staircase_gamma(1e-12) == pytest.approx(0.5, abs=1e-9)
        dp = DpConfig(1.0, 1.0, Mechanism.STAIRCASE, seed=1)
        sample = staircase_sample(dp)
        assert math.isfinite(sample.value)

    def test_forced_draws(self):
        gam = staircase_gamma(1.0)
        zero = StaircaseDraw(gam, 1, 0, 0.0, 0)
        assert staircase_value(zero, 3.0) == 0.0
        edge = StaircaseDraw(gam, -1, 0, 1.0, 1)
        # -(gamma + (1 - gamma)) * delta_f = -delta_f
        assert staircase_value(edge, 3.0) == pytest.approx(-3.0, rel=1e-12)

    def test_draw_invariants(self):
        with pytest.raises(ValueError):
            StaircaseDraw(0.7, 1, 0, 0.0, 0)
        with pytest.raises(ValueError):
            StaircaseDraw(0.3, 2, 0, 0.0, 0)

    def test_geometric_mass_at_zero(self):
        eps = 1.25
        dp = DpConfig(eps, 1.0, Mechanism.STAIRCASE)
        draws = staircase_noise(dp, stream(55), 100_000)
        # |n| < gamma * delta_f happens iff G = 0, B = 0, so check G=0
        # indirectly through |n| < delta_f (G=0 for either B)
        p0 = 1.0 - math.exp(-eps)
        frac = float((np.abs(draws) < dp.delta_f).mean())
        sigma = math.sqrt(p0 * (1 - p0) / draws.size)
        assert abs(frac - p0) < 3 * sigma

    def test_requires_positive_sensitivity(self):
        dp = DpConfig(1.0, 0.0, Mechanism.STAIRCASE)
        with pytest.raises(ValueError):
            staircase_noise(dp, stream(1), 4)


class TestInjectNoise:
    def test_none_mechanism_identity(self):
        series = MeterSeries([1.0, 2.0, 3.0])
        dp = DpConfig(1.0, 1.0, Mechanism.NONE)
        assert inject_noise(series, dp) is series

    def test_same_seed_same_series(self):
        series = MeterSeries(np.linspace(0, 10, 20))
        dp = DpConfig(0.7, 1.0, Mechanism.LAPLACE, seed=42)
        a = inject_noise(series, dp)
        b = inject_noise(series, dp)
        np.testing.assert_array_equal(a.readings, b.readings)
        np.testing.assert_array_equal(a.noise, b.noise)

    def test_noise_recorded_and_bounds_dropped(self):
        series = MeterSeries([5.0, 6.0], bounds=[(0.0, 10.0), (0.0, 10.0)])
        dp = DpConfig(1.0, 1.0, Mechanism.STAIRCASE, seed=4)
        noisy = inject_noise(series, dp)
        assert noisy.bounds is None
        np.testing.assert_allclose(noisy.readings - series.readings, noisy.noise)

    def test_huge_epsilon_is_negligible(self):
        # P(|n| > 0.01 delta_f) = exp(-0.01 * 1e6) per draw: never at 1e3 draws
        series = MeterSeries(np.zeros(1000))
        dp = DpConfig(1e6, 1.0, Mechanism.LAPLACE, seed=0)
        noisy = inject_noise(series, dp)
        assert np.abs(noisy.readings).max() < 0.01 * dp.delta_f

    def test_optional_clamp(self):
        series = MeterSeries(np.zeros(64))
        dp = DpConfig(0.5, 1.0, Mechanism.LAPLACE, seed=1)
        clamped = inject_noise(series, dp, clamp_nonnegative=True)
        assert np.all(clamped.readings >= 0.0)


class TestNoiseSample:
    def test_rejects_nonfinite(self):
        with pytest.raises(ValueError):
            NoiseSample(math.inf, Mechanism.LAPLACE)


@pytest.mark.parametrize("mechanism", [Mechanism.LAPLACE, Mechanism.STAIRCASE])
def test_dp_ratio_smoke(mechanism):
    # small-sample version of the acceptance ratio test
    eps, delta_f = 1.0, 1.0
    dp = DpConfig(eps, delta_f, mechanism)
    noise = laplace_noise if mechanism is Mechanism.LAPLACE else staircase_noise
    s0 = noise(dp, stream(201), 200_000)
    s1 = delta_f + noise(dp, stream(202), 200_000)
    assert dp_ratio_ok(s0, s1, delta_f, eps)


def test_staircase_gamma_formula():
    for eps in (0.1, 0.5, 1.0, 2.0, 8.0):
        assert abs(staircase_gamma(eps) - 1.0 / (1.0 + math.exp(eps / 2.0))) < 1e-12
