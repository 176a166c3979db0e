"""Estimation helpers: Wilson interval, median CI, slope fits, Poisson GOF."""
import math

import numpy as np
import pytest
from scipy import stats

from regenlab.stats import (bootstrap_slope_ci, loglog_slope, median_ci,
                            poisson_gof_pvalue, wilson_interval)


class TestWilson:
    def test_matches_textbook_formula(self):
        z = float(stats.norm.ppf(0.975))
        for successes, trials in ((3, 100), (50, 100), (977, 1000)):
            lo, hi = wilson_interval(successes, trials)
            p_hat = successes / trials
            denom = 1 + z ** 2 / trials
            center = (p_hat + z ** 2 / (2 * trials)) / denom
            half = z * math.sqrt(p_hat * (1 - p_hat) / trials
                                 + z ** 2 / (4 * trials ** 2)) / denom
            assert lo == pytest.approx(center - half, rel=1e-12)
            assert hi == pytest.approx(center + half, rel=1e-12)

    def test_zero_successes_lower_endpoint(self):
        lo, hi = wilson_interval(0, 500)
        assert lo == 0.0
        assert 0 < hi < 0.02

    def test_all_successes_upper_endpoint(self):
        lo, hi = wilson_interval(500, 500)
        assert hi == 1.0
        assert 0.98 < lo < 1.0

    def test_interval_contains_point_estimate(self):
        lo, hi = wilson_interval(7, 40)
        assert lo < 7 / 40 < hi

    def test_rejects_bad_counts(self):
        with pytest.raises(ValueError):
            wilson_interval(-1, 10)
        with pytest.raises(ValueError):
            wilson_interval(11, 10)


class TestMedianCi:
    def test_brackets_sample_median(self):
        rng = np.random.default_rng(0)
        samples = rng.standard_normal(199)
        est = median_ci(samples)
        assert est.ci_low <= est.median <= est.ci_high
        assert est.median == np.median(samples)
        assert est.n == 199

    def test_narrows_with_sample_size(self):
        rng = np.random.default_rng(1)
        small = median_ci(rng.standard_normal(50))
        large = median_ci(rng.standard_normal(5000))
        assert (large.ci_high - large.ci_low) < (small.ci_high - small.ci_low)

    def test_tiny_samples_fall_back_to_range(self):
        est = median_ci(np.array([3.0, 1.0, 2.0]))
        assert est.ci_low == 1.0 and est.ci_high == 3.0

    def test_order_statistic_coverage(self):
        # distribution-free CI: ~95% of repetitions should cover the true
        # median of an exponential (log 2); generous slack at 200 trials
        rng = np.random.default_rng(2)
        true_median = math.log(2.0)
        hits = 0
        for _ in range(200):
            est = median_ci(rng.exponential(size=99))
            hits += est.ci_low <= true_median <= est.ci_high
        assert hits >= 180


class TestSlopes:
    def test_exact_power_law(self):
        t = np.array([8.0, 16.0, 64.0, 256.0, 1024.0])
        y = 3.0 * t ** 0.42
        slope, intercept = loglog_slope(t, y)
        assert slope == pytest.approx(0.42, abs=1e-12)
        assert intercept == pytest.approx(math.log(3.0), abs=1e-12)

    def test_bootstrap_brackets_true_slope(self):
        rng = np.random.default_rng(3)
        t_values = [64.0, 256.0, 1024.0, 4096.0]
        samples = [2.0 * t ** (1 / 3) * rng.lognormal(0, 0.2, size=120)
                   for t in t_values]
        lo, hi = bootstrap_slope_ci(t_values, samples,
                                    np.random.default_rng(4), n_boot=200)
        assert lo < 1 / 3 < hi
        assert hi - lo < 0.2

    def test_bootstrap_deterministic_given_generator(self):
        rng = np.random.default_rng(5)
        t_values = [64.0, 256.0, 1024.0]
        samples = [t ** 0.4 * rng.lognormal(0, 0.3, size=60)
                   for t in t_values]
        a = bootstrap_slope_ci(t_values, samples, np.random.default_rng(6),
                               n_boot=100)
        b = bootstrap_slope_ci(t_values, samples, np.random.default_rng(6),
                               n_boot=100)
        assert a == b


class TestPoissonGof:
    def test_accepts_true_rate(self):
        counts = np.random.default_rng(7).poisson(3.0, size=20_000)
        assert poisson_gof_pvalue(counts, 3.0) > 0.01

    def test_rejects_wrong_rate(self):
        counts = np.random.default_rng(8).poisson(3.0, size=5000)
        assert poisson_gof_pvalue(counts, 6.0) < 1e-6

    def test_small_rate_pooled_bins(self):
        counts = np.random.default_rng(9).poisson(0.05, size=10_000)
        p = poisson_gof_pvalue(counts, 0.05)
        assert 0.0 <= p <= 1.0

    def test_detects_overdispersion(self):
        rng = np.random.default_rng(10)
        mixed = np.concatenate([rng.poisson(1.0, 5000),
                                rng.poisson(9.0, 5000)])
        assert poisson_gof_pvalue(mixed, 5.0) < 1e-6
