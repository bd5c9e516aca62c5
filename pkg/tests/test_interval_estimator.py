"""
Tests for histotest.interval_estimator.
"""

import numpy as np
import pytest

from histotest.checks import check_estimator_bounds, check_flattening_bounds
from histotest.dist_core import (
    Interval,
    Measure,
    Pmf,
    PmfSampler,
    RngStream,
    SampleSet,
    TallySampler,
    mix_with_uniform,
    sample,
)
from histotest.interval_estimator import (
    batch_count,
    build_interval_estimator,
    draw_empirical_learning,
    draw_interval_estimator,
    empirical_learning,
    estimate,
    lower_median,
)
from histotest.partition import IntervalPartition


def _uniform(n):
    return Pmf(np.full(n, 1.0 / n))


class TestHelpers:
    """Tests for batch_count and lower_median."""

    def test_batch_count(self):
        assert batch_count(10, 0.1) == 28

    def test_lower_median_even(self):
        assert lower_median(np.array([4, 1, 3, 2])) == 2

    def test_lower_median_axis(self):
        values = np.array([[1, 9], [5, 5], [3, 7]])
        assert lower_median(values, axis=0).tolist() == [3, 7]


class TestIntervalEstimator:
    """Tests for build_interval_estimator and estimate."""

    def test_whole_domain_is_one(self):
        """Every batch sees all its draws on [1, n]."""
        samples = sample(_uniform(10), 2000, RngStream(1))
        est = build_interval_estimator(samples, 10, 0.1)
        assert estimate(est, Interval(1, 10)) == pytest.approx(1.0)

    def test_floor_on_zero_mass(self):
        """An interval that is never hit is estimated at |I|/(2n)."""
        p = Pmf([0.125, 0.125, 0.0, 0.0, 0.125, 0.125, 0.125, 0.125, 0.125, 0.125])
        est = build_interval_estimator(sample(p, 3000, RngStream(2)), 10, 0.1)
        assert estimate(est, Interval(3, 4)) == pytest.approx(0.1)

    def test_too_few_samples(self):
        samples = sample(_uniform(10), 5, RngStream(0))
        with pytest.raises(ValueError, match="batches"):
            build_interval_estimator(samples, 10, 0.1)

    def test_leftovers_discarded(self):
        samples = SampleSet(np.ones(61, dtype=np.int64), 2)
        est = build_interval_estimator(samples, 2, 0.5)
        assert est.counts.T == batch_count(2, 0.5)
        assert est.b == 61 // est.counts.T

    def test_monotone_under_inclusion(self):
        samples = sample(mix_with_uniform(_uniform(50)), 5000, RngStream(3))
        est = build_interval_estimator(samples, 50, 0.1)
        inner = estimate(est, Interval(10, 20))
        outer = estimate(est, Interval(5, 30))
        assert outer >= inner

    def test_deterministic(self):
        samples = sample(_uniform(20), 1000, RngStream(4))
        est = build_interval_estimator(samples, 20, 0.1)
        assert estimate(est, Interval(3, 9)) == estimate(est, Interval(3, 9))

    def test_prefix_totals(self):
        samples = sample(_uniform(20), 1000, RngStream(5))
        est = build_interval_estimator(samples, 20, 0.1)
        assert np.all(est.counts.prefix[:, -1] == est.b)

    def test_simultaneous_bounds(self):
        """The deviation and ratio bounds hold on every interval at once."""
        n = 128
        p = mix_with_uniform(Measure(RngStream(6).random(n)).normalized())
        for trial in range(3):
            est = draw_interval_estimator(PmfSampler(p), 200000, 0.01, RngStream(100 + trial))
            passed, errors, _ = check_estimator_bounds(p, est)
            assert passed, errors

    @pytest.mark.slow
    def test_simultaneous_bounds_failure_rate(self):
        """With b = 10^4 the simultaneous bounds hold in 98% of 200 reruns over five distributions."""
        n = 256
        delta = 0.01
        m = batch_count(n, delta) * 10000
        failures = 0
        for index in range(5):
            p = mix_with_uniform(Measure(RngStream(7 + index).random(n)).normalized())
            for trial in range(40):
                est = draw_interval_estimator(PmfSampler(p), m, delta, RngStream(100 * index + trial))
                failures += not check_estimator_bounds(p, est)[0]
        assert failures <= 4


class TestStreamingEstimator:
    """Tests for draw_interval_estimator."""

    def test_draws_exactly_m(self):
        tally = TallySampler(PmfSampler(_uniform(16)))
        est = draw_interval_estimator(tally, 1003, 0.1, RngStream(0))
        assert tally.total == 1003
        assert est.counts.T == batch_count(16, 0.1)

    def test_matches_batch_layout(self):
        """Streaming batch t holds the t-th block of counts drawn from the stream."""
        sampler = PmfSampler(_uniform(16))
        T = batch_count(16, 0.1)
        streamed = draw_interval_estimator(sampler, T * 50, 0.1, RngStream(9))
        rng = RngStream(9)
        blocks = [sampler.draw_counts(50, rng) for _ in range(T)]
        assert np.array_equal(streamed.counts.prefix[:, 1:], np.cumsum(blocks, axis=1))
        assert streamed.b == 50

    def test_median_per_interval(self):
        """For a fixed interval the median batch count is close to p(I) in 1 - delta of reruns."""
        n = 64
        delta = 0.05
        p = mix_with_uniform(Measure(RngStream(21).random(n)).normalized())
        true = p.interval_mass(Interval(5, 20))
        T = batch_count(n, delta)
        b = 1000
        good = 0
        for trial in range(200):
            est = draw_interval_estimator(PmfSampler(p), T * b, delta, RngStream(trial))
            x = float(est.median_counts(np.array([5]), np.array([20]))[0]) / b
            good += abs(x - true) <= 3.0 * np.sqrt(true / b) and x <= 3.0 * true
        assert good >= 200 * (1 - delta)


class TestEmpiricalLearning:
    """Tests for empirical_learning."""

    def test_levels_constant_per_cell(self):
        partition = IntervalPartition((Interval(1, 4), Interval(5, 10)))
        samples = sample(_uniform(10), 3000, RngStream(1))
        learned = empirical_learning(samples, partition, 0.1)
        dense = learned.to_measure().mass
        assert np.all(dense[:4] == dense[0])
        assert np.all(dense[4:] == dense[4])
        assert learned.cell_mass(0) == pytest.approx(0.4, abs=0.05)

    def test_unseen_cell_floor(self):
        """A cell with no samples gets level 1/(2n)."""
        p = Pmf([0.5, 0.5, 0.0, 0.0])
        partition = IntervalPartition((Interval(1, 2), Interval(3, 4)))
        learned = empirical_learning(sample(p, 500, RngStream(2)), partition, 0.1)
        assert learned.levels[1] == pytest.approx(1.0 / 8.0)

    def test_partition_must_cover(self):
        partition = IntervalPartition((Interval(1, 4),))
        with pytest.raises(ValueError, match="cover"):
            empirical_learning(sample(_uniform(10), 500, RngStream(0)), partition, 0.1)

    def test_flattening_bounds(self):
        """On cells where p is constant the learned sub-interval masses are close."""
        p = mix_with_uniform(Pmf(np.r_[np.full(32, 1.5 / 64), np.full(32, 0.5 / 64)]))
        partition = IntervalPartition((Interval(1, 16), Interval(17, 32), Interval(33, 64)))
        m = 100000
        learned = draw_empirical_learning(PmfSampler(p), partition, m, 0.05, RngStream(3))
        b = m // batch_count(64, 0.05)
        passed, errors, _ = check_flattening_bounds(p, learned, b)
        assert passed, errors
