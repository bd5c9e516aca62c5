"""
Tests for histotest.tester.
"""

import itertools

import numpy as np
import pytest

from histotest import tester
from histotest.config import TesterConfig
from histotest.dist_core import Interval, Measure, Pmf, PmfSampler, RngStream, TallySampler, mix_with_uniform
from histotest.instances import certified_tv_lower_bound, random_khistogram, zigzag, zigzag_blocks
from histotest.interval_estimator import FlatMeasure
from histotest.partition import IntervalPartition


def _uniform(n):
    return Pmf(np.full(n, 1.0 / n))


def _brute_force_distance(values, k):
    """Minimum L1 cost over every split into at most k consecutive pieces."""
    n = len(values)
    best = np.inf
    for pieces in range(1, k + 1):
        for cuts in itertools.combinations(range(1, n), pieces - 1):
            bounds = (0,) + cuts + (n,)
            cost = 0.0
            for lo, hi in zip(bounds[:-1], bounds[1:]):
                block = values[lo:hi]
                cost += float(np.sum(np.abs(block - np.median(block))))
            best = min(best, cost)
    return best


class TestDpDistance:
    """Tests for dp_distance_to_khistogram."""

    def test_constant_measure(self):
        assert tester.dp_distance_to_khistogram(Measure([0.25] * 4), 1) == 0.0

    def test_two_levels_one_piece(self):
        assert tester.dp_distance_to_khistogram(Measure([0.6, 0.4]), 1) == pytest.approx(0.2)

    def test_enough_pieces(self):
        assert tester.dp_distance_to_khistogram(Measure([0.1, 0.5, 0.1, 0.3]), 4) == 0.0

    def test_invalid_k(self):
        with pytest.raises(ValueError):
            tester.dp_distance_to_khistogram(Measure([1.0]), 0)

    def test_matches_brute_force(self):
        """Run compression and median levels agree with exhaustive search."""
        rng = np.random.default_rng(17)
        for _ in range(300):
            n = int(rng.integers(1, 9))
            values = rng.integers(0, 4, size=n) / 4.0
            k = int(rng.integers(1, 4))
            got = tester.dp_distance_to_khistogram(Measure(values), k)
            assert got == pytest.approx(_brute_force_distance(values, k), abs=1e-9)

    def test_zigzag_distance(self):
        """Alternating blocks of 2/n and 0 with one piece cost half the mass."""
        mass = np.tile([2.0, 2.0, 0.0, 0.0], 4) / 16.0
        assert tester.dp_distance_to_khistogram(Measure(mass), 1) == pytest.approx(1.0)


class TestIdentityTest:
    """Tests for the tolerant identity test."""

    def test_identical_accepts(self):
        p = _uniform(50)
        accepted = sum(
            tester.tolerant_identity_test(PmfSampler(p), p, 0.5, RngStream(t)) is tester.Verdict.ACCEPT
            for t in range(30)
        )
        assert accepted >= 27

    def test_far_rejects(self):
        """TV 0.4 from the reference is rejected at eps = 0.2."""
        p = Pmf(np.r_[np.full(25, 1.8 / 50), np.full(25, 0.2 / 50)])
        rejected = sum(
            tester.tolerant_identity_test(PmfSampler(p), _uniform(50), 0.2, RngStream(t)) is tester.Verdict.REJECT
            for t in range(10)
        )
        assert rejected >= 9

    def test_empty_support_accepts_without_sampling(self):
        tally = TallySampler(PmfSampler(_uniform(10)))
        outcome = tester.run_identity_test(tally, Measure(np.zeros(10)), 0.5, RngStream(0))
        assert outcome.verdict is tester.Verdict.ACCEPT
        assert outcome.support_size == 0
        assert tally.total == 0

    def test_repetitions_and_threshold(self):
        config = TesterConfig(test_repetitions=5)
        p = _uniform(20)
        outcome = tester.run_identity_test(PmfSampler(p), p, 0.5, RngStream(1), config)
        assert len(outcome.statistics) == 5
        assert outcome.threshold == pytest.approx(config.test_threshold * tester.identity_test_size(20, 0.5, config) * 0.25)

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            tester.run_identity_test(PmfSampler(_uniform(4)), Measure(np.ones(5)), 0.5, RngStream(0))


class TestStitchedMeasure:
    """Tests for StitchedMeasure."""

    def test_residual_is_zero(self):
        partition = IntervalPartition((Interval(1, 2), Interval(3, 4)))
        learned = FlatMeasure(partition=partition, levels=np.array([0.3, 0.2]), n=4)
        stitched = tester.StitchedMeasure(n=4, regions=(((Interval(1, 2),), learned),), residual=(Interval(3, 4),))
        assert stitched.covers()
        assert stitched.to_measure().mass.tolist() == pytest.approx([0.3, 0.3, 0.0, 0.0])

    def test_gap_does_not_cover(self):
        partition = IntervalPartition((Interval(1, 4),))
        learned = FlatMeasure(partition=partition, levels=np.array([0.25]), n=4)
        stitched = tester.StitchedMeasure(n=4, regions=(((Interval(1, 2),), learned),))
        assert not stitched.covers()


class TestTestHistogram:
    """Tests for test_histogram on small domains."""

    def test_invalid_parameters(self):
        sampler = PmfSampler(_uniform(8))
        with pytest.raises(ValueError):
            tester.test_histogram(sampler, 8, 0, 0.5, RngStream(0))
        with pytest.raises(ValueError):
            tester.test_histogram(sampler, 8, 9, 0.5, RngStream(0))
        with pytest.raises(ValueError):
            tester.test_histogram(sampler, 8, 1, 1.0, RngStream(0))
        with pytest.raises(ValueError):
            tester.test_histogram(sampler, 9, 1, 0.5, RngStream(0))

    def test_uniform_accepts(self):
        verdict = tester.test_histogram(PmfSampler(_uniform(8)), 8, 1, 0.5, RngStream(1))
        assert verdict.accepted
        assert verdict.reason == tester.REASON_ACCEPTED
        assert verdict.r_history[-1] <= 0.25 / 8.0
        assert verdict.identity is not None
        assert verdict.bad_history[0] == (Interval(1, 8),)
        assert len(verdict.bad_history) == verdict.iterations + 1

    def test_sample_accounting(self):
        """Per-phase tallies sum to the total and every phase ran."""
        verdict = tester.test_histogram(PmfSampler(_uniform(8)), 8, 1, 0.5, RngStream(2))
        assert set(verdict.samples) == set(tester.PHASES)
        assert sum(verdict.samples.values()) == verdict.samples_total
        assert verdict.samples['divide'] > 0
        assert verdict.samples['sieve'] > 0
        assert verdict.samples['test'] > 0

    def test_zigzag_rejects(self):
        """Alternating pairs are far from every 1-histogram."""
        p = Pmf(np.tile([2.0, 2.0, 0.0, 0.0], 2) / 8.0)
        verdict = tester.test_histogram(PmfSampler(p), 8, 1, 0.5, RngStream(3))
        assert not verdict.accepted
        assert verdict.reason == tester.REASON_DP
        assert verdict.samples['test'] == 0

    def test_deterministic(self):
        a = tester.test_histogram(PmfSampler(_uniform(8)), 8, 1, 0.5, RngStream(4))
        b = tester.test_histogram(PmfSampler(_uniform(8)), 8, 1, 0.5, RngStream(4))
        assert a.verdict is b.verdict
        assert a.samples == b.samples
        assert a.dp_distance == b.dp_distance

    def test_non_convergence(self):
        """With no iterations allowed the tester rejects."""
        config = TesterConfig(max_iteration_factor=0)
        verdict = tester.test_histogram(PmfSampler(_uniform(8)), 8, 1, 0.5, RngStream(5), config)
        assert verdict.reason == tester.REASON_NON_CONVERGENCE
        assert verdict.samples_total == 0

    @pytest.mark.slow
    def test_acceptance_rates(self):
        """A 2-histogram is accepted and a zigzag rejected in at least 2/3 of runs."""
        k_hist = Pmf(np.r_[np.full(8, 1.5 / 16), np.full(8, 0.5 / 16)])
        far = Pmf(np.tile([2.0, 0.0], 8) / 16.0)
        accepted = sum(tester.test_histogram(PmfSampler(k_hist), 16, 2, 0.5, RngStream(t)).accepted for t in range(15))
        rejected = sum(not tester.test_histogram(PmfSampler(far), 16, 2, 0.5, RngStream(t)).accepted for t in range(15))
        assert accepted >= 10
        assert rejected >= 10


@pytest.mark.slow
class TestAcceptanceAtScale:
    """Verdict rates, sample accounting and bad-mass halving on n=1000, eps=0.25."""

    N = 1000
    EPS = 0.25
    TRIALS = 60
    # 2/3 - 0.1 of the trials
    REQUIRED = 34

    @staticmethod
    def _check_accounting(verdict):
        assert set(verdict.samples) == set(tester.PHASES)
        assert sum(verdict.samples.values()) == verdict.samples_total

    @pytest.mark.parametrize("k", [1, 5])
    def test_khistograms_accepted(self, k):
        accepted = 0
        halving = 0
        for trial in range(self.TRIALS):
            p = random_khistogram(self.N, k, RngStream(1000 + trial))
            verdict = tester.test_histogram(PmfSampler(p), self.N, k, self.EPS, RngStream(trial))
            self._check_accounting(verdict)
            accepted += verdict.accepted
            mixed = mix_with_uniform(p)
            masses = [sum(mixed.interval_mass(cell) for cell in bad) for bad in verdict.bad_history]
            halving += all(after <= before / 2.0 for before, after in zip(masses, masses[1:]))
        assert accepted >= self.REQUIRED
        assert halving >= 0.9 * self.TRIALS

    @pytest.mark.parametrize("k", [1, 5])
    def test_far_zigzags_rejected(self, k):
        p = zigzag(self.N, zigzag_blocks(k, self.EPS, self.N))
        assert certified_tv_lower_bound(p, k) >= self.EPS
        rejected = 0
        for trial in range(self.TRIALS):
            verdict = tester.test_histogram(PmfSampler(p), self.N, k, self.EPS, RngStream(trial))
            self._check_accounting(verdict)
            rejected += not verdict.accepted
        assert rejected >= self.REQUIRED


class TestSampleBound:
    """Tests for theorem_sample_bound."""

    def test_terms(self):
        bound = tester.theorem_sample_bound(100, 4, 0.5)
        assert bound.sqrt_nk_over_eps == pytest.approx(40.0)
        assert bound.k_over_eps2 == pytest.approx(16.0)
        assert bound.sqrt_n_over_eps2 == pytest.approx(40.0)
        assert bound.total == pytest.approx(96.0)

    def test_dominant(self):
        assert tester.theorem_sample_bound(1000, 1, 0.25).dominant == 'sqrt_n_over_eps2'
        assert tester.theorem_sample_bound(100, 100, 0.5).dominant == 'k_over_eps2'

    def test_invalid(self):
        with pytest.raises(ValueError):
            tester.theorem_sample_bound(10, 1, 0.0)
