"""
Simultaneous interval-mass estimation and flattening.

The estimator splits the samples into T batches and answers any interval
query with the median batch count, floored at |I|/(2n). Batches are stored
as prefix sums so a query costs O(T) instead of materializing all n^2
intervals.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .dist_core import Interval, Measure, RngStream, SampleSet, Sampler
from .partition import IntervalPartition

logger = logging.getLogger(__name__)


def batch_count(n: int, delta: float) -> int:
    """T = ceil(6 ln(n / delta)), at least 1."""
    return max(1, int(math.ceil(6.0 * math.log(n / delta))))


def lower_median(values: np.ndarray, axis: int = 0) -> np.ndarray:
    """Lower middle order statistic along axis."""
    kth = (values.shape[axis] - 1) // 2
    return np.take(np.partition(values, kth, axis=axis), kth, axis=axis)


@dataclass(frozen=True, eq=False)
class BatchedCounts:
    """Per-batch cumulative counts; prefix[t, i] counts batch t draws <= i."""
    prefix: np.ndarray = field(repr=False)
    b: int
    n: int

    @property
    def T(self) -> int:
        return int(self.prefix.shape[0])

    @classmethod
    def from_samples(cls, samples: SampleSet, T: int) -> 'BatchedCounts':
        parts = samples.split(T)
        prefix = np.zeros((T, samples.n + 1), dtype=np.int64)
        for t, part in enumerate(parts):
            prefix[t, 1:] = np.cumsum(part.counts())
        b = len(parts[0])
        prefix.setflags(write=False)
        return cls(prefix=prefix, b=b, n=samples.n)

    @classmethod
    def from_sampler(cls, sampler: Sampler, m: int, T: int, rng: RngStream) -> 'BatchedCounts':
        """Draw counts for m samples batch by batch; the m mod T leftovers are drawn and discarded."""
        b = m // T
        n = sampler.n
        prefix = np.zeros((T, n + 1), dtype=np.int64)
        for t in range(T):
            prefix[t, 1:] = np.cumsum(sampler.draw_counts(b, rng))
        if m - T * b:
            sampler.draw_counts(m - T * b, rng)
        prefix.setflags(write=False)
        return cls(prefix=prefix, b=b, n=n)

    def counts(self, lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
        """T x len(lo) batch counts for the intervals [lo, hi] (1-based)."""
        return self.prefix[:, hi] - self.prefix[:, lo - 1]


class IntervalEstimator:
    """Median-of-batches interval mass map."""

    def __init__(self, counts: BatchedCounts):
        self.counts = counts

    @property
    def n(self) -> int:
        return self.counts.n

    @property
    def b(self) -> int:
        return self.counts.b

    def median_counts(self, lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
        return lower_median(self.counts.counts(lo, hi), axis=0)

    def estimate_many(self, lo: Sequence[int], hi: Sequence[int]) -> np.ndarray:
        """Vectorized estimate over the intervals [lo[j], hi[j]]."""
        lo = np.asarray(lo, dtype=np.int64)
        hi = np.asarray(hi, dtype=np.int64)
        raw = self.median_counts(lo, hi) / self.b
        return np.maximum(raw, (hi - lo + 1) / (2.0 * self.n))

    def estimate(self, interval: Interval) -> float:
        return float(self.estimate_many([interval.lo], [interval.hi])[0])


def build_interval_estimator(samples: SampleSet, n: int, delta: float) -> IntervalEstimator:
    """
    Build the interval-mass estimator.

    Args:
        samples: i.i.d. samples on [n]; |samples| mod T leftovers are discarded
        n: Domain size
        delta: Failure probability, sets T = ceil(6 ln(n/delta)) batches

    Raises:
        ValueError: if fewer than T samples are supplied
    """
    if samples.n != n:
        raise ValueError(f"Samples are on [1, {samples.n}], expected [1, {n}]")
    T = batch_count(n, delta)
    if len(samples) < T:
        raise ValueError(f"Need at least {T} samples for {T} batches, got {len(samples)}")
    counts = BatchedCounts.from_samples(samples, T)
    logger.debug("Interval estimator: T=%d batches of b=%d", T, counts.b)
    return IntervalEstimator(counts)


def estimate(est: IntervalEstimator, I: Interval) -> float:
    """phi_hat(I) = max(median_t count_t(I) / b, |I|/(2n))."""
    return est.estimate(I)


@dataclass(frozen=True, eq=False)
class FlatMeasure:
    """Measure constant on each cell of a partition of [n]."""
    partition: IntervalPartition
    levels: np.ndarray = field(repr=False)
    n: int

    def to_measure(self) -> Measure:
        lo, hi = self.partition.bounds()
        return Measure(np.repeat(self.levels, hi - lo + 1))

    def cell_mass(self, index: int) -> float:
        return float(self.levels[index] * self.partition[index].length)


def empirical_learning(samples: SampleSet, partition: IntervalPartition, delta: float) -> FlatMeasure:
    """
    Flatten the estimated cell masses: level(I_j) = phi_hat(I_j) / |I_j|.

    Raises:
        ValueError: if the partition does not cover the sample domain
    """
    n = samples.n
    partition.require_cover(n)
    est = build_interval_estimator(samples, n, delta)
    lo, hi = partition.bounds()
    levels = est.estimate_many(lo, hi) / (hi - lo + 1)
    levels.setflags(write=False)
    return FlatMeasure(partition=partition, levels=levels, n=n)


def draw_interval_estimator(sampler: Sampler, m: int, delta: float, rng: RngStream) -> IntervalEstimator:
    """Same as build_interval_estimator on m fresh draws, without holding them in memory."""
    T = batch_count(sampler.n, delta)
    if m < T:
        raise ValueError(f"Need at least {T} samples for {T} batches, got {m}")
    return IntervalEstimator(BatchedCounts.from_sampler(sampler, m, T, rng))


def draw_empirical_learning(
    sampler: Sampler,
    partition: IntervalPartition,
    m: int,
    delta: float,
    rng: RngStream
) -> FlatMeasure:
    """Streaming counterpart of empirical_learning."""
    n = sampler.n
    partition.require_cover(n)
    est = draw_interval_estimator(sampler, m, delta, rng)
    lo, hi = partition.bounds()
    levels = est.estimate_many(lo, hi) / (hi - lo + 1)
    levels.setflags(write=False)
    return FlatMeasure(partition=partition, levels=levels, n=n)
