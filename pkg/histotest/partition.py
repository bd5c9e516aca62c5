"""
Equitable domain partitioning.

approx_divide splits [n] greedily into intervals of small empirical mass,
leaving heavy elements as singletons. approx_sub_divide refines a set of
disjoint intervals by running approx_divide on the distribution restricted
to their union, sampled by rejection from the full distribution.
"""

import logging
import math
from dataclasses import dataclass
from typing import Iterable, Iterator, List, Optional, Sequence, Tuple

import numpy as np

from .config import DEFAULT_CONFIG, TesterConfig
from .dist_core import Interval, RngStream, SampleSet, Sampler

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class IntervalPartition:
    """Ordered disjoint intervals; the union is a sub-domain of [n]."""
    intervals: Tuple[Interval, ...]

    def __post_init__(self):
        ordered = tuple(self.intervals)
        for left, right in zip(ordered, ordered[1:]):
            if right.lo <= left.hi:
                raise ValueError(f"Intervals {left} and {right} overlap or are out of order")
        object.__setattr__(self, 'intervals', ordered)

    @classmethod
    def from_cells(cls, cells: Iterable[Interval]) -> 'IntervalPartition':
        """Build from cells in any order."""
        return cls(tuple(sorted(cells, key=lambda cell: cell.lo)))

    def __len__(self) -> int:
        return len(self.intervals)

    def __iter__(self) -> Iterator[Interval]:
        return iter(self.intervals)

    def __getitem__(self, index: int) -> Interval:
        return self.intervals[index]

    @property
    def size(self) -> int:
        return len(self.intervals)

    @property
    def union_length(self) -> int:
        return sum(cell.length for cell in self.intervals)

    def merge(self, other: 'IntervalPartition') -> 'IntervalPartition':
        """Union of two partitions with disjoint cells."""
        return IntervalPartition.from_cells(self.intervals + other.intervals)

    def covers(self, n: int) -> bool:
        """True if the cells are consecutive and exactly cover [1, n]."""
        if not self.intervals:
            return False
        if self.intervals[0].lo != 1 or self.intervals[-1].hi != n:
            return False
        return all(right.lo == left.hi + 1 for left, right in zip(self.intervals, self.intervals[1:]))

    def require_cover(self, n: int) -> None:
        if not self.covers(n):
            raise ValueError(f"Partition does not cover [1, {n}]")

    def bounds(self) -> Tuple[np.ndarray, np.ndarray]:
        """(lo, hi) arrays of the cells, 1-based."""
        lo = np.fromiter((cell.lo for cell in self.intervals), dtype=np.int64, count=len(self))
        hi = np.fromiter((cell.hi for cell in self.intervals), dtype=np.int64, count=len(self))
        return lo, hi

    def mask(self, n: int) -> np.ndarray:
        """Boolean mask over [n] of the union of the cells."""
        selected = np.zeros(n, dtype=bool)
        for cell in self.intervals:
            selected[cell.lo - 1:cell.hi] = True
        return selected


def divide_sample_count(B: int, delta: float, constant: float = DEFAULT_CONFIG.c_divide) -> int:
    """Samples needed by approx_divide: ceil(c * B * ln(12B / delta))."""
    return int(math.ceil(constant * B * math.log(12.0 * B / delta)))


def _greedy_runs(counts: np.ndarray, m: int, B: int) -> List[Tuple[int, int]]:
    """
    Greedy partition of positions 0..len(counts)-1 into 0-based runs.

    Elements with empirical mass > 1/(2B) become singletons; every other run
    grows left to right while its empirical mass stays < 3/(2B). Comparisons
    are done on integer counts: mass > 1/(2B) <=> 2B*c > m.
    """
    size = len(counts)
    heavy = 2 * B * counts > m
    runs: List[Tuple[int, int]] = []
    start: Optional[int] = None
    acc = 0
    for t in range(size):
        if heavy[t]:
            if start is not None:
                runs.append((start, t - 1))
                start = None
            runs.append((t, t))
            continue
        c = int(counts[t])
        if start is None:
            start, acc = t, c
        elif 2 * B * (acc + c) < 3 * m:
            acc += c
        else:
            runs.append((start, t - 1))
            start, acc = t, c
    if start is not None:
        runs.append((start, size - 1))
    return runs


def approx_divide(samples: SampleSet, n: int, B: int) -> IntervalPartition:
    """
    Partition [n] into at most 8B intervals from empirical masses.

    Args:
        samples: i.i.d. samples of the target distribution on [n]
        n: Domain size
        B: Granularity parameter, B > 1

    Returns:
        Partition of [n]; elements with empirical mass > 1/(2B) are singletons

    Raises:
        ValueError: if B <= 1 or samples live on a different domain
    """
    if B <= 1:
        raise ValueError(f"B must be greater than 1, got {B}")
    if samples.n != n:
        raise ValueError(f"Samples are on [1, {samples.n}], expected [1, {n}]")
    runs = _greedy_runs(samples.counts(), len(samples), B)
    partition = IntervalPartition(tuple(Interval(lo + 1, hi + 1) for lo, hi in runs))
    logger.debug("approx_divide: %d samples, B=%d -> %d intervals", len(samples), B, len(partition))
    return partition


def _rejection_counts(
    sampler: Sampler,
    position_of: np.ndarray,
    target: int,
    mass_floor: float,
    budget: int,
    rng: RngStream
) -> np.ndarray:
    """
    Draw from the sampler until target draws land inside the interval set.

    Returns per-position counts of exactly target accepted draws. The surplus
    of the last chunk is removed as a uniformly random sub-multiset, which has
    the law of keeping the first target accepted draws.
    """
    inside = position_of >= 0
    positions = position_of[inside]
    accepted = np.zeros(positions.size, dtype=np.int64)
    kept = 0
    raw = 0
    while kept < target:
        rate = kept / raw if raw else 1.0
        rate = max(rate, mass_floor)
        chunk = int(math.ceil((target - kept) / rate * 1.1)) + 16
        chunk = min(chunk, budget - raw)
        if chunk <= 0:
            raise RuntimeError(
                f"interval set mass too small: {kept} of {target} samples accepted "
                f"after {raw} draws"
            )
        accepted += sampler.draw_counts(chunk, rng)[inside]
        kept = int(accepted.sum())
        raw += chunk
    logger.debug("Rejection sampling accepted %d of %d draws", kept, raw)
    if kept > target:
        accepted = rng.hypergeometric(accepted, target)
    counts = np.zeros(positions.size, dtype=np.int64)
    counts[positions] = accepted
    return counts


def approx_sub_divide(
    p_sampler: Sampler,
    intervals: Sequence[Interval],
    B: int,
    delta: float,
    rng: RngStream,
    config: TesterConfig = DEFAULT_CONFIG,
    mass_floor: Optional[float] = None
) -> List[IntervalPartition]:
    """
    Refine each of a set of disjoint intervals.

    Args:
        p_sampler: Sample access to the distribution on [n]
        intervals: Disjoint intervals I_1..I_q, concatenated in the given order
        B: Granularity parameter, B > 1
        delta: Failure probability
        rng: Random stream
        config: Calibrated constants
        mass_floor: Lower bound on the mass of the union, used to cap the
            rejection-sampling budget (default |union|/(2n), valid once the
            target has been mixed with the uniform distribution)

    Returns:
        One partition per input interval, in input order

    Raises:
        ValueError: if B <= 1 or intervals overlap
        RuntimeError: if rejection sampling exceeds its budget
    """
    if B <= 1:
        raise ValueError(f"B must be greater than 1, got {B}")
    if not intervals:
        return []
    n = p_sampler.n
    union = IntervalPartition.from_cells(intervals)
    for cell in intervals:
        cell.check_within(n)

    position_of = np.full(n, -1, dtype=np.int64)
    starts = []
    offset = 0
    for cell in intervals:
        position_of[cell.lo - 1:cell.hi] = np.arange(offset, offset + cell.length)
        starts.append(offset)
        offset += cell.length
    total_length = union.union_length

    target = divide_sample_count(B, delta, config.c_divide)
    floor = mass_floor if mass_floor is not None else total_length / (2.0 * n)
    budget = int(math.ceil(config.subdivide_budget * target / floor))
    counts = _rejection_counts(p_sampler, position_of, target, floor, budget, rng)
    runs = _greedy_runs(counts, target, B)
    cuts = np.zeros(total_length, dtype=bool)
    for _, hi in runs:
        cuts[hi] = True

    partitions = []
    for cell, start in zip(intervals, starts):
        cells = []
        lo = cell.lo
        local_cuts = np.flatnonzero(cuts[start:start + cell.length - 1])
        for local in local_cuts:
            cells.append(Interval(lo, cell.lo + int(local)))
            lo = cell.lo + int(local) + 1
        cells.append(Interval(lo, cell.hi))
        partitions.append(IntervalPartition(tuple(cells)))
    logger.debug(
        "approx_sub_divide: %d intervals -> %d cells (B=%d)",
        len(intervals), sum(len(part) for part in partitions), B
    )
    return partitions
