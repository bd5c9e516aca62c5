"""
Learn-and-sieve.

Learns a flattened estimate on one half of the samples, builds an interval
estimator on the other half and flags every cell containing a subinterval
where the two disagree too much.
"""

import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Tuple

import numpy as np

from .config import DEFAULT_CONFIG, TesterConfig
from .dist_core import Interval, Measure, RngStream, Sampler, chi_square_div
from .interval_estimator import (
    FlatMeasure,
    IntervalEstimator,
    batch_count,
    draw_empirical_learning,
    draw_interval_estimator,
    lower_median,
)
from .partition import IntervalPartition

logger = logging.getLogger(__name__)


class SieveVerdict(Enum):
    OK = "ok"
    REJECT = "reject"


@dataclass(frozen=True)
class SieveOutcome:
    """Result of learn_and_sieve; bad_intervals and learned are set when OK."""
    verdict: SieveVerdict
    bad_intervals: Tuple[Interval, ...] = ()
    learned: Optional[FlatMeasure] = None
    samples_used: int = 0


def sieve_sample_count(K: int, n: int, eps: float, delta: float, constant: float) -> int:
    """
    m = C * (K/eps^2 + sqrt(K n)/eps) * ceil(ln(n/delta)), raised so that each
    half fills the estimator's batches.
    """
    m = int(math.ceil(constant * (K / eps ** 2 + math.sqrt(K * n) / eps) * math.ceil(math.log(n / delta))))
    return max(m, batch_count(n, delta / 4.0))


def _cell_is_bad(
    est: IntervalEstimator,
    cell: Interval,
    level: float,
    ratio_limit: float,
    gap_scale: float
) -> bool:
    """Scan every subinterval Q of the cell against both rejection conditions."""
    prefix = est.counts.prefix
    n = est.n
    b = est.b
    for start in range(cell.lo, cell.hi + 1):
        ends = np.arange(start, cell.hi + 1)
        batch = prefix[:, ends] - prefix[:, start - 1][:, None]
        lengths = ends - start + 1
        phi = np.maximum(lower_median(batch, axis=0) / b, lengths / (2.0 * n))
        p_hat = level * lengths
        if np.any(phi / p_hat > ratio_limit):
            return True
        if np.any(np.abs(phi - p_hat) > 0.5 * np.sqrt(p_hat * gap_scale)):
            return True
    return False


def learn_and_sieve(
    p_sampler: Sampler,
    partition: IntervalPartition,
    k: int,
    eps: float,
    delta: float,
    rng: RngStream,
    config: TesterConfig = DEFAULT_CONFIG
) -> SieveOutcome:
    """
    Learn a flattened measure and detect bad cells.

    Args:
        p_sampler: Sample access to the (uniform-mixed) target on [n]
        partition: Partition of [n] into K cells
        k: Histogram parameter; more than k bad cells means Reject
        eps: Accuracy in (0, 1)
        delta: Failure probability
        rng: Random stream
        config: Calibrated constants (c_sieve)

    Returns:
        SieveOutcome with the flagged cells and the learned measure
    """
    n = p_sampler.n
    partition.require_cover(n)
    if not 0 < eps < 1:
        raise ValueError(f"eps must lie in (0, 1), got {eps}")
    K = len(partition)
    m = sieve_sample_count(K, n, eps, delta, config.c_sieve)
    # two independent halves of m draws each
    learned = draw_empirical_learning(p_sampler, partition, m, delta / 4.0, rng)
    est = draw_interval_estimator(p_sampler, m, delta / 4.0, rng)

    ratio_limit = 6.0 * max(1.0, eps * math.sqrt(n / K))
    gap_scale = eps ** 2 / K
    bad = tuple(
        cell for index, cell in enumerate(partition)
        if _cell_is_bad(est, cell, float(learned.levels[index]), ratio_limit, gap_scale)
    )
    logger.debug("learn_and_sieve: K=%d, m=%d, %d bad cells", K, m, len(bad))
    if len(bad) > k:
        logger.info("learn_and_sieve rejects: %d bad cells exceed k=%d", len(bad), k)
        return SieveOutcome(SieveVerdict.REJECT, samples_used=2 * m)
    return SieveOutcome(SieveVerdict.OK, bad_intervals=bad, learned=learned, samples_used=2 * m)


def bad_interval_chi_square(
    p: Measure,
    learned: Measure,
    cell: Interval,
    eps: float,
    K: int
) -> bool:
    """
    True if the cell is eps-bad: a breakpoint cell whose chi^2 is at least
    j * eps^2 / K, j - 1 being the number of breakpoints of p inside it.
    """
    inside = p.mass[cell.lo - 1:cell.hi]
    j = int(np.count_nonzero(np.diff(inside) != 0)) + 1
    if j == 1:
        return False
    divergence = chi_square_div(p, learned, range(cell.lo, cell.hi + 1))
    return divergence >= j * eps ** 2 / K
