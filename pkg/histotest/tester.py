"""
The k-histogram tester.

test_histogram mixes the unknown distribution with the uniform one, then
alternates refinement, learn-and-sieve and bad-mass estimation until the
unlearned region is light. The stitched estimate is checked for closeness
to a k-histogram with an exact dynamic program and finally compared with
the samples by a tolerant chi-square identity test.
"""

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Optional, Tuple

import numpy as np

from .config import DEFAULT_CONFIG, TesterConfig
from .dist_core import (
    Interval,
    Measure,
    RngStream,
    Sampler,
    TallySampler,
    UniformMixSampler,
)
from .interval_estimator import FlatMeasure
from .partition import IntervalPartition, approx_sub_divide
from .sieve import SieveVerdict, learn_and_sieve

logger = logging.getLogger(__name__)

PHASES = ('divide', 'sieve', 'mass', 'test')

REASON_ACCEPTED = 'accepted'
REASON_SIEVE = 'sieve-reject'
REASON_DP = 'dp-reject'
REASON_IDENTITY = 'identity-reject'
REASON_NON_CONVERGENCE = 'non-convergence'


class Verdict(Enum):
    ACCEPT = "accept"
    REJECT = "reject"


@dataclass(frozen=True)
class IdentityTestOutcome:
    """Per-repetition statistics of the tolerant identity test."""
    verdict: Verdict
    statistics: Tuple[float, ...]
    threshold: float
    support_size: int


@dataclass(frozen=True)
class TestVerdict:
    """Verdict of test_histogram with its diagnostics."""
    verdict: Verdict
    reason: str
    iterations: int
    samples: Dict[str, int] = field(default_factory=dict)
    samples_total: int = 0
    r: float = 1.0
    r_history: Tuple[float, ...] = ()
    bad_history: Tuple[Tuple[Interval, ...], ...] = ()
    dp_distance: Optional[float] = None
    normalization_slack: Optional[float] = None
    identity: Optional[IdentityTestOutcome] = None

    @property
    def accepted(self) -> bool:
        return self.verdict is Verdict.ACCEPT


@dataclass(frozen=True)
class StitchedMeasure:
    """
    Estimate assembled from the learned measures of every iteration.

    Each region holds the good cells of one iteration together with the
    flattened measure learned in that iteration; the residual cells are the
    ones still flagged after the last iteration and carry zero mass.
    """
    n: int
    regions: Tuple[Tuple[Tuple[Interval, ...], FlatMeasure], ...]
    residual: Tuple[Interval, ...] = ()

    def cells(self) -> List[Interval]:
        collected = [cell for good, _ in self.regions for cell in good]
        return collected + list(self.residual)

    def covers(self) -> bool:
        """True if good regions and residual partition [n]."""
        try:
            return IntervalPartition.from_cells(self.cells()).covers(self.n)
        except ValueError:
            return False

    def to_measure(self) -> Measure:
        mass = np.zeros(self.n, dtype=np.float64)
        for good, learned in self.regions:
            dense = learned.to_measure().mass
            for cell in good:
                mass[cell.lo - 1:cell.hi] = dense[cell.lo - 1:cell.hi]
        return Measure(mass)


def identity_test_size(n: int, eps: float, config: TesterConfig = DEFAULT_CONFIG) -> float:
    """Poisson rate m = c_test * sqrt(n) / eps^2."""
    return config.c_test * math.sqrt(n) / eps ** 2


def run_identity_test(
    p_sampler: Sampler,
    p_hat: Measure,
    eps: float,
    rng: RngStream,
    config: TesterConfig = DEFAULT_CONFIG
) -> IdentityTestOutcome:
    """
    Poissonized chi-square identity test against p_hat on its heavy part.

    Each repetition draws N ~ Poisson(m) samples and computes
    Z = sum over A of ((N_i - m p_hat_i)^2 - N_i) / (m p_hat_i) where
    A = {i : p_hat_i >= eps/(50n)}. The N_i are the counts of a Poisson(m)
    number of draws, so they are independent Poisson(m p_i). The median Z is
    compared with tau = test_threshold * m * eps^2.

    Raises:
        ValueError: if eps is outside (0, 1) or the domains differ
    """
    if not 0 < eps < 1:
        raise ValueError(f"eps must lie in (0, 1), got {eps}")
    n = p_sampler.n
    if p_hat.n != n:
        raise ValueError(f"Dimension mismatch: sampler on [1, {n}], reference on [1, {p_hat.n}]")
    m = identity_test_size(n, eps, config)
    tau = config.test_threshold * m * eps ** 2
    support = p_hat.mass >= eps / (50.0 * n)
    support_size = int(np.count_nonzero(support))
    if support_size == 0:
        return IdentityTestOutcome(Verdict.ACCEPT, (0.0,), tau, 0)

    expected = m * p_hat.mass[support]
    statistics = []
    for _ in range(config.test_repetitions):
        size = int(rng.poisson(m))
        counts = p_sampler.draw_counts(size, rng)[support]
        statistics.append(float(np.sum(((counts - expected) ** 2 - counts) / expected)))
    z = float(np.median(statistics))
    verdict = Verdict.ACCEPT if z <= tau else Verdict.REJECT
    logger.debug("Identity test: |A|=%d, m=%.0f, median Z=%.2f, tau=%.2f", support_size, m, z, tau)
    return IdentityTestOutcome(verdict, tuple(statistics), tau, support_size)


def tolerant_identity_test(
    p_sampler: Sampler,
    p_hat: Measure,
    eps: float,
    rng: RngStream,
    config: TesterConfig = DEFAULT_CONFIG
) -> Verdict:
    """Accept when p is chi-square close to p_hat, reject when it is eps-far in TV on A."""
    return run_identity_test(p_sampler, p_hat, eps, rng, config).verdict


def _runs(values: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Levels and lengths of the maximal constant runs."""
    starts = np.flatnonzero(np.r_[True, np.diff(values) != 0])
    lengths = np.diff(np.r_[starts, values.size]).astype(np.float64)
    return values[starts], lengths


def dp_distance_to_khistogram(measure: Measure, k: int) -> float:
    """
    L1 distance from a measure to the closest function with at most k pieces.

    Breakpoints of an optimal approximation can be moved to run boundaries
    of the measure, since within a run the cost is concave in the split
    position. The dynamic program therefore works on runs; the cost of a
    group of runs is its weighted L1 deviation from its weighted median.

    Args:
        measure: Non-negative vector on [n]
        k: Maximum number of pieces

    Returns:
        min over k-piecewise-constant g of ||measure - g||_1

    Raises:
        ValueError: if k < 1
    """
    if k < 1:
        raise ValueError(f"k must be at least 1, got {k}")
    levels, lengths = _runs(measure.mass)
    R = levels.size
    if k >= R:
        return 0.0

    # every weighted median is one of the run levels
    candidates = np.unique(levels)
    cost = np.full((R, R), np.inf)
    for i in range(R):
        deviation = lengths[i:] * np.abs(levels[i:][None, :] - candidates[:, None])
        cost[i, i:] = np.min(np.cumsum(deviation, axis=1), axis=0)

    # best[j]: cheapest cover of the first j runs with the pieces used so far
    best = np.full(R + 1, np.inf)
    best[0] = 0.0
    for _ in range(k):
        extended = np.empty(R + 1)
        extended[0] = 0.0
        extended[1:] = np.min(best[:R, None] + cost, axis=0)
        best = np.minimum(best, extended)
    return float(best[R])


def _finish(
    sampler: TallySampler,
    verdict: Verdict,
    reason: str,
    iterations: int,
    r_history: List[float],
    bad_history: List[Tuple[Interval, ...]],
    **extra
) -> TestVerdict:
    samples = {phase: sampler.counts.get(phase, 0) for phase in PHASES}
    return TestVerdict(
        verdict=verdict,
        reason=reason,
        iterations=iterations,
        samples=samples,
        samples_total=sampler.total,
        r=r_history[-1] if r_history else 1.0,
        r_history=tuple(r_history),
        bad_history=tuple(bad_history),
        **extra
    )


def test_histogram(
    p_raw_sampler: Sampler,
    n: int,
    k: int,
    eps: float,
    rng: RngStream,
    config: TesterConfig = DEFAULT_CONFIG
) -> TestVerdict:
    """
    Test whether p is a k-histogram or eps-far from every k-histogram.

    The target is mixed with the uniform distribution, which halves every
    distance, and tested at accuracy eps/2.

    Args:
        p_raw_sampler: Sample access to the unknown distribution on [n]
        n: Domain size
        k: Number of pieces, 1 <= k <= n
        eps: Accuracy in (0, 1)
        rng: Random stream
        config: Calibrated constants

    Returns:
        TestVerdict with per-phase sample tallies

    Raises:
        ValueError: on invalid parameters
    """
    if p_raw_sampler.n != n:
        raise ValueError(f"Sampler is on [1, {p_raw_sampler.n}], expected [1, {n}]")
    if not 1 <= k <= n:
        raise ValueError(f"k must lie in [1, n], got k={k}, n={n}")
    if not 0 < eps < 1:
        raise ValueError(f"eps must lie in (0, 1), got {eps}")

    sampler = TallySampler(UniformMixSampler(p_raw_sampler))
    target = eps / 2.0
    T = max(1, 3 * int(math.ceil(math.log(1.0 / target))))
    delta = 1.0 / (100.0 * T)
    B = 32 * k
    sieve_eps = target / (4.0 * math.sqrt(T))
    mass_draws = int(math.ceil(config.c_mass * math.log(1.0 / delta) / target))
    max_iterations = config.max_iteration_factor * T

    partition = IntervalPartition((Interval(1, n),))
    bad: Tuple[Interval, ...] = (Interval(1, n),)
    bad_history = [bad]
    regions = []
    r_history: List[float] = []
    r = 1.0
    iterations = 0
    while r > target / 8.0:
        if iterations >= max_iterations:
            logger.warning("No convergence after %d iterations (r=%.4f)", iterations, r)
            return _finish(
                sampler, Verdict.REJECT, REASON_NON_CONVERGENCE, iterations, r_history, bad_history
            )
        iterations += 1

        with sampler.phase('divide'):
            parts = approx_sub_divide(sampler, bad, B, delta, rng, config)
        refined = [cell for part in parts for cell in part]
        replaced = set(bad)
        kept = IntervalPartition.from_cells(cell for cell in partition if cell not in replaced)
        partition = kept.merge(IntervalPartition.from_cells(refined))

        with sampler.phase('sieve'):
            outcome = learn_and_sieve(sampler, partition, k, sieve_eps, delta, rng, config)
        if outcome.verdict is SieveVerdict.REJECT:
            return _finish(sampler, Verdict.REJECT, REASON_SIEVE, iterations, r_history, bad_history)

        flagged = set(outcome.bad_intervals)
        bad = tuple(cell for cell in refined if cell in flagged)
        bad_history.append(bad)
        regions.append((tuple(cell for cell in refined if cell not in flagged), outcome.learned))

        if bad:
            with sampler.phase('mass'):
                counts = sampler.draw_counts(mass_draws, rng)
            inside = IntervalPartition(bad).mask(n)
            r = int(counts[inside].sum()) / mass_draws
        else:
            r = 0.0
        r_history.append(r)
        logger.debug(
            "Iteration %d: %d cells, %d flagged, r=%.4f", iterations, len(partition), len(bad), r
        )

    stitched = StitchedMeasure(n=n, regions=tuple(regions), residual=bad)
    if not stitched.covers():
        raise RuntimeError("Stitched regions do not partition the domain")
    p_bar = stitched.to_measure()
    distance = dp_distance_to_khistogram(p_bar, k)
    slack = abs(1.0 - p_bar.total)
    if slack > target / 2.0:
        logger.warning("Stitched estimate has normalization slack %.4f", slack)
    if distance + slack > target:
        return _finish(
            sampler, Verdict.REJECT, REASON_DP, iterations, r_history, bad_history,
            dp_distance=distance, normalization_slack=slack
        )

    with sampler.phase('test'):
        identity = run_identity_test(sampler, p_bar, target, rng, config)
    reason = REASON_ACCEPTED if identity.verdict is Verdict.ACCEPT else REASON_IDENTITY
    return _finish(
        sampler, identity.verdict, reason, iterations, r_history, bad_history,
        dp_distance=distance, normalization_slack=slack, identity=identity
    )


@dataclass(frozen=True)
class SampleBound:
    """Order-of-growth terms of the tester's sample complexity."""
    sqrt_nk_over_eps: float
    k_over_eps2: float
    sqrt_n_over_eps2: float

    @property
    def total(self) -> float:
        return self.sqrt_nk_over_eps + self.k_over_eps2 + self.sqrt_n_over_eps2

    @property
    def dominant(self) -> str:
        terms = {
            'sqrt_nk_over_eps': self.sqrt_nk_over_eps,
            'k_over_eps2': self.k_over_eps2,
            'sqrt_n_over_eps2': self.sqrt_n_over_eps2,
        }
        return max(terms, key=terms.get)


def theorem_sample_bound(n: int, k: int, eps: float) -> SampleBound:
    """sqrt(nk)/eps + k/eps^2 + sqrt(n)/eps^2, without log factors."""
    if n < 1 or k < 1 or not 0 < eps < 1:
        raise ValueError(f"Invalid parameters n={n}, k={k}, eps={eps}")
    return SampleBound(
        sqrt_nk_over_eps=math.sqrt(n * k) / eps,
        k_over_eps2=k / eps ** 2,
        sqrt_n_over_eps2=math.sqrt(n) / eps ** 2,
    )
