"""
Moment-matched hard instances.

U and U' are supported on the roots of p(x) = x (x - 1/n)(x - 2/n) T_d(1 - Delta x),
split by the sign of p' and weighted by 1/|p'|. Their first d+1 moments
agree, so the YES ensemble H = 1/n + eps U (almost always a k-histogram) and
the NO ensemble H' = 1/n + eps U' (many right border pairs) look alike to a
tester that sees too few samples.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np
from scipy import stats

from .config import DEFAULT_CONFIG, TesterConfig
from .dist_core import Measure, RngStream

logger = logging.getLogger(__name__)

CHEBYSHEV_SLACK = 1e-12


def chebyshev_eval(d: int, x):
    """
    T_d(x) = cos(d arccos x).

    Raises:
        ValueError: if |x| > 1 + 1e-12 anywhere
    """
    values = np.asarray(x, dtype=np.float64)
    if np.any(np.abs(values) > 1.0 + CHEBYSHEV_SLACK):
        raise ValueError(f"Chebyshev argument outside [-1, 1]: {x}")
    result = np.cos(d * np.arccos(np.clip(values, -1.0, 1.0)))
    return float(result) if result.ndim == 0 else result


def chebyshev_derivative_at_root(d: int, theta: float) -> float:
    """T_d'(cos theta) = d sin(d theta) / sin(theta)."""
    return d * math.sin(d * theta) / math.sin(theta)


@dataclass(frozen=True, eq=False)
class MomentMatchedPair:
    """Two discrete random variables with matching low moments."""
    n: int
    k: int
    d: int
    delta: float
    roots: np.ndarray = field(repr=False)
    derivatives: np.ndarray = field(repr=False)
    support_U: np.ndarray = field(repr=False)
    prob_U: np.ndarray = field(repr=False)
    support_U_prime: np.ndarray = field(repr=False)
    prob_U_prime: np.ndarray = field(repr=False)

    def moment(self, t: int, prime: bool = False) -> float:
        support, prob = (self.support_U_prime, self.prob_U_prime) if prime else (self.support_U, self.prob_U)
        return math.fsum(prob * support ** t)

    def probability(self, value: float, prime: bool = False) -> float:
        """Pr[U = value] (or U'), matching support points to 1e-12 relative."""
        support, prob = (self.support_U_prime, self.prob_U_prime) if prime else (self.support_U, self.prob_U)
        hit = np.isclose(support, value, rtol=1e-12, atol=1e-15)
        return float(np.sum(prob[hit]))


def identity_residuals(pair: MomentMatchedPair, max_power: Optional[int] = None) -> List[float]:
    """
    |sum_j r_j^t / p'(r_j)| relative to sum_j |r_j^t / p'(r_j)|, for t = 0..max_power.

    The sums vanish for t <= d+1 when the roots and derivatives are right.
    """
    top = pair.d + 1 if max_power is None else max_power
    residuals = []
    for t in range(top + 1):
        terms = pair.roots ** t / pair.derivatives
        scale = math.fsum(np.abs(terms))
        residuals.append(abs(math.fsum(terms)) / scale if scale else 0.0)
    return residuals


def build_moment_matched_pair(
    n: int,
    k: int,
    c: Optional[float] = None,
    C: Optional[float] = None,
    config: TesterConfig = DEFAULT_CONFIG
) -> MomentMatchedPair:
    """
    Construct U and U'.

    Args:
        n: Domain size
        k: Histogram parameter, 1 <= k < n
        c: Degree constant, d = ceil(c ln n) (default config.moment_c)
        C: Scale constant, Delta = sqrt(kn) / (C ln^2 n) (default config.moment_C)

    Raises:
        ValueError: if k is out of range or the construction is invalid for
            these constants
    """
    if not 1 <= k < n:
        raise ValueError(f"k must lie in [1, n), got k={k}, n={n}")
    c = config.moment_c if c is None else c
    C = config.moment_C if C is None else C
    log_n = math.log(n)
    delta = math.sqrt(k * n) / (C * log_n ** 2)
    d = max(1, int(math.ceil(c * log_n)))

    near = 1.0 - delta / n
    far = 1.0 - 2.0 * delta / n
    if far < -1.0 or chebyshev_eval(d, near) < 0.5 or chebyshev_eval(d, far) < 0.5:
        raise ValueError(
            f"Invalid construction for n={n}, k={k} (d={d}, Delta={delta:.4g}): "
            f"increase C relative to c"
        )

    thetas = np.array([(2 * m - 1) * math.pi / (2 * d) for m in range(1, d + 1)])
    chebyshev_roots = (1.0 - np.cos(thetas)) / delta
    roots = np.concatenate(([0.0, 1.0 / n, 2.0 / n], chebyshev_roots))

    derivatives = np.empty(roots.size)
    derivatives[0] = 2.0 / n ** 2 * chebyshev_eval(d, 1.0)
    derivatives[1] = -chebyshev_eval(d, near) / n ** 2
    derivatives[2] = 2.0 * chebyshev_eval(d, far) / n ** 2
    for index, (r, theta) in enumerate(zip(chebyshev_roots, thetas), start=3):
        derivatives[index] = (
            -delta * r * (r - 1.0 / n) * (r - 2.0 / n) * chebyshev_derivative_at_root(d, theta)
        )

    if np.any(np.diff(roots) <= 0):
        raise ValueError(f"Roots are not distinct for n={n}, k={k}: increase C relative to c")

    weights = 1.0 / np.abs(derivatives)
    negative = derivatives < 0
    positive = derivatives > 0
    pair = MomentMatchedPair(
        n=n,
        k=k,
        d=d,
        delta=delta,
        roots=roots,
        derivatives=derivatives,
        support_U=roots[negative],
        prob_U=weights[negative] / np.sum(weights[negative]),
        support_U_prime=roots[positive],
        prob_U_prime=weights[positive] / np.sum(weights[positive]),
    )
    logger.debug(
        "Moment-matched pair: n=%d, k=%d, d=%d, Delta=%.4g, |supp U|=%d, |supp U'|=%d",
        n, k, d, delta, pair.support_U.size, pair.support_U_prime.size
    )
    return pair


def measured_support_constant(pair: MomentMatchedPair) -> float:
    """max support * sqrt(kn) / ln^2 n."""
    top = max(pair.support_U.max(), pair.support_U_prime.max())
    return float(top * math.sqrt(pair.k * pair.n) / math.log(pair.n) ** 2)


def measured_mean_constant(pair: MomentMatchedPair) -> float:
    """A such that E[U], E[U'] = (1/n)(1 + A sqrt(k/n))."""
    means = (pair.moment(1), pair.moment(1, prime=True))
    return max((pair.n * mean - 1.0) / math.sqrt(pair.k / pair.n) for mean in means)


def right_border_pairs(bumps: np.ndarray, n: int) -> int:
    """Adjacent positions (i, i+1) whose bumps are (0, 2/n)."""
    bumps = np.asarray(bumps, dtype=np.float64)
    low = np.isclose(bumps[:-1], 0.0, rtol=0.0, atol=1e-12 / n)
    high = np.isclose(bumps[1:], 2.0 / n, rtol=1e-12, atol=0.0)
    return int(np.count_nonzero(low & high))


@dataclass(frozen=True, eq=False)
class HardPair:
    """One draw of the YES and NO ensembles."""
    H: Measure
    H_prime: Measure
    eps: float
    pair: MomentMatchedPair
    bumps: np.ndarray = field(repr=False)
    bumps_prime: np.ndarray = field(repr=False)

    @property
    def yes_irregular(self) -> int:
        """Entries of H whose bump is not 1/n."""
        regular = np.isclose(self.bumps, 1.0 / self.pair.n, rtol=1e-12, atol=0.0)
        return int(np.count_nonzero(~regular))

    @property
    def yes_is_khistogram(self) -> bool:
        return self.yes_irregular <= (self.pair.k - 1) / 2

    @property
    def border_pairs(self) -> int:
        return right_border_pairs(self.bumps_prime, self.pair.n)

    def mass_gaps(self):
        """(|sum H - 1|, |sum H' - 1|)."""
        return abs(self.H.total - 1.0), abs(self.H_prime.total - 1.0)

    def diagnostics(self) -> dict:
        gap_yes, gap_no = self.mass_gaps()
        return {
            'yes_irregular_entries': self.yes_irregular,
            'yes_is_khistogram': self.yes_is_khistogram,
            'right_border_pairs': self.border_pairs,
            'yes_mass_gap': gap_yes,
            'no_mass_gap': gap_no,
            'd': self.pair.d,
            'Delta': self.pair.delta,
        }


def generate_hard_pair(
    n: int,
    k: int,
    eps: float,
    rng: RngStream,
    config: TesterConfig = DEFAULT_CONFIG,
    pair: Optional[MomentMatchedPair] = None
) -> HardPair:
    """
    Draw H = 1/n + eps U and H' = 1/n + eps U' with n i.i.d. copies each.

    Args:
        n: Domain size
        k: Histogram parameter
        eps: Contamination weight in (0, 1/10]
        rng: Random stream
        config: Constants for the pair construction
        pair: Reuse a prebuilt pair for (n, k)

    Raises:
        ValueError: if eps is out of range or the pair cannot be built
    """
    if not 0 < eps <= 0.1:
        raise ValueError(f"eps must lie in (0, 0.1], got {eps}")
    if pair is None:
        pair = build_moment_matched_pair(n, k, config=config)
    elif (pair.n, pair.k) != (n, k):
        raise ValueError(f"Pair was built for n={pair.n}, k={pair.k}")
    bumps = pair.support_U[rng.choice(pair.support_U.size, n, pair.prob_U)]
    bumps_prime = pair.support_U_prime[rng.choice(pair.support_U_prime.size, n, pair.prob_U_prime)]
    return HardPair(
        H=Measure(1.0 / n + eps * bumps),
        H_prime=Measure(1.0 / n + eps * bumps_prime),
        eps=eps,
        pair=pair,
        bumps=bumps,
        bumps_prime=bumps_prime,
    )


def poissonized_counts(measure: Measure, m: float, rng: RngStream) -> np.ndarray:
    """Independent M_i ~ Poisson(m * P_i)."""
    if m < 0:
        raise ValueError(f"Poisson rate must be non-negative, got {m}")
    return rng.poisson(m * measure.mass)


def hard_sample_rate(n: int, k: int, eps: float) -> float:
    """sqrt(kn) / (10 eps ln n)."""
    return math.sqrt(k * n) / (10.0 * eps * math.log(n))


def fingerprint(counts: np.ndarray) -> np.ndarray:
    """F[j-1] = number of elements seen exactly j times, j >= 1."""
    counts = np.asarray(counts, dtype=np.int64)
    if counts.size == 0 or counts.max() < 1:
        return np.zeros(0, dtype=np.int64)
    return np.bincount(counts)[1:]


def fingerprint_pvalue(counts_a: np.ndarray, counts_b: np.ndarray) -> float:
    """Two-sample chi-square p-value on the multiplicity profiles."""
    fa = fingerprint(counts_a)
    fb = fingerprint(counts_b)
    width = max(fa.size, fb.size)
    table = np.zeros((2, width), dtype=np.int64)
    table[0, :fa.size] = fa
    table[1, :fb.size] = fb
    table = table[:, table.sum(axis=0) > 0]
    if table.shape[1] < 2 or np.any(table.sum(axis=1) == 0):
        return 1.0
    return float(stats.chi2_contingency(table)[1])
