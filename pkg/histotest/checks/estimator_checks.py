"""
Interval-estimator and learner checks.

Compare an estimator built from samples against the true distribution on
every interval at once.
"""

from typing import Iterable, List, Tuple

import numpy as np

from ..dist_core import Interval, Measure, chi_square_div
from ..interval_estimator import FlatMeasure, IntervalEstimator

MAX_REPORTED = 3


def _all_intervals(lo_bound: int, hi_bound: int) -> Tuple[np.ndarray, np.ndarray]:
    """Every [lo, hi] with lo_bound <= lo <= hi <= hi_bound (1-based)."""
    i, j = np.triu_indices(hi_bound - lo_bound + 1)
    return i + lo_bound, j + lo_bound


def _prefix(measure: Measure) -> np.ndarray:
    return np.concatenate(([0.0], np.cumsum(measure.mass)))


def _describe(lo: np.ndarray, hi: np.ndarray, bad: np.ndarray) -> str:
    where = np.flatnonzero(bad)[:MAX_REPORTED]
    return ", ".join(str(Interval(int(lo[w]), int(hi[w]))) for w in where)


def check_estimator_bounds(p: Measure, est: IntervalEstimator) -> Tuple[bool, List[str], List[str]]:
    """
    Check the simultaneous interval guarantees of the median estimator.

    For every interval I: |phi(I) - p(I)| <= sqrt(p(I)/b),
    p(I)/phi(I) <= max(2, 8n/b) and phi(I)/p(I) <= 3.

    Args:
        p: The (uniform-mixed) distribution the samples came from
        est: Estimator built from those samples

    Returns:
        Tuple of (passed, errors, warnings)
    """
    errors = []
    warnings = []
    if p.n != est.n:
        return False, [f"Dimension mismatch: {p.n} vs {est.n}"], warnings

    n, b = est.n, est.b
    lo, hi = _all_intervals(1, n)
    prefix = _prefix(p)
    true = prefix[hi] - prefix[lo - 1]
    phi = est.estimate_many(lo, hi)

    deviation = np.abs(phi - true) > np.sqrt(true / b)
    under = true > max(2.0, 8.0 * n / b) * phi
    over = phi > 3.0 * true
    for name, bad in (("deviation", deviation), ("underestimate", under), ("overestimate", over)):
        count = int(np.count_nonzero(bad))
        if count:
            errors.append(f"{name} bound fails on {count} intervals, e.g. {_describe(lo, hi, bad)}")
    if np.any(p.mass < 1.0 / (2.0 * n)):
        warnings.append("p has entries below 1/(2n); the bounds assume a uniform-mixed distribution")
    return not errors, errors, warnings


def check_flattening_bounds(
    p: Measure,
    learned: FlatMeasure,
    b: int
) -> Tuple[bool, List[str], List[str]]:
    """
    Check the learner on every sub-interval J of every cell where p is constant:
    p(J)/p_hat(J) <= max(2, 8n/b) and |p_hat(J) - p(J)| <= sqrt(p(J)/b).
    """
    errors = []
    warnings = []
    n = learned.n
    true_prefix = _prefix(p)
    hat_prefix = _prefix(learned.to_measure())
    limit = max(2.0, 8.0 * n / b)
    checked = 0
    for cell in learned.partition:
        values = p.mass[cell.lo - 1:cell.hi]
        if np.any(values != values[0]):
            continue
        lo, hi = _all_intervals(cell.lo, cell.hi)
        true = true_prefix[hi] - true_prefix[lo - 1]
        hat = hat_prefix[hi] - hat_prefix[lo - 1]
        bad = (true > limit * hat) | (np.abs(hat - true) > np.sqrt(true / b))
        checked += 1
        if np.any(bad):
            errors.append(f"Cell {cell}: bound fails on {int(np.count_nonzero(bad))} sub-intervals")
    if not checked:
        warnings.append("Every cell contains a breakpoint; nothing was checked")
    return not errors, errors, warnings


def check_sieve_chi_square(
    p: Measure,
    learned: FlatMeasure,
    bad_intervals: Iterable[Interval],
    eps: float
) -> Tuple[bool, List[str], List[str]]:
    """Chi-square of p against the learned measure outside the flagged cells is at most eps^2."""
    warnings = []
    keep = np.ones(p.n, dtype=bool)
    for cell in bad_intervals:
        keep[cell.lo - 1:cell.hi] = False
    if not np.any(keep):
        return True, [], ["All cells were flagged"]
    divergence = chi_square_div(p, learned.to_measure(), keep)
    warnings.append(f"Measured chi-square / eps^2 = {divergence / eps ** 2:.4f}")
    if divergence > eps ** 2:
        return False, [f"Chi-square outside flagged cells is {divergence:.3g} > eps^2 = {eps ** 2:.3g}"], warnings
    return True, [], warnings
