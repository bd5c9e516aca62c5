"""
Instance and run-accounting checks.
"""

from typing import List, Tuple

from ..dist_core import Pmf
from ..hard_instances import HardPair
from ..tester import TestVerdict, dp_distance_to_khistogram


def check_hard_pair_shape(hard: HardPair) -> Tuple[bool, List[str], List[str]]:
    """
    The YES side is a k-histogram and the NO side has at least n/10 right
    border pairs.

    Returns:
        Tuple of (passed, errors, warnings)
    """
    errors = []
    n, k = hard.pair.n, hard.pair.k
    if not hard.yes_is_khistogram:
        errors.append(
            f"H has {hard.yes_irregular} irregular entries, more than (k-1)/2 = {(k - 1) / 2:g}"
        )
    if hard.border_pairs < n / 10.0:
        errors.append(f"H' has {hard.border_pairs} right border pairs, fewer than n/10 = {n / 10.0:g}")
    gap_yes, gap_no = hard.mass_gaps()
    warnings = [f"Mass gaps |sum H - 1| = {gap_yes:.4f}, |sum H' - 1| = {gap_no:.4f}"]
    return not errors, errors, warnings


def check_zigzag_far(pmf: Pmf, k: int, eps: float) -> Tuple[bool, List[str], List[str]]:
    """Half the DP distance to k pieces is at least eps."""
    certified = dp_distance_to_khistogram(pmf, k) / 2.0
    if certified < eps:
        return False, [f"Certified TV lower bound {certified:.4f} is below eps = {eps}"], []
    return True, [], [f"Certified TV lower bound {certified:.4f}"]


def check_sample_accounting(verdict: TestVerdict) -> Tuple[bool, List[str], List[str]]:
    """Per-phase tallies add up exactly to the sampler call total."""
    phase_sum = sum(verdict.samples.values())
    if phase_sum != verdict.samples_total:
        return False, [f"Phases sum to {phase_sum}, sampler saw {verdict.samples_total}"], []
    return True, [], []
