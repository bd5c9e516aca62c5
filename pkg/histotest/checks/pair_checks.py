"""
Moment-matched pair checks.
"""

import math
from typing import List, Tuple

import numpy as np

from ..hard_instances import (
    MomentMatchedPair,
    identity_residuals,
    measured_mean_constant,
    measured_support_constant,
)


def check_moment_identity(pair: MomentMatchedPair, tolerance: float = 1e-6) -> Tuple[bool, List[str], List[str]]:
    """
    sum_j r_j^t / p'(r_j) vanishes for t = 0..d+1.

    Returns:
        Tuple of (passed, errors, warnings)
    """
    errors = []
    residuals = identity_residuals(pair)
    for t, residual in enumerate(residuals):
        if residual > tolerance:
            errors.append(f"Power {t}: relative residual {residual:.3g} exceeds {tolerance:g}")
    warnings = [f"Largest relative residual {max(residuals):.3g}"]
    return not errors, errors, warnings


def check_moment_matching(pair: MomentMatchedPair, tolerance: float = 1e-6) -> Tuple[bool, List[str], List[str]]:
    """E[U^t] = E[U'^t] for t = 1..d, relative to the larger of the two."""
    errors = []
    for t in range(1, pair.d + 1):
        a = pair.moment(t)
        b = pair.moment(t, prime=True)
        scale = max(abs(a), abs(b))
        if scale and abs(a - b) / scale > tolerance:
            errors.append(f"Moment {t}: E[U^t]={a:.6g} vs E[U'^t]={b:.6g}")
    return not errors, errors, []


def check_pair_shape(pair: MomentMatchedPair) -> Tuple[bool, List[str], List[str]]:
    """
    Structural properties of U and U': valid probabilities, disjoint supports,
    Pr[U' = 0] and Pr[U' = 2/n] above 1/3, Pr[U != 1/n] at most k/(10n),
    support at most 2/Delta and means at least 1/n.
    """
    errors = []
    warnings = []
    n, k = pair.n, pair.k

    for label, prob in (("U", pair.prob_U), ("U'", pair.prob_U_prime)):
        if np.any(prob <= 0):
            errors.append(f"{label} has non-positive probabilities")
        if abs(math.fsum(prob) - 1.0) > 1e-12:
            errors.append(f"{label} probabilities sum to {math.fsum(prob)!r}")

    if np.intersect1d(pair.support_U, pair.support_U_prime).size:
        errors.append("Supports of U and U' overlap")
    if np.any(np.diff(pair.roots) <= 0):
        errors.append("Roots are not strictly increasing")

    zero = pair.probability(0.0, prime=True)
    two = pair.probability(2.0 / n, prime=True)
    if zero <= 1.0 / 3.0:
        errors.append(f"Pr[U' = 0] = {zero:.4f} is not above 1/3")
    if two <= 1.0 / 3.0:
        errors.append(f"Pr[U' = 2/n] = {two:.4f} is not above 1/3")
    irregular = 1.0 - pair.probability(1.0 / n)
    if irregular > k / (10.0 * n):
        errors.append(f"Pr[U != 1/n] = {irregular:.3g} exceeds k/(10n) = {k / (10.0 * n):.3g}")

    top = max(pair.support_U.max(), pair.support_U_prime.max())
    if top > 2.0 / pair.delta * (1.0 + 1e-12):
        errors.append(f"Support reaches {top:.4g} > 2/Delta = {2.0 / pair.delta:.4g}")

    for label, prime in (("U", False), ("U'", True)):
        if pair.moment(1, prime) < (1.0 / n) * (1.0 - 1e-9):
            errors.append(f"E[{label}] = {pair.moment(1, prime):.6g} is below 1/n")

    warnings.append(f"Measured mean constant A = {measured_mean_constant(pair):.4f}")
    warnings.append(f"Measured support constant = {measured_support_constant(pair):.4f}")
    return not errors, errors, warnings
