"""
Diagnostic checks for histotest.

Every check returns (passed, errors, warnings) and never raises on a
failed property.
"""

from .estimator_checks import (
    check_estimator_bounds,
    check_flattening_bounds,
    check_sieve_chi_square,
)
from .instance_checks import (
    check_hard_pair_shape,
    check_sample_accounting,
    check_zigzag_far,
)
from .pair_checks import (
    check_moment_identity,
    check_moment_matching,
    check_pair_shape,
)

__all__ = [
    'check_estimator_bounds',
    'check_flattening_bounds',
    'check_sieve_chi_square',
    'check_hard_pair_shape',
    'check_sample_accounting',
    'check_zigzag_far',
    'check_moment_identity',
    'check_moment_matching',
    'check_pair_shape',
]
