"""
Instance generators for the experiment harness.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Dict, Optional

import numpy as np

from .checks.instance_checks import check_zigzag_far
from .config import ExperimentConfig, TesterConfig
from .dist_core import Interval, Measure, Pmf, RngStream, count_pieces, make_khistogram
from .hard_instances import generate_hard_pair
from .loader import load_pmf_file
from .tester import dp_distance_to_khistogram

logger = logging.getLogger(__name__)

# hard instances use contamination weights in (0, 0.1]
MAX_HARD_WEIGHT = 0.1


@dataclass(frozen=True)
class Instance:
    """A target distribution plus what is known about it."""
    name: str
    pmf: Pmf
    true_k: int
    certified_distance: Optional[float] = None
    descriptors: Dict[str, Any] = field(default_factory=dict)

    def describe(self) -> Dict[str, Any]:
        data = {'instance': self.name, 'true_k': self.true_k, 'certified_distance': self.certified_distance}
        data.update(self.descriptors)
        return data


def uniform(n: int) -> Pmf:
    return Pmf(np.full(n, 1.0 / n))


def random_khistogram(n: int, k: int, rng: RngStream) -> Pmf:
    """Random cut points and levels; exactly k pieces with probability 1."""
    if not 1 <= k <= n:
        raise ValueError(f"k must lie in [1, n], got k={k}, n={n}")
    cuts = np.sort(rng.choice(n - 1, k - 1, replace=False) + 1) if k > 1 else np.zeros(0, dtype=np.int64)
    bounds = np.concatenate(([0], cuts, [n]))
    lengths = np.diff(bounds)
    levels = 0.5 + rng.random(k)
    levels = levels / float(np.sum(levels * lengths))
    pieces = [
        (Interval(int(lo) + 1, int(hi)), float(level))
        for lo, hi, level in zip(bounds[:-1], bounds[1:], levels)
    ]
    return make_khistogram(n, pieces)


def zigzag(n: int, j: int, amplitude: float = 1.0) -> Pmf:
    """
    j near-equal blocks alternating between (1 + amplitude)/n and (1 - amplitude)/n,
    renormalized.
    """
    if not 1 <= j <= n:
        raise ValueError(f"Block count must lie in [1, n], got {j}")
    if not 0 < amplitude <= 1:
        raise ValueError(f"amplitude must lie in (0, 1], got {amplitude}")
    mass = np.empty(n, dtype=np.float64)
    for index, block in enumerate(np.array_split(np.arange(n), j)):
        sign = 1.0 if index % 2 == 0 else -1.0
        mass[block] = (1.0 + sign * amplitude) / n
    return Measure(mass).normalized()


def zigzag_blocks(k: int, eps: float, n: int) -> int:
    return min(n, 2 * int(math.ceil(1.0 / eps)) * k)


def certified_tv_lower_bound(pmf: Pmf, k: int) -> float:
    """Half the L1 distance to k-piecewise functions, a lower bound on TV to H_k."""
    return dp_distance_to_khistogram(pmf, k) / 2.0


def build_instance(
    config: ExperimentConfig,
    rng: RngStream,
    tester_config: Optional[TesterConfig] = None
) -> Instance:
    """
    Build the configured target distribution.

    Raises:
        FileNotFoundError: if a pmf file is missing
        ValueError: on invalid parameters or a malformed file
    """
    n, k, eps = config.n, config.k, config.eps
    constants = tester_config or config.constants
    name = config.instance

    if name == 'uniform':
        return Instance(name, uniform(n), true_k=1)

    if name == 'random-khist':
        pmf = random_khistogram(n, k, rng)
        return Instance(name, pmf, true_k=pmf.pieces)

    if name == 'zigzag':
        j = zigzag_blocks(k, eps, n)
        pmf = zigzag(n, j, config.zigzag_amplitude)
        distance = certified_tv_lower_bound(pmf, k)
        far, errors, _ = check_zigzag_far(pmf, k, eps)
        if not far:
            logger.warning("Zigzag with %d blocks: %s", j, errors[0])
        return Instance(name, pmf, true_k=pmf.pieces, certified_distance=distance,
                        descriptors={'blocks': j, 'amplitude': config.zigzag_amplitude})

    if name in ('hard-yes', 'hard-no'):
        weight = min(eps, MAX_HARD_WEIGHT)
        hard = generate_hard_pair(n, k, weight, rng, constants)
        measure = hard.H if name == 'hard-yes' else hard.H_prime
        pmf = measure.normalized()
        descriptors = {'weight': weight, 'raw_total': measure.total}
        descriptors.update(hard.diagnostics())
        return Instance(name, pmf, true_k=pmf.pieces, descriptors=descriptors)

    if name == 'file':
        loaded = load_pmf_file(config.instance_path)
        pmf = loaded.pmf
        return Instance(name, pmf, true_k=count_pieces(pmf.mass),
                        descriptors={'path': config.instance_path, 'raw_total': loaded.raw_total})

    raise ValueError(f"Unknown instance '{name}'")
