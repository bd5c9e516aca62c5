"""
Model selection over the number of histogram pieces.

Doubles k until the (amplified) tester accepts, optionally followed by a
linear scan of [K/2, K] for the smallest accepted value.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List, Tuple

from .config import DEFAULT_CONFIG, TesterConfig
from .dist_core import RngStream, Sampler
from .tester import PHASES, TestVerdict, Verdict, test_histogram

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Probe:
    """One amplified tester run at a fixed k."""
    k: int
    verdict: Verdict
    samples: int
    runs: int
    phase: str = 'doubling'


@dataclass(frozen=True)
class SelectionResult:
    K: int
    probes: Tuple[Probe, ...] = ()
    total_samples: int = 0
    phase_totals: Dict[str, int] = field(default_factory=dict)


def amplification_runs(delta: float, config: TesterConfig = DEFAULT_CONFIG) -> int:
    """2 * ceil(amplification * ln(1/delta)) + 1."""
    return 2 * int(math.ceil(config.amplification * math.log(1.0 / delta))) + 1


def amplified_test(
    p_sampler: Sampler,
    n: int,
    k: int,
    eps: float,
    delta: float,
    rng: RngStream,
    config: TesterConfig = DEFAULT_CONFIG
) -> Tuple[Verdict, List[TestVerdict]]:
    """
    Majority vote of independent tester runs, failing with probability <= delta.

    Stops as soon as one side holds a strict majority of the planned runs,
    which leaves the vote unchanged.
    """
    if not 0 < delta <= 1:
        raise ValueError(f"delta must lie in (0, 1], got {delta}")
    planned = amplification_runs(delta, config)
    needed = planned // 2 + 1
    runs: List[TestVerdict] = []
    accepts = rejects = 0
    while accepts < needed and rejects < needed:
        outcome = test_histogram(p_sampler, n, k, eps, rng, config)
        runs.append(outcome)
        if outcome.accepted:
            accepts += 1
        else:
            rejects += 1
    verdict = Verdict.ACCEPT if accepts >= needed else Verdict.REJECT
    logger.debug("k=%d: %d accept / %d reject of %d planned", k, accepts, rejects, planned)
    return verdict, runs


def select_k(
    p_sampler: Sampler,
    n: int,
    eps: float,
    delta: float,
    refine: bool,
    rng: RngStream,
    config: TesterConfig = DEFAULT_CONFIG
) -> SelectionResult:
    """
    Smallest power of two K (or, with refine, smallest integer) the tester accepts.

    Args:
        p_sampler: Sample access to the distribution on [n]
        n: Domain size
        eps: Accuracy in (0, 1)
        delta: Overall failure probability in (0, 1]
        refine: Scan K/2..K after the doubling search
        rng: Random stream
        config: Calibrated constants

    Raises:
        ValueError: on invalid parameters
        RuntimeError: if no probe accepts
    """
    if p_sampler.n != n:
        raise ValueError(f"Sampler is on [1, {p_sampler.n}], expected [1, {n}]")
    if not 0 < eps < 1:
        raise ValueError(f"eps must lie in (0, 1), got {eps}")
    if not 0 < delta <= 1:
        raise ValueError(f"delta must lie in (0, 1], got {delta}")
    if n == 1:
        return SelectionResult(K=1, phase_totals={phase: 0 for phase in PHASES})

    probes: List[Probe] = []
    totals = {phase: 0 for phase in PHASES}

    def probe(k: int, probe_delta: float, phase: str) -> Verdict:
        verdict, runs = amplified_test(p_sampler, n, k, eps, probe_delta, rng, config)
        for run in runs:
            for name, count in run.samples.items():
                totals[name] += count
        probes.append(Probe(k, verdict, sum(run.samples_total for run in runs), len(runs), phase))
        return verdict

    K = None
    for j in range(int(math.ceil(math.log2(n))) + 1):
        k = min(2 ** j, n)
        if probe(k, delta / (2.0 * (j + 1) ** 2), 'doubling') is Verdict.ACCEPT:
            K = k
            break
    if K is None:
        raise RuntimeError(f"tester inconsistent: no k up to {n} accepted")

    if refine and K > 1:
        for i in range(max(1, K // 2), K):
            if probe(i, delta / K, 'refine') is Verdict.ACCEPT:
                K = i
                break

    logger.info("Selected K=%d after %d probes", K, len(probes))
    return SelectionResult(
        K=K,
        probes=tuple(probes),
        total_samples=sum(p.samples for p in probes),
        phase_totals=totals,
    )
