"""
Experiment runner.

Each trial uses the stream seeded seed XOR trial; the instance is drawn from
a separate stream derived from it so that the tester's draws do not depend
on how the instance was generated. Trials run on a thread pool when jobs > 1
and rows come back in trial order.
"""

import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace
from functools import partial
from typing import Any, Callable, Dict, List, Optional

import numpy as np

from .checks import (
    check_hard_pair_shape,
    check_moment_identity,
    check_moment_matching,
    check_pair_shape,
    check_sample_accounting,
)
from .config import ExperimentConfig
from .dist_core import PmfSampler, RngStream
from .hard_instances import HardPair, MomentMatchedPair, build_moment_matched_pair, generate_hard_pair
from .instances import MAX_HARD_WEIGHT, build_instance
from .model_select import select_k
from .report import CheckReport, CheckResult, ExperimentReport, ReportRow
from .tester import test_histogram, theorem_sample_bound

logger = logging.getLogger(__name__)

INSTANCE_STREAM = 1 << 63


def trial_seed(seed: int, trial: int) -> int:
    return seed ^ trial


def _elapsed_ms(start: float, timing: bool) -> float:
    return (time.perf_counter() - start) * 1000.0 if timing else 0.0


def _bound_descriptors(samples_total: int, n: int, k: int, eps: float) -> Dict[str, Any]:
    """Ratio of the samples used to the sample-complexity bound, log factors dropped."""
    bound = theorem_sample_bound(n, k, eps)
    return {'bound_ratio': samples_total / bound.total, 'bound_dominant': bound.dominant}


def _test_trial(config: ExperimentConfig, trial: int, sweep_value: Optional[float] = None) -> ReportRow:
    seed = trial_seed(config.seed, trial)
    rng = RngStream(seed)
    instance = build_instance(config, rng.spawn(INSTANCE_STREAM))
    n = instance.pmf.n
    if config.k > n:
        raise ValueError(f"k={config.k} exceeds the instance domain size {n}")

    start = time.perf_counter()
    verdict = test_histogram(PmfSampler(instance.pmf), n, config.k, config.eps, rng, config.constants)
    wall_ms = _elapsed_ms(start, config.timing)

    passed, errors, _ = check_sample_accounting(verdict)
    if not passed:
        raise RuntimeError(f"Trial {trial}: " + "; ".join(errors))

    descriptors = instance.describe()
    descriptors.update({
        'reason': verdict.reason,
        'iterations': verdict.iterations,
        'r_history': list(verdict.r_history),
        'dp_distance': verdict.dp_distance,
        'normalization_slack': verdict.normalization_slack,
    })
    descriptors.update(_bound_descriptors(verdict.samples_total, n, config.k, config.eps))
    logger.debug("Trial %d (seed %d): %s (%s)", trial, seed, verdict.verdict.value, verdict.reason)
    return ReportRow(
        trial=trial,
        seed=seed,
        verdict=verdict.verdict.value,
        samples_divide=verdict.samples['divide'],
        samples_sieve=verdict.samples['sieve'],
        samples_mass=verdict.samples['mass'],
        samples_test=verdict.samples['test'],
        samples_total=verdict.samples_total,
        wall_ms=wall_ms,
        sweep_value=sweep_value,
        descriptors=descriptors,
    )


def _select_trial(config: ExperimentConfig, trial: int) -> ReportRow:
    seed = trial_seed(config.seed, trial)
    rng = RngStream(seed)
    instance = build_instance(config, rng.spawn(INSTANCE_STREAM))

    start = time.perf_counter()
    result = select_k(PmfSampler(instance.pmf), instance.pmf.n, config.eps, config.delta,
                      config.refine, rng, config.constants)
    wall_ms = _elapsed_ms(start, config.timing)

    descriptors = instance.describe()
    descriptors['K'] = result.K
    descriptors.update(_bound_descriptors(result.total_samples, instance.pmf.n, result.K, config.eps))
    descriptors['probes'] = [
        {'k': p.k, 'verdict': p.verdict.value, 'samples': p.samples, 'runs': p.runs, 'phase': p.phase}
        for p in result.probes
    ]
    totals = result.phase_totals
    return ReportRow(
        trial=trial,
        seed=seed,
        verdict=f"K={result.K}",
        samples_divide=totals.get('divide', 0),
        samples_sieve=totals.get('sieve', 0),
        samples_mass=totals.get('mass', 0),
        samples_test=totals.get('test', 0),
        samples_total=result.total_samples,
        wall_ms=wall_ms,
        descriptors=descriptors,
    )


def _gen_hard_trial(config: ExperimentConfig, pair: MomentMatchedPair, trial: int) -> ReportRow:
    seed = trial_seed(config.seed, trial)
    start = time.perf_counter()
    hard = generate_hard_pair(config.n, config.k, min(config.eps, MAX_HARD_WEIGHT),
                              RngStream(seed), config.constants, pair=pair)
    passed, errors, _ = check_hard_pair_shape(hard)
    descriptors = hard.diagnostics()
    descriptors['errors'] = errors
    return ReportRow(
        trial=trial,
        seed=seed,
        verdict='pass' if passed else 'fail',
        wall_ms=_elapsed_ms(start, config.timing),
        descriptors=descriptors,
    )


def _run_trials(config: ExperimentConfig, runner: Callable[[int], ReportRow]) -> List[ReportRow]:
    trials = range(config.trials)
    if config.jobs > 1 and config.trials > 1:
        with ThreadPoolExecutor(max_workers=config.jobs) as pool:
            return list(pool.map(runner, trials))
    return [runner(trial) for trial in trials]


def _mean(values: List[float]) -> float:
    return float(np.mean(values)) if values else 0.0


def _phase_means(rows: List[ReportRow]) -> Dict[str, float]:
    return {
        column: _mean([getattr(row, column) for row in rows])
        for column in ('samples_divide', 'samples_sieve', 'samples_mass', 'samples_test', 'samples_total')
    }


def _verdict_summary(rows: List[ReportRow]) -> Dict[str, Any]:
    summary: Dict[str, Any] = {'trials': len(rows)}
    if rows:
        summary['accept_rate'] = sum(row.verdict == 'accept' for row in rows) / len(rows)
        reasons: Dict[str, int] = {}
        for row in rows:
            reason = row.descriptors.get('reason', row.verdict)
            reasons[reason] = reasons.get(reason, 0) + 1
        summary['reasons'] = reasons
    summary['mean_samples'] = _phase_means(rows)
    ratios = [row.descriptors['bound_ratio'] for row in rows if 'bound_ratio' in row.descriptors]
    if ratios:
        summary['mean_bound_ratio'] = _mean(ratios)
    return summary


def log_log_slope(values: List[float], means: List[float]) -> Optional[float]:
    """Least-squares slope of log(mean) against log(value); None if undefined."""
    points = [(v, m) for v, m in zip(values, means) if v > 0 and m > 0]
    if len({v for v, _ in points}) < 2:
        return None
    x = np.log([v for v, _ in points])
    y = np.log([m for _, m in points])
    return float(np.polyfit(x, y, 1)[0])


def bench_summary(param: str, rows: List[ReportRow]) -> Dict[str, Any]:
    """
    Per-sweep-value means plus the log-log scaling slope of the total.

    Each group also reports mean_bound_ratio when its rows carry one, the
    mean ratio of samples used to sqrt(nk)/eps + k/eps^2 + sqrt(n)/eps^2.
    """
    values = sorted({row.sweep_value for row in rows})
    per_value = {}
    means = []
    for value in values:
        group = [row for row in rows if row.sweep_value == value]
        stats = _verdict_summary(group)
        per_value[repr(value)] = stats
        means.append(stats['mean_samples']['samples_total'])
    return {
        'sweep_param': param,
        'per_value': per_value,
        'log_log_slope': log_log_slope(values, means),
    }


def run_experiment(config: ExperimentConfig) -> ExperimentReport:
    """
    Run all trials of the configured mode.

    Writes <output>.csv and <output>.json when config.output is set.

    Raises:
        ValueError: on invalid parameters
        FileNotFoundError: if the instance file is missing
        RuntimeError: on a failed randomized procedure or broken accounting
    """
    logger.info("Running %s: n=%d, k=%d, eps=%g, trials=%d", config.mode, config.n, config.k,
                config.eps, config.trials)
    if config.mode == 'test':
        rows = _run_trials(config, partial(_test_trial, config))
        summary = _verdict_summary(rows)
    elif config.mode == 'select-k':
        rows = _run_trials(config, partial(_select_trial, config))
        selected: Dict[str, int] = {}
        for row in rows:
            selected[row.verdict] = selected.get(row.verdict, 0) + 1
        summary = {
            'trials': len(rows),
            'selected': selected,
            'mean_samples': _phase_means(rows),
            'mean_bound_ratio': _mean([row.descriptors['bound_ratio'] for row in rows]),
        }
    elif config.mode == 'gen-hard':
        pair = build_moment_matched_pair(config.n, config.k, config=config.constants)
        rows = _run_trials(config, partial(_gen_hard_trial, config, pair))
        summary = {
            'trials': len(rows),
            'shape_pass_rate': (sum(row.verdict == 'pass' for row in rows) / len(rows)) if rows else None,
            'mean_right_border_pairs': _mean([row.descriptors['right_border_pairs'] for row in rows]),
            'max_yes_mass_gap': max((row.descriptors['yes_mass_gap'] for row in rows), default=None),
        }
    else:
        rows = []
        for value in config.sweep_values:
            sub = replace(config.with_value(config.sweep_param, value), mode='test')
            runner = partial(_test_trial, sub, sweep_value=value)
            rows.extend(_run_trials(sub, runner))
        summary = bench_summary(config.sweep_param, rows)

    report = ExperimentReport(config=config.to_dict(), rows=rows, summary=summary, timing=config.timing)
    if config.output:
        report.write(config.output)
    return report


def hard_pair_payload(hard: HardPair, eps: float) -> Dict[str, Any]:
    """JSON document for gen-hard: n, k, eps, H, H_prime, diagnostics."""
    return {
        'n': hard.pair.n,
        'k': hard.pair.k,
        'eps': eps,
        'H': hard.H.mass.tolist(),
        'H_prime': hard.H_prime.mass.tolist(),
        'diagnostics': hard.diagnostics(),
    }


def hard_pair_checks(hard: HardPair) -> CheckReport:
    """Moment and shape checks for one generated pair."""
    report = CheckReport(title=f"Hard pair n={hard.pair.n}, k={hard.pair.k}, eps={hard.eps:g}")
    report.add_result(CheckResult.from_tuple("Moment identity", check_moment_identity(hard.pair)))
    report.add_result(CheckResult.from_tuple("Moment matching", check_moment_matching(hard.pair)))
    report.add_result(CheckResult.from_tuple("Pair shape", check_pair_shape(hard.pair)))
    report.add_result(CheckResult.from_tuple("Instance shape", check_hard_pair_shape(hard)))
    return report


def generate_hard(config: ExperimentConfig):
    """Single pair for the gen-hard command, seeded with config.seed."""
    weight = min(config.eps, MAX_HARD_WEIGHT)
    if weight < config.eps:
        logger.warning("Contamination weight capped at %g (eps=%g)", weight, config.eps)
    return generate_hard_pair(config.n, config.k, weight, RngStream(config.seed), config.constants)
