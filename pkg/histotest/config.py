"""
Configuration objects for histotest.

TesterConfig pins every constant the algorithms leave as "sufficiently
large"; ExperimentConfig is the resolved harness configuration (file values
merged with command-line overrides, see loader.py).
"""

from dataclasses import dataclass, field, asdict, replace
from typing import Any, Dict, Optional, Tuple


MODES = ('test', 'gen-hard', 'select-k', 'bench')
INSTANCES = ('uniform', 'random-khist', 'zigzag', 'hard-yes', 'hard-no', 'file')
SWEEP_PARAMS = ('n', 'k', 'eps')


@dataclass(frozen=True)
class TesterConfig:
    """Calibrated constants shared by the partition, sieve and tester modules."""
    c_sieve: float = 40.0
    c_test: float = 2000.0
    c_mass: float = 100.0
    c_divide: float = 18.0
    test_repetitions: int = 3
    test_threshold: float = 1.0 / 8.0
    max_iteration_factor: int = 10
    amplification: float = 9.0
    moment_c: float = 2.0
    moment_C: float = 40.0
    subdivide_budget: float = 10.0

    def with_overrides(self, overrides: Dict[str, Any]) -> 'TesterConfig':
        """Return a copy with the non-None entries of overrides applied."""
        known = {k: v for k, v in overrides.items() if v is not None}
        unknown = set(known) - set(asdict(self))
        if unknown:
            raise ValueError(f"Unknown tester constants: {', '.join(sorted(unknown))}")
        return replace(self, **known)


DEFAULT_CONFIG = TesterConfig()


@dataclass(frozen=True)
class ExperimentConfig:
    """Fully resolved experiment description."""
    mode: str = 'test'
    n: int = 1000
    k: int = 1
    eps: float = 0.25
    delta: float = 0.1
    trials: int = 1
    seed: int = 0
    instance: str = 'uniform'
    instance_path: Optional[str] = None
    zigzag_amplitude: float = 1.0
    refine: bool = False
    jobs: int = 1
    timing: bool = True
    sweep_param: Optional[str] = None
    sweep_values: Tuple[float, ...] = ()
    output: Optional[str] = None
    constants: TesterConfig = field(default_factory=TesterConfig)

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"Invalid mode '{self.mode}', expected one of {MODES}")
        if self.instance not in INSTANCES:
            raise ValueError(f"Invalid instance '{self.instance}', expected one of {INSTANCES}")
        if self.n < 1:
            raise ValueError(f"n must be positive, got {self.n}")
        if not 1 <= self.k <= self.n:
            raise ValueError(f"k must lie in [1, n], got k={self.k}, n={self.n}")
        if not 0 < self.eps < 1:
            raise ValueError(f"eps must lie in (0, 1), got {self.eps}")
        if not 0 < self.delta <= 1:
            raise ValueError(f"delta must lie in (0, 1], got {self.delta}")
        if self.trials < 0:
            raise ValueError(f"trials must be non-negative, got {self.trials}")
        if not 0 <= self.seed < 2 ** 64:
            raise ValueError(f"seed must be a 64-bit unsigned integer, got {self.seed}")
        if self.jobs < 1:
            raise ValueError(f"jobs must be at least 1, got {self.jobs}")
        if self.instance == 'file' and not self.instance_path:
            raise ValueError("instance 'file' requires instance_path")
        if self.mode == 'bench':
            if self.sweep_param not in SWEEP_PARAMS:
                raise ValueError(f"bench requires a sweep over one of {SWEEP_PARAMS}")
            if not self.sweep_values:
                raise ValueError("bench requires at least one sweep value")

    def with_value(self, name: str, value: float) -> 'ExperimentConfig':
        """Copy with a single sweep parameter replaced."""
        if name in ('n', 'k'):
            value = int(value)
        return replace(self, **{name: value})

    def to_dict(self) -> Dict[str, Any]:
        """Flatten for JSON provenance."""
        data = asdict(self)
        data['sweep_values'] = list(self.sweep_values)
        return data
