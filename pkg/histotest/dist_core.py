"""
Core distribution objects for histotest.

Probability vectors and measures over the domain [n] = {1, ..., n}, distances
restricted to index sets, seeded samplers and the uniform-mixing transform.
Indices exposed to callers are 1-based; arrays are stored 0-based.
"""

import logging
from contextlib import contextmanager
from dataclasses import dataclass, field
from functools import cached_property
from typing import Dict, Iterable, Iterator, List, Optional, Protocol, Sequence, Tuple

import numpy as np

logger = logging.getLogger(__name__)

PMF_TOLERANCE = 1e-9


class RngStream:
    """
    Seeded counter-based random stream.

    Wraps a numpy Generator over a Philox bit generator so that identical
    seeds give identical draw sequences. Streams are single-owner; parallel
    trials use spawn() to obtain independent streams.
    """

    def __init__(self, seed: int):
        if not 0 <= int(seed) < 2 ** 64:
            raise ValueError(f"seed must be a 64-bit unsigned integer, got {seed}")
        self.seed = int(seed)
        self.generator = np.random.Generator(np.random.Philox(self.seed))

    def spawn(self, index: int) -> 'RngStream':
        """Independent stream seeded with seed XOR index."""
        return RngStream(self.seed ^ int(index))

    def integers(self, low: int, high: int, size: Optional[int] = None) -> np.ndarray:
        """Integers in [low, high)."""
        return self.generator.integers(low, high, size=size)

    def random(self, size: Optional[int] = None) -> np.ndarray:
        return self.generator.random(size)

    def poisson(self, lam, size=None):
        return self.generator.poisson(lam, size=size)

    def choice(self, n: int, size: int, p: Optional[np.ndarray] = None, replace: bool = True) -> np.ndarray:
        return self.generator.choice(n, size=size, p=p, replace=replace)

    def binomial(self, m: int, prob: float) -> int:
        return int(self.generator.binomial(m, prob))

    def multinomial(self, m: int, pvals: np.ndarray) -> np.ndarray:
        return self.generator.multinomial(m, pvals)

    def hypergeometric(self, counts: np.ndarray, size: int) -> np.ndarray:
        """Counts of a uniform random sub-multiset of the given size."""
        return self.generator.multivariate_hypergeometric(counts, size)

    def __repr__(self) -> str:
        return f"RngStream(seed={self.seed})"


@dataclass(frozen=True)
class Interval:
    """Closed interval [lo, hi] of domain indices (1-based)."""
    lo: int
    hi: int

    def __post_init__(self):
        if self.lo < 1 or self.hi < self.lo:
            raise ValueError(f"Invalid interval [{self.lo}, {self.hi}]")

    @property
    def length(self) -> int:
        return self.hi - self.lo + 1

    def contains(self, i: int) -> bool:
        return self.lo <= i <= self.hi

    def check_within(self, n: int) -> None:
        if self.hi > n:
            raise ValueError(f"Interval [{self.lo}, {self.hi}] exceeds domain [1, {n}]")

    def __str__(self) -> str:
        return f"[{self.lo}, {self.hi}]"


def _as_vector(mass: Iterable[float]) -> np.ndarray:
    vector = np.array(mass, dtype=np.float64).ravel()
    if vector.size == 0:
        raise ValueError("Mass vector must be non-empty")
    if not np.all(np.isfinite(vector)):
        raise ValueError("Mass vector contains non-finite entries")
    if np.any(vector < 0):
        first = int(np.flatnonzero(vector < 0)[0]) + 1
        raise ValueError(f"Mass vector has a negative entry at index {first}")
    vector.setflags(write=False)
    return vector


@dataclass(frozen=True, eq=False)
class Measure:
    """Non-negative vector over [n] with arbitrary total mass."""
    mass: np.ndarray = field(repr=False)

    def __post_init__(self):
        object.__setattr__(self, 'mass', _as_vector(self.mass))

    @property
    def n(self) -> int:
        return int(self.mass.size)

    @cached_property
    def total(self) -> float:
        # numpy sums float64 pairwise
        return float(np.sum(self.mass))

    def __getitem__(self, i: int) -> float:
        """Mass of 1-based index i."""
        return float(self.mass[i - 1])

    def interval_mass(self, interval: Interval) -> float:
        return float(np.sum(self.mass[interval.lo - 1:interval.hi]))

    def normalized(self) -> 'Pmf':
        if self.total <= 0:
            raise ValueError("Cannot normalize a zero measure")
        return Pmf(self.mass / self.total)


@dataclass(frozen=True, eq=False)
class Pmf(Measure):
    """Probability mass function over [n]."""

    def __post_init__(self):
        super().__post_init__()
        if abs(self.total - 1.0) > PMF_TOLERANCE:
            raise ValueError(f"Pmf entries must sum to 1, got {self.total!r}")

    @property
    def breakpoints(self) -> int:
        """Number of i with p(i) != p(i+1)."""
        return int(np.count_nonzero(np.diff(self.mass) != 0))

    @property
    def pieces(self) -> int:
        return self.breakpoints + 1

    @cached_property
    def alias(self) -> 'AliasTable':
        return AliasTable(self.mass)


@dataclass(frozen=True, eq=False)
class SampleSet:
    """Ordered i.i.d. draws (1-based indices) from a distribution on [n]."""
    draws: np.ndarray = field(repr=False)
    n: int

    def __post_init__(self):
        draws = np.asarray(self.draws, dtype=np.int64).ravel()
        if draws.size and (draws.min() < 1 or draws.max() > self.n):
            raise ValueError(f"Sample outside domain [1, {self.n}]")
        draws.setflags(write=False)
        object.__setattr__(self, 'draws', draws)

    def __len__(self) -> int:
        return int(self.draws.size)

    def counts(self) -> np.ndarray:
        """Occurrence count per domain element (0-based array of length n)."""
        return np.bincount(self.draws - 1, minlength=self.n)

    def split(self, parts: int) -> List['SampleSet']:
        """Split into equal consecutive parts; leftovers are discarded."""
        size = len(self) // parts
        return [SampleSet(self.draws[i * size:(i + 1) * size], self.n) for i in range(parts)]


def count_pieces(values: Sequence[float]) -> int:
    """Number of maximal constant runs in a vector."""
    values = np.asarray(values)
    if values.size == 0:
        return 0
    return int(np.count_nonzero(np.diff(values) != 0)) + 1


def _index_mask(indices: Optional[Iterable[int]], n: int) -> np.ndarray:
    if indices is None:
        return np.ones(n, dtype=bool)
    if isinstance(indices, np.ndarray) and indices.dtype == bool:
        if indices.size != n:
            raise ValueError(f"Index mask has length {indices.size}, expected {n}")
        return indices
    index = np.fromiter(indices, dtype=np.int64)
    if index.size and (index.min() < 1 or index.max() > n):
        raise ValueError(f"Index set not contained in [1, {n}]")
    mask = np.zeros(n, dtype=bool)
    mask[index - 1] = True
    return mask


def _check_dimensions(p: Measure, q: Measure) -> None:
    if p.n != q.n:
        raise ValueError(f"Dimension mismatch: {p.n} vs {q.n}")


def tv_distance(p: Measure, q: Measure, S: Optional[Iterable[int]] = None) -> float:
    """
    Total variation distance restricted to S.

    Args:
        p, q: Measures on the same domain
        S: 1-based indices or boolean mask (default: whole domain)

    Returns:
        (1/2) * sum over S of |p(i) - q(i)|
    """
    _check_dimensions(p, q)
    mask = _index_mask(S, p.n)
    return 0.5 * float(np.sum(np.abs(p.mass[mask] - q.mass[mask])))


def chi_square_div(p: Measure, q: Measure, S: Optional[Iterable[int]] = None) -> float:
    """
    Chi-square divergence restricted to S: sum over S of (p_i - q_i)^2 / q_i.

    Raises:
        ValueError: on dimension mismatch or if q vanishes somewhere on S
    """
    _check_dimensions(p, q)
    mask = _index_mask(S, p.n)
    reference = q.mass[mask]
    if np.any(reference <= 0):
        raise ValueError("Chi-square reference measure is zero on the index set; restrict S")
    return float(np.sum((p.mass[mask] - reference) ** 2 / reference))


def mix_with_uniform(p: Pmf) -> Pmf:
    """p'(i) = p(i)/2 + 1/(2n); every entry of p' is at least 1/(2n)."""
    return Pmf(p.mass / 2.0 + 1.0 / (2.0 * p.n))


def make_khistogram(n: int, pieces: Sequence[Tuple[Interval, float]]) -> Pmf:
    """
    Build a piecewise-constant Pmf.

    Args:
        n: Domain size
        pieces: (interval, level) pairs whose intervals partition [n]

    Raises:
        ValueError: if intervals do not partition [n], a level is negative,
            or the total mass differs from 1
    """
    ordered = sorted(pieces, key=lambda piece: piece[0].lo)
    expected = 1
    mass = np.empty(n, dtype=np.float64)
    for interval, level in ordered:
        if interval.lo != expected:
            raise ValueError(f"Intervals do not partition [1, {n}]: gap or overlap at {expected}")
        interval.check_within(n)
        if level < 0:
            raise ValueError(f"Negative level {level} on {interval}")
        mass[interval.lo - 1:interval.hi] = level
        expected = interval.hi + 1
    if expected != n + 1:
        raise ValueError(f"Intervals do not partition [1, {n}]: uncovered from {expected}")
    pmf = Pmf(mass)
    logger.debug("Built %d-piece histogram on [1, %d]", pmf.pieces, n)
    return pmf


class AliasTable:
    """Vose alias table; O(n) build, O(1) per draw."""

    def __init__(self, probs: np.ndarray):
        size = len(probs)
        scaled = np.asarray(probs, dtype=np.float64) * size
        self.prob = np.ones(size, dtype=np.float64)
        self.alias = np.arange(size, dtype=np.int64)

        small = [i for i in range(size) if scaled[i] < 1.0]
        large = [i for i in range(size) if scaled[i] >= 1.0]
        while small and large:
            s = small.pop()
            g = large.pop()
            self.prob[s] = scaled[s]
            self.alias[s] = g
            scaled[g] = scaled[g] - (1.0 - scaled[s])
            if scaled[g] < 1.0:
                small.append(g)
            else:
                large.append(g)
        # leftovers are 1 up to rounding

    def draw(self, m: int, rng: RngStream) -> np.ndarray:
        """m draws as 0-based indices."""
        column = rng.integers(0, len(self.prob), size=m)
        coin = rng.random(m)
        return np.where(coin < self.prob[column], column, self.alias[column])


class Sampler(Protocol):
    """
    Sample access to an unknown distribution on [n].

    draw returns the ordered draws; draw_counts returns only the occurrence
    count of each element among m draws, which is all most consumers need.
    """
    n: int

    def draw(self, m: int, rng: RngStream) -> SampleSet:
        ...

    def draw_counts(self, m: int, rng: RngStream) -> np.ndarray:
        ...


class PmfSampler:
    """Sampler over an explicit Pmf via its alias table."""

    def __init__(self, pmf: Pmf):
        self.pmf = pmf
        self.n = pmf.n
        # multinomial needs sum(pvals[:-1]) <= 1
        self._pvals = pmf.mass / pmf.total

    def draw(self, m: int, rng: RngStream) -> SampleSet:
        if m < 0:
            raise ValueError(f"Sample count must be non-negative, got {m}")
        return SampleSet(self.pmf.alias.draw(m, rng) + 1, self.n)

    def draw_counts(self, m: int, rng: RngStream) -> np.ndarray:
        """Multinomial(m, p) counts, 0-based array of length n."""
        if m < 0:
            raise ValueError(f"Sample count must be non-negative, got {m}")
        return rng.multinomial(int(m), self._pvals)


class UniformMixSampler:
    """
    Samples from (p + u_n)/2 given sample access to p.

    Each output is a draw of p with probability 1/2 and a uniform element
    otherwise. draw_counts splits m into Binomial(m, 1/2) draws of p and the
    rest from the uniform distribution.
    """

    def __init__(self, inner: Sampler):
        self.inner = inner
        self.n = inner.n
        self._uniform = np.full(self.n, 1.0 / self.n)

    def draw(self, m: int, rng: RngStream) -> SampleSet:
        base = self.inner.draw(m, rng).draws
        keep = rng.random(m) < 0.5
        uniform = rng.integers(1, self.n + 1, size=m)
        return SampleSet(np.where(keep, base, uniform), self.n)

    def draw_counts(self, m: int, rng: RngStream) -> np.ndarray:
        from_p = rng.binomial(int(m), 0.5)
        return self.inner.draw_counts(from_p, rng) + rng.multinomial(int(m) - from_p, self._uniform)


class TallySampler:
    """Counts every draw, attributed to the currently active phase."""

    def __init__(self, inner: Sampler):
        self.inner = inner
        self.n = inner.n
        self.counts: Dict[str, int] = {}
        self._phase = 'other'

    @contextmanager
    def phase(self, name: str) -> Iterator[None]:
        previous = self._phase
        self._phase = name
        try:
            yield
        finally:
            self._phase = previous

    def draw(self, m: int, rng: RngStream) -> SampleSet:
        self.counts[self._phase] = self.counts.get(self._phase, 0) + int(m)
        return self.inner.draw(m, rng)

    def draw_counts(self, m: int, rng: RngStream) -> np.ndarray:
        self.counts[self._phase] = self.counts.get(self._phase, 0) + int(m)
        return self.inner.draw_counts(m, rng)

    @property
    def total(self) -> int:
        return sum(self.counts.values())


def sample(p: Pmf, m: int, rng: RngStream) -> SampleSet:
    """m i.i.d. draws from p; deterministic given the stream state."""
    return PmfSampler(p).draw(m, rng)
