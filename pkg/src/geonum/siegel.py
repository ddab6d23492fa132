"""Siegel transforms of indicator functions and their statistics over random lattices."""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional, Sequence

import numpy as np

from ._util import parallel_map, trial_seeds
from .enumeration import Region, ball_volume, count_region
from .lattice import Lattice, LatticeSampler

ZETA_TERMS = 10**7


@lru_cache(maxsize=None)
def zeta(s: float) -> float:
    """Riemann zeta for real s >= 2: direct sum plus Euler-Maclaurin tail."""
    if s < 2:
        raise ValueError("zeta series used here needs s >= 2")
    N = ZETA_TERMS
    total = 0.0
    # sum small terms first, in blocks, to limit rounding error
    for start in range(N, 0, -10**6):
        k = np.arange(max(start - 10**6, 0) + 1, start + 1, dtype=float)
        total += math.fsum((k ** -s)[::-1])
    tail = N ** (1 - s) / (s - 1) - 0.5 * N**-s + s * N ** (-s - 1) / 12
    return total + tail


def c_n(n: int) -> float:
    """Random Minkowski constant 8 zeta(n-1) / zeta(n)."""
    if n < 3:
        raise ValueError("C_n is defined for n >= 3")
    return 8.0 * zeta(n - 1) / zeta(n)


def symmetrization_radius(a: float, n: int) -> float:
    """Radius of the centered ball with volume a."""
    if a <= 0:
        raise ValueError("volume must be positive")
    return (a / ball_volume(n, 1.0)) ** (1.0 / n)


@dataclass(frozen=True)
class SampleStats:
    trials: int
    mean: float
    variance: float
    min: float
    max: float

    @property
    def std_error(self) -> float:
        return math.sqrt(self.variance / self.trials)

    @property
    def second_moment(self) -> float:
        """Plug-in estimate of E[X^2] = var + mean^2."""
        return self.variance + self.mean**2

    @classmethod
    def from_values(cls, values: Sequence[float]) -> "SampleStats":
        v = np.asarray(values, dtype=float)
        if v.size < 2:
            raise ValueError("need at least 2 trials")
        mean = float(v.mean())
        var = float(np.sum((v - mean) ** 2) / (v.size - 1))
        return cls(int(v.size), mean, var, float(v.min()), float(v.max()))

    def merge(self, other: "SampleStats") -> "SampleStats":
        """Combine two independent summaries (Chan et al. pairwise update)."""
        n = self.trials + other.trials
        d = other.mean - self.mean
        mean = self.mean + d * other.trials / n
        m2 = self.variance * (self.trials - 1) + other.variance * (other.trials - 1) + d * d * self.trials * other.trials / n
        return SampleStats(n, mean, m2 / (n - 1), min(self.min, other.min), max(self.max, other.max))

    def to_dict(self) -> dict:
        return {"trials": self.trials, "mean": self.mean, "variance": self.variance,
                "std_error": self.std_error, "min": self.min, "max": self.max}


def siegel_transform(L: Lattice, R: Region) -> int:
    """Sum of the indicator of R over nonzero lattice vectors."""
    return count_region(L, R)


def region_volume(R: Region) -> float:
    if R.volume_hint is not None:
        return float(R.volume_hint)
    from .volume import estimate_volume

    return estimate_volume(R).value


def sample_counts(sampler: LatticeSampler, R: Region, trials: int, master_seed: int,
                  threads: int = 1) -> tuple[list[int], np.ndarray]:
    """(seeds, counts) for ``trials`` independent lattices, in trial order."""
    if sampler.n != R.dim:
        raise ValueError("sampler and region dimensions differ")
    seeds = trial_seeds(master_seed, trials)
    counts = parallel_map(lambda s: siegel_transform(sampler(s), R), seeds, threads)
    return seeds, np.asarray(counts, dtype=np.int64)


def mean_variance(sampler: LatticeSampler, R: Region, trials: int, master_seed: int,
                  threads: int = 1) -> SampleStats:
    """Monte Carlo mean and variance of the lattice count in R.

    Targets: mean close to |R|, variance at most C_n |R|.
    """
    if trials < 2:
        raise ValueError("trials must be >= 2")
    _, counts = sample_counts(sampler, R, trials, master_seed, threads)
    return SampleStats.from_values(counts)


def binomial_stderr(p: float, trials: int) -> float:
    return math.sqrt(max(p * (1 - p), 0.0) / trials)


def hole_probability(sampler: LatticeSampler, R: Region, trials: int, master_seed: int,
                     threads: int = 1) -> float:
    """Fraction of sampled lattices with no nonzero point in R."""
    if trials < 100:
        raise ValueError("trials must be >= 100")
    _, counts = sample_counts(sampler, R, trials, master_seed, threads)
    return float(np.mean(counts == 0))


def concentration_tail(sampler: LatticeSampler, R: Region, M: float, trials: int, master_seed: int,
                       threads: int = 1, volume: Optional[float] = None) -> float:
    """Fraction of trials with |count - |R|| > M |R|^(1/2)."""
    if not M > 0:
        raise ValueError("M must be positive")
    if trials < 2:
        raise ValueError("trials must be >= 2")
    a = region_volume(R) if volume is None else volume
    _, counts = sample_counts(sampler, R, trials, master_seed, threads)
    return float(np.mean(np.abs(counts - a) > M * math.sqrt(a)))


def minkowski_bound(n: int, a: float) -> float:
    return c_n(n) / a


def chebyshev_bound(n: int, M: float) -> float:
    return c_n(n) / M**2
