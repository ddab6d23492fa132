"""Numerical experiments: small-value heights, counting error terms, dilates, sequences."""

from __future__ import annotations

import io
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from ._util import derive_seed, fmt_float, parallel_map
from .enumeration import Region, band_for, count_region, form_solutions, iter_ball, pick_min_height
from .forms import QuadraticForm, evaluate, random_form
from .lattice import Lattice, LatticeSampler
from .volume import c_q_estimate, estimate_volume

CSV_HEADER = "parameter,observed,reference,residual,seed\n"


@dataclass(frozen=True)
class ExperimentRecord:
    parameter: float
    observed: float
    reference: float
    seed: int
    residual: float = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "residual", self.observed - self.reference)

    def csv_row(self) -> str:
        return ",".join([fmt_float(self.parameter), fmt_float(self.observed), fmt_float(self.reference),
                         fmt_float(self.residual), str(int(self.seed))]) + "\n"


def records_csv(records: Sequence[ExperimentRecord]) -> str:
    buf = io.StringIO()
    buf.write(CSV_HEADER)
    for r in records:
        buf.write(r.csv_row())
    return buf.getvalue()


@dataclass(frozen=True)
class FitResult:
    slope: float
    intercept: float
    r_squared: float
    points_used: int

    def to_dict(self) -> dict:
        return {"slope": self.slope, "intercept": self.intercept, "r_squared": self.r_squared,
                "points_used": self.points_used}


def fit_loglog(pairs) -> FitResult:
    """Least squares line through (log x, log y)."""
    pairs = list(pairs)
    if len(pairs) < 3:
        raise ValueError("need at least 3 points")
    x, y = np.asarray(pairs, dtype=float).T
    if np.any(x <= 0) or np.any(y <= 0):
        raise ValueError("log-log fit needs strictly positive data")
    lx, ly = np.log(x), np.log(y)
    if np.ptp(lx) == 0:
        raise ValueError("abscissae are constant")
    slope, intercept = np.polyfit(lx, ly, 1)
    resid = ly - (slope * lx + intercept)
    sst = float(np.sum((ly - ly.mean()) ** 2))
    r2 = 1.0 if sst == 0 else max(0.0, 1.0 - float(np.sum(resid**2)) / sst)
    return FitResult(float(slope), float(intercept), r2, len(pairs))


# ----------------------------------------------------------------------------
# small values


@dataclass
class SmallValuesResult:
    records: list[ExperimentRecord]
    fit: Optional[FitResult]
    censored: list[int]
    solutions: dict[int, tuple[int, ...]]


def min_heights(Q: QuadraticForm, eps_list: Sequence[float], mode: str = "two_sided", T_max: float = 1000.0):
    """Minimal heights for every eps in one pass of doubling search radii.

    Returns {index: x} for the eps values solved within T_max.
    """
    if not Q.is_indefinite:
        raise ValueError("needs an indefinite form")
    lo, hi = band_for(max(eps_list), mode)
    found: dict[int, np.ndarray] = {}
    R = min(4.0, T_max)
    while True:
        X = form_solutions(Q, lo, hi, R)
        v = evaluate(Q, X.astype(float)) if len(X) else np.zeros(0)
        for i, eps in enumerate(eps_list):
            if i in found:
                continue
            l, h = band_for(eps, mode)
            x = pick_min_height(X[(l < v) & (v < h)])
            if x is not None:
                found[i] = x
        if len(found) == len(eps_list) or R >= T_max:
            return found
        R = min(2 * R, T_max)


def small_values_experiment(Q: QuadraticForm, j_max: int, mode: str = "two_sided", T_max: float = 1000.0,
                            seed: int = 0) -> SmallValuesResult:
    """Heights h_j of the shortest x with |Q(x)| < 2^-j, and the slope of log h_j vs j log 2.

    The reference column is eps^(-1/(n-2)). Censored j (no solution within
    T_max) are recorded with observed = nan and left out of the fit.
    """
    if j_max < 6:
        raise ValueError("j_max must be >= 6")
    n = Q.dim
    eps = [2.0**-j for j in range(1, j_max + 1)]
    found = min_heights(Q, eps, mode, T_max)
    records, pairs, censored, sols = [], [], [], {}
    for i, e in enumerate(eps):
        ref = e ** (-1.0 / (n - 2))
        if i in found:
            h = float(np.linalg.norm(found[i].astype(float)))
            pairs.append((1.0 / e, h))
            sols[i + 1] = tuple(int(v) for v in found[i])
        else:
            h = math.nan
            censored.append(i + 1)
        records.append(ExperimentRecord(e, h, ref, seed))
    fit = fit_loglog(pairs) if len(pairs) >= 3 else None
    return SmallValuesResult(records, fit, censored, sols)


def signature_for(n: int) -> tuple[int, int]:
    """Default signature for random-form ensembles: (n-1, 1)."""
    return n - 1, 1


def form_seed(master_seed: int, i: int) -> int:
    return derive_seed(master_seed, i)


def small_values_ensemble(n: int, forms: int, j_max: int, master_seed: int, mode: str = "two_sided",
                          T_max: float = 1000.0, signature: Optional[tuple[int, int]] = None,
                          threads: int = 1) -> list[SmallValuesResult]:
    p, q = signature or signature_for(n)
    seeds = [form_seed(master_seed, i) for i in range(forms)]
    return parallel_map(lambda s: small_values_experiment(random_form(p, q, s), j_max, mode, T_max, s),
                        seeds, threads)


# ----------------------------------------------------------------------------
# counting error term


@dataclass
class ErrorTermResult:
    records: list[ExperimentRecord]
    fit: Optional[FitResult]
    c_q: float


def form_counts(Q: QuadraticForm, a: float, b: float, T_grid: Sequence[float]) -> list[int]:
    """N(Q, a, b, T) for each T, from a single enumeration at max(T_grid)."""
    X = form_solutions(Q, a, b, max(T_grid)).astype(float)
    norms = np.sqrt(np.einsum("ij,ij->i", X, X))
    return [int(np.count_nonzero(norms <= T + 1e-9)) for T in T_grid]


def geometric_grid(lo: float, hi: float, points: int) -> list[float]:
    return [float(v) for v in np.geomspace(lo, hi, points)]


def error_term_experiment(Q: QuadraticForm, a: float, b: float, T_grid: Sequence[float], c_q: float,
                          seed: int = 0) -> ErrorTermResult:
    """Compare N(Q,a,b,T) with c_Q (b-a) T^(n-2) and fit the growth of |residual|."""
    if not a < b:
        raise ValueError("need a < b")
    T_grid = [float(t) for t in T_grid]
    if len(T_grid) < 6:
        raise ValueError("T_grid needs at least 6 points")
    n = Q.dim
    counts = form_counts(Q, a, b, T_grid)
    records = [ExperimentRecord(T, float(N), c_q * (b - a) * T ** (n - 2), seed) for T, N in zip(T_grid, counts)]
    pairs = [(r.parameter, abs(r.residual)) for r in records if r.residual != 0]
    fit = fit_loglog(pairs) if len(pairs) >= 3 else None
    return ErrorTermResult(records, fit, c_q)


def error_term_ensemble(n: int, forms: int, a: float, b: float, T_grid: Sequence[float], master_seed: int,
                        samples: int = 10**6, signature: Optional[tuple[int, int]] = None,
                        threads: int = 1) -> list[ErrorTermResult]:
    """error_term_experiment on random forms, each with its own c_Q estimate."""
    p, q = signature or signature_for(n)
    seeds = [form_seed(master_seed, i) for i in range(forms)]

    def one(s):
        Q = random_form(p, q, s)
        c = c_q_estimate(Q, a, b, T_grid, samples, seed=s % 2**32).c_q
        return error_term_experiment(Q, a, b, T_grid, c, s)

    return parallel_map(one, seeds, threads)


# ----------------------------------------------------------------------------
# dilates and sequences of sets


def dilate_counts(L: Lattice, A: Region, t_grid: Sequence[float]) -> list[int]:
    """N(L, tA) for every t, enumerating once at the largest dilate."""
    tmax = max(t_grid)
    counts = np.zeros(len(t_grid), dtype=np.int64)
    for _, pts in iter_ball(L, A.bounding_radius * tmax):
        if A.gauge is not None:
            # boundary slack matches the closed-set convention of ``contains``
            gs = np.sort(A.gauge(pts))
            counts += np.searchsorted(gs, np.asarray(t_grid) * (1 + 1e-12) + 1e-9, side="right")
            continue
        for i, t in enumerate(t_grid):
            counts[i] += np.count_nonzero(A.contains(pts / t))
    return [int(c) for c in counts]


@dataclass
class DilatesResult:
    records: list[ExperimentRecord]
    passed: list[bool]
    seeds: list[int]

    @property
    def pass_fraction(self) -> float:
        return float(np.mean(self.passed))


def dilates_check(counts, t_grid, n: int, delta: float) -> bool:
    """|N - t^n| < t^(2n/3 + delta) on the upper half of the grid."""
    half = len(t_grid) // 2
    return all(abs(N - t**n) < t ** (2 * n / 3 + delta) for t, N in zip(t_grid[half:], counts[half:]))


def dilates_experiment(sampler: LatticeSampler, A: Region, t_grid: Sequence[float], delta: float = 0.5,
                       lattices: int = 100, master_seed: int = 0, threads: int = 1,
                       volume_samples: int = 10**6) -> DilatesResult:
    n = A.dim
    if n < 4:
        raise ValueError("dilates experiment needs n >= 4")
    if sampler.n != n:
        raise ValueError("sampler and region dimensions differ")
    t_grid = sorted(float(t) for t in t_grid)
    if t_grid[0] <= 0:
        raise ValueError("t must be positive")
    vol = estimate_volume(A, volume_samples, master_seed % 2**32)
    if abs(vol.value - 1.0) > 0.01 + 3 * vol.std_error:
        raise ValueError(f"region volume {vol.value:.4f} is not 1")
    seeds = [derive_seed(master_seed, i) for i in range(lattices)]
    all_counts = parallel_map(lambda s: dilate_counts(sampler(s), A, t_grid), seeds, threads)
    records, passed = [], []
    for s, counts in zip(seeds, all_counts):
        records.extend(ExperimentRecord(t, float(N), t**n, s) for t, N in zip(t_grid, counts))
        passed.append(dilates_check(counts, t_grid, n, delta))
    return DilatesResult(records, passed, seeds)


def looks_summable(f: Callable[[int], float], k_start: int = 1000) -> bool:
    """Heuristic test that sum f(k)^-2 converges.

    Accepts when the block sum over (K, 2K] is below 1/log K; p-series with
    p > 1 and k log^2 k style terms pass, constants and sqrt(k) fail.
    """
    K = k_start
    block = math.fsum(float(f(k)) ** -2 for k in range(K + 1, 2 * K + 1))
    return block < 1.0 / math.log(K)


@dataclass
class SequencesResult:
    records: list[ExperimentRecord]
    last_violation: list[int]  # 0 = never violated
    seeds: list[int]

    def fraction_clean_from(self, k0: int) -> float:
        """Fraction of lattices with no violation at any k >= k0."""
        return float(np.mean([v < k0 for v in self.last_violation]))


def sequence_violations(L: Lattice, regions: Sequence[Region], volumes: Sequence[float], f, seed: int = 0):
    records, last = [], 0
    for k, (R, a) in enumerate(zip(regions, volumes), start=1):
        N = count_region(L, R)
        records.append(ExperimentRecord(k, float(N), a, seed))
        if abs(N - a) >= math.sqrt(a) * f(k):
            last = k
    return records, last


def sequences_experiment(sampler: LatticeSampler, B: Callable[[int], Region], f: Callable[[int], float],
                         k_max: int, lattices: int = 100, master_seed: int = 0, threads: int = 1,
                         check_summable: bool = True) -> SequencesResult:
    """For each lattice, the largest k <= k_max with |N(L,B_k) - |B_k|| >= |B_k|^(1/2) f(k)."""
    if sampler.n < 3:
        raise ValueError("sequences experiment needs n >= 3")
    if check_summable and not looks_summable(f):
        raise ValueError("sum of f(k)^-2 does not appear to converge")
    regions = [B(k) for k in range(1, k_max + 1)]
    volumes = [estimate_volume(R).value for R in regions]
    seeds = [derive_seed(master_seed, i) for i in range(lattices)]
    out = parallel_map(lambda s: sequence_violations(sampler(s), regions, volumes, f, s), seeds, threads)
    records = [r for recs, _ in out for r in recs]
    return SequencesResult(records, [last for _, last in out], seeds)
