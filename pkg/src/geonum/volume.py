"""Lebesgue volumes of balls and quadratic shells; counting constants c_Q and c_P."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .enumeration import QuadShell, Region, ball_volume, slice_intervals, _prefix_coefficients, _slice_axis
from .forms import QuadraticForm, evaluate

CHUNK = 1_000_000


@dataclass(frozen=True)
class VolumeEstimate:
    value: float
    std_error: float
    samples: int
    method: str  # closed_form | monte_carlo | slice | thin_shell

    def to_dict(self) -> dict:
        return {"value": self.value, "std_error": self.std_error, "samples": self.samples, "method": self.method}


def uniform_in_ball(rng: np.random.Generator, n: int, radius: float, size: int) -> np.ndarray:
    d = rng.standard_normal((size, n))
    d /= np.linalg.norm(d, axis=1, keepdims=True)
    r = radius * rng.random(size) ** (1.0 / n)
    return d * r[:, None]


def mc_volume(R: Region, samples: int = 10**6, seed: int = 0) -> VolumeEstimate:
    """Hit-or-miss estimate of |R| from uniform samples in its bounding ball."""
    if samples < 10**4:
        raise ValueError("samples must be >= 10^4")
    rng = np.random.default_rng(seed)
    hits = 0
    left = samples
    while left:
        m = min(left, CHUNK)
        hits += int(np.count_nonzero(R.contains(uniform_in_ball(rng, R.dim, R.bounding_radius, m))))
        left -= m
    vb = ball_volume(R.dim, R.bounding_radius)
    p = hits / samples
    return VolumeEstimate(p * vb, vb * math.sqrt(p * (1 - p) / samples), samples, "monte_carlo")


def _interval_length(left, right, s):
    ok = ~np.isnan(left)
    lo = np.maximum(np.where(ok, left, 0.0), -s)
    hi = np.minimum(np.where(ok, right, 0.0), s)
    return np.where(ok, np.maximum(hi - lo, 0.0), 0.0)


def shell_volume(Q: QuadraticForm, a: float, b: float, T: float, samples: int = 10**6, seed: int = 0) -> VolumeEstimate:
    """|{a < Q < b} intersected with B(0, T)| by conditional Monte Carlo.

    A uniform point of the (n-1)-ball is drawn for all coordinates but one;
    the length of the admissible segment along the remaining coordinate is
    computed exactly. Far lower variance than hit-or-miss on thin shells.
    """
    if not a < b:
        raise ValueError("need a < b")
    n = Q.dim
    axis = _slice_axis(Q)
    rng = np.random.default_rng(seed)
    total = 0.0
    total2 = 0.0
    left = samples
    while left:
        m = min(left, CHUNK)
        P = uniform_in_ball(rng, n - 1, T, m)
        s = np.sqrt(np.maximum(T * T - np.einsum("ij,ij->i", P, P), 0.0))
        g, beta, gamma, _ = _prefix_coefficients(Q, P, axis)
        length = sum(_interval_length(l, r, s) for l, r in slice_intervals(g, beta, gamma, a, b))
        total += float(length.sum())
        total2 += float((length**2).sum())
        left -= m
    mean = total / samples
    var = max(total2 / samples - mean * mean, 0.0) * samples / (samples - 1)
    vb = ball_volume(n - 1, T)
    return VolumeEstimate(vb * mean, vb * math.sqrt(var / samples), samples, "slice")


def estimate_volume(R: Region, samples: int = 10**6, seed: int = 0) -> VolumeEstimate:
    """Closed form when known, otherwise the best available Monte Carlo estimator."""
    if R.volume_hint is not None:
        return VolumeEstimate(float(R.volume_hint), 0.0, 0, "closed_form")
    if R.kind == "shell":
        p = R.params
        return shell_volume(p["form"], p["a"], p["b"], p["T"], samples, seed)
    return mc_volume(R, samples, seed)


@dataclass(frozen=True)
class CqEstimate:
    c_q: float
    T_grid: tuple[float, ...]
    volumes: tuple[VolumeEstimate, ...]
    normalized: tuple[float, ...]
    residuals: tuple[float, ...]

    def rows(self):
        for T, v, z in zip(self.T_grid, self.volumes, self.normalized):
            yield T, v.value, v.std_error, z


def c_q_estimate(Q: QuadraticForm, a: float, b: float, T_grid, samples: int = 10**6, seed: int = 0) -> CqEstimate:
    """Fit |Q^{-1}(a,b) ∩ B(0,T)| ≈ c_Q (b-a) T^(n-2).

    The constant is the mean of volume / ((b-a) T^(n-2)) over the upper half
    of the grid; residuals are reported for every grid point.
    """
    T_grid = tuple(float(t) for t in T_grid)
    if len(T_grid) < 4 or any(t2 <= t1 for t1, t2 in zip(T_grid, T_grid[1:])) or T_grid[0] <= 0:
        raise ValueError("T_grid must be positive, increasing, and have >= 4 points")
    if not a < b:
        raise ValueError("need a < b")
    n = Q.dim
    vols = tuple(shell_volume(Q, a, b, T, samples, seed + i) for i, T in enumerate(T_grid))
    norm = tuple(v.value / ((b - a) * T ** (n - 2)) for v, T in zip(vols, T_grid))
    top = norm[len(norm) // 2 :]
    c = float(np.mean(top))
    return CqEstimate(c, T_grid, vols, norm, tuple(z - c for z in norm))


def c_p_surface(P: QuadraticForm, eta: float = 1e-3, samples: int = 10**6, seed: int = 0) -> VolumeEstimate:
    """Thin-shell estimate of the level-set integral of 1/|grad P| over {P=0} ∩ B(0,1).

    Uses |{|P| < eta} ∩ B(0,1)| / (2 eta), which tends to the surface
    integral as eta -> 0 by the co-area formula. For a definite form the
    level set is the origin and the estimate tends to 0.
    """
    if eta <= 0:
        raise ValueError("eta must be positive")
    v = mc_volume(QuadShell(P, -eta, eta, 1.0), samples, seed)
    return VolumeEstimate(v.value / (2 * eta), v.std_error / (2 * eta), samples, "thin_shell")
