"""Exact lattice-point enumeration and counting.

Points of a lattice in a closed Euclidean ball are produced by a
breadth-first Fincke-Pohst search on the LLL-reduced basis, vectorized with
numpy one outer coordinate at a time. Integer points where a quadratic form
takes values in a band are found by slicing along one coordinate: for a fixed
prefix the form is a quadratic polynomial in the last variable, so the
admissible values of that variable are at most two intervals.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Iterator, Optional

import numpy as np

from .forms import QuadraticForm, evaluate
from .lattice import Lattice, _gso_r, standard

BOUNDARY_TOL = 1e-9
MAX_POINTS = 1e8
MAX_RADIUS_RATIO = 1e7


def ball_volume(n: int, r: float = 1.0) -> float:
    return math.pi ** (n / 2) * r**n / math.gamma(n / 2 + 1)


# ----------------------------------------------------------------------------
# regions


@dataclass(frozen=True, eq=False)
class Region:
    """Measurable set given by a vectorized membership predicate.

    ``contains`` maps an array of shape (..., n) to a boolean array of shape
    (...). Every member has norm <= ``bounding_radius``.
    """

    dim: int
    contains: Callable[[np.ndarray], np.ndarray]
    bounding_radius: float
    volume_hint: Optional[float] = None
    kind: str = "custom"
    params: dict = field(default_factory=dict)
    # for star bodies: x in t*R  iff  gauge(x) <= t
    gauge: Optional[Callable[[np.ndarray], np.ndarray]] = None

    def __call__(self, x) -> np.ndarray:
        return self.contains(np.asarray(x, dtype=float))


def Ball(n: int, T: float) -> Region:
    if T <= 0:
        raise ValueError("ball radius must be positive")
    bound = (T + BOUNDARY_TOL) ** 2

    def contains(x):
        return np.einsum("...i,...i->...", x, x) <= bound

    def gauge(x):
        return np.sqrt(np.einsum("...i,...i->...", x, x)) / T

    return Region(n, contains, T, ball_volume(n, T), "ball", {"T": T}, gauge)


def QuadShell(Q: QuadraticForm, a: float, b: float, T: float, volume_hint: Optional[float] = None) -> Region:
    """{x : a < Q(x) < b, ||x|| <= T}."""
    if not a < b:
        raise ValueError("need a < b")
    if T <= 0:
        raise ValueError("T must be positive")
    bound = (T + BOUNDARY_TOL) ** 2

    def contains(x):
        v = evaluate(Q, x)
        return (a < v) & (v < b) & (np.einsum("...i,...i->...", x, x) <= bound)

    return Region(Q.dim, contains, T, volume_hint, "shell", {"form": Q, "a": a, "b": b, "T": T})


def Box(sides, center=None) -> Region:
    """Closed axis-parallel box with the given side lengths."""
    sides = np.asarray(sides, dtype=float)
    if np.any(sides <= 0):
        raise ValueError("side lengths must be positive")
    n = sides.size
    center = np.zeros(n) if center is None else np.asarray(center, dtype=float)
    half = sides / 2

    def contains(x):
        return np.all(np.abs(x - center) <= half + BOUNDARY_TOL, axis=-1)

    def gauge(x):
        return np.max(np.abs(x) / half, axis=-1)

    radius = float(np.linalg.norm(np.abs(center) + half))
    centered = not np.any(center)
    return Region(n, contains, radius, float(np.prod(sides)), "box", {"sides": sides, "center": center},
                  gauge if centered else None)


def Dilate(base: Region, t: float) -> Region:
    """t * base."""
    if t <= 0:
        raise ValueError("dilation factor must be positive")

    def contains(x):
        return base.contains(x / t)

    vol = None if base.volume_hint is None else base.volume_hint * t**base.dim
    gauge = None if base.gauge is None else (lambda x: base.gauge(x) / t)
    return Region(base.dim, contains, base.bounding_radius * t, vol, "dilate", {"base": base, "t": t}, gauge)


def Empty(n: int, radius: float = 1.0) -> Region:
    return Region(n, lambda x: np.zeros(np.shape(x)[:-1], dtype=bool), radius, 0.0, "empty")


# ----------------------------------------------------------------------------
# ball enumeration


def _expand(Z, partial, R, i, radius2):
    """Extend partial coefficient vectors (coordinates i+1..n-1) by coordinate i."""
    if Z.shape[1]:
        center = -(Z @ R[i, i + 1 :][::-1]) / R[i, i]
    else:
        center = np.zeros(len(Z))
    rem = np.maximum(radius2 - partial, 0.0)
    w = np.sqrt(rem) / R[i, i]
    lo = np.ceil(center - w).astype(np.int64)
    hi = np.floor(center + w).astype(np.int64)
    cnt = np.maximum(hi - lo + 1, 0)
    total = int(cnt.sum())
    idx = np.repeat(np.arange(len(Z)), cnt)
    starts = np.cumsum(cnt) - cnt
    z = lo[idx] + (np.arange(total) - starts[idx])
    partial = partial[idx] + (R[i, i] * (z - center[idx])) ** 2
    # Z columns hold coordinates in order n-1, n-2, ..., i+1
    Z = np.column_stack([Z[idx], z])
    return Z, partial


def _check_feasible(basis: np.ndarray, T: float):
    n = basis.shape[0]
    lam1 = float(np.min(np.linalg.norm(basis, axis=0)))
    if T / lam1 > MAX_RADIUS_RATIO:
        raise OverflowError("radius too large relative to the shortest basis vector")
    predicted = ball_volume(n, T) / abs(np.linalg.det(basis))
    if predicted > MAX_POINTS:
        raise OverflowError(f"enumeration would produce about {predicted:.3g} points")


def iter_ball(L: Lattice | np.ndarray, T: float, include_zero: bool = False) -> Iterator[tuple[np.ndarray, np.ndarray]]:
    """Stream (coefficients, points) chunks of lattice points with norm <= T.

    Coefficients are integer vectors with respect to the reduced basis; each
    chunk shares one value of the last coordinate, and chunks come in
    increasing order of it, so the whole stream is lexicographic with the
    last coordinate outermost.
    """
    if T <= 0:
        raise ValueError("T must be positive")
    basis = L.reduced_basis if isinstance(L, Lattice) else np.asarray(L, dtype=float)
    n = basis.shape[0]
    _check_feasible(basis, T)
    R = _gso_r(basis)
    if np.any(np.diag(R) <= 0):
        raise ArithmeticError("degenerate basis")
    Tpad = T + BOUNDARY_TOL
    radius2 = Tpad * Tpad * (1 + 1e-12)
    top = int(math.floor(Tpad / R[n - 1, n - 1] * (1 + 1e-12)))
    bound = (T + BOUNDARY_TOL) ** 2
    for zl in range(-top, top + 1):
        Z = np.array([[zl]], dtype=np.int64)
        partial = np.array([(R[n - 1, n - 1] * zl) ** 2])
        for i in range(n - 2, -1, -1):
            Z, partial = _expand(Z, partial, R, i, radius2)
            if not len(Z):
                break
        if not len(Z):
            continue
        coeffs = Z[:, ::-1]
        pts = coeffs @ basis.T
        keep = np.einsum("ij,ij->i", pts, pts) <= bound
        if not include_zero:
            keep &= np.any(coeffs != 0, axis=1)
        if keep.any():
            yield coeffs[keep], pts[keep]


def points_in_ball(L: Lattice, T: float) -> np.ndarray:
    """All nonzero lattice vectors with norm <= T, as rows."""
    chunks = [p for _, p in iter_ball(L, T)]
    if not chunks:
        return np.zeros((0, L.dim))
    return np.concatenate(chunks)


def count_region(L: Lattice, R: Region) -> int:
    """Number of nonzero lattice points in the region."""
    if R.dim != L.dim:
        raise ValueError("region and lattice dimensions differ")
    if R.kind == "empty":
        return 0
    total = 0
    for _, pts in iter_ball(L, R.bounding_radius):
        total += int(np.count_nonzero(R.contains(pts)))
    return total


def brute_force_points(basis: np.ndarray, T: float, box: Optional[int] = None) -> np.ndarray:
    """Nonzero points B z with ||Bz|| <= T, scanning a box of coefficients.

    Test oracle independent of the pruned search. Without an explicit
    ``box`` the per-coordinate bound |z_i| <= T ||row_i(B^-1)|| is used,
    which makes the scan exhaustive.
    """
    basis = np.asarray(basis, dtype=float)
    n = basis.shape[0]
    if box is None:
        bounds = np.floor((T + BOUNDARY_TOL) * np.linalg.norm(np.linalg.inv(basis), axis=1)).astype(int)
    else:
        bounds = np.full(n, box)
    axes = [np.arange(-k, k + 1) for k in bounds]
    Z = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, n)
    Z = Z[np.any(Z != 0, axis=1)]
    P = Z @ basis.T
    return P[np.einsum("ij,ij->i", P, P) <= (T + BOUNDARY_TOL) ** 2]


# ----------------------------------------------------------------------------
# integer points of Z^n in a band of values of a quadratic form


def _slice_axis(Q: QuadraticForm) -> int:
    return int(np.argmax(np.abs(np.diag(Q.gram))))


def slice_intervals(g: float, beta: np.ndarray, gamma: np.ndarray, lo: float, hi: float):
    """Intervals of t where lo < g t^2 + 2 beta t + gamma < hi.

    Returns two (left, right) pairs of arrays; an empty interval has
    left >= right.
    """
    beta = np.asarray(beta, dtype=float)
    gamma = np.asarray(gamma, dtype=float)
    empty = np.full(beta.shape, np.nan)
    if g == 0.0:
        with np.errstate(divide="ignore", invalid="ignore"):
            t1 = (lo - gamma) / (2 * beta)
            t2 = (hi - gamma) / (2 * beta)
        left = np.minimum(t1, t2)
        right = np.maximum(t1, t2)
        flat = beta == 0
        inside = (lo < gamma) & (gamma < hi)
        left = np.where(flat, np.where(inside, -np.inf, np.nan), left)
        right = np.where(flat, np.where(inside, np.inf, np.nan), right)
        return (left, right), (empty, empty)
    if g < 0:
        g, beta, gamma, lo, hi = -g, -beta, -gamma, -hi, -lo
    t0 = -beta / g
    m = gamma - beta * beta / g
    A = (hi - m) / g
    B = (lo - m) / g
    sa = np.sqrt(np.maximum(A, 0.0))
    sb = np.sqrt(np.maximum(B, 0.0))
    has = A > 0
    two = has & (B >= 0)
    l1 = np.where(has, t0 - sa, np.nan)
    r1 = np.where(has, np.where(two, t0 - sb, t0 + sa), np.nan)
    l2 = np.where(two, t0 + sb, np.nan)
    r2 = np.where(two, t0 + sa, np.nan)
    return (l1, r1), (l2, r2)


def _prefix_coefficients(Q: QuadraticForm, prefixes: np.ndarray, axis: int):
    G = Q.gram
    rest = [i for i in range(Q.dim) if i != axis]
    Gr = G[np.ix_(rest, rest)]
    beta = prefixes @ G[rest, axis]
    gamma = np.einsum("ij,jk,ik->i", prefixes, Gr, prefixes)
    return G[axis, axis], beta, gamma, rest


def iter_slices(Q: QuadraticForm, T: float):
    """Stream (prefixes, half_widths, g, beta, gamma, rest, axis) over Z^{n-1} prefixes."""
    n = Q.dim
    axis = _slice_axis(Q)
    T2 = (T + BOUNDARY_TOL) ** 2
    for Z, _ in iter_ball(standard(n - 1), T, include_zero=True):
        P = Z.astype(float)
        s = np.sqrt(np.maximum(T2 - np.einsum("ij,ij->i", P, P), 0.0))
        g, beta, gamma, rest = _prefix_coefficients(Q, P, axis)
        yield Z, s, g, beta, gamma, rest, axis


def form_solutions(Q: QuadraticForm, lo: float, hi: float, T: float) -> np.ndarray:
    """All nonzero x in Z^n with ||x|| <= T and lo < Q(x) < hi (int64 rows)."""
    n = Q.dim
    out = []
    for Z, s, g, beta, gamma, rest, axis in iter_slices(Q, T):
        for left, right in slice_intervals(g, beta, gamma, lo, hi):
            ok = ~np.isnan(left)
            left = np.maximum(np.where(ok, left, 0.0), -s)
            right = np.minimum(np.where(ok, right, -1.0), s)
            tol = 1e-9 * (1 + np.abs(left) + np.abs(right))
            a = np.ceil(left - tol)
            b = np.floor(right + tol)
            cnt = np.where(ok & (b >= a), b - a + 1, 0).astype(np.int64)
            if not cnt.any():
                continue
            idx = np.repeat(np.arange(len(Z)), cnt)
            starts = np.cumsum(cnt) - cnt
            t = a[idx].astype(np.int64) + (np.arange(int(cnt.sum())) - starts[idx])
            X = np.empty((len(t), n), dtype=np.int64)
            X[:, rest] = Z[idx]
            X[:, axis] = t
            out.append(X)
    if not out:
        return np.zeros((0, n), dtype=np.int64)
    X = np.unique(np.concatenate(out), axis=0)
    v = evaluate(Q, X.astype(float))
    sq = np.einsum("ij,ij->i", X, X)
    keep = (lo < v) & (v < hi) & (sq <= (T + BOUNDARY_TOL) ** 2) & np.any(X != 0, axis=1)
    return X[keep]


def count_form_values(Q: QuadraticForm, a: float, b: float, T: float) -> int:
    """N(Q, a, b, T): nonzero integer points with ||x|| <= T and a < Q(x) < b."""
    if not a < b:
        raise ValueError("need a < b")
    return int(len(form_solutions(Q, a, b, T)))


@dataclass(frozen=True)
class SmallValue:
    x: tuple[int, ...]
    height: float
    value: float

    def to_dict(self) -> dict:
        return {"x": list(self.x), "height": self.height, "value": self.value}


def _canonical(X: np.ndarray) -> np.ndarray:
    """Flip each row so its first nonzero entry is positive."""
    first = X[np.arange(len(X)), np.argmax(X != 0, axis=1)]
    return X * np.where(first < 0, -1, 1)[:, None]


def pick_min_height(X: np.ndarray) -> Optional[np.ndarray]:
    """Shortest row; ties go to the lexicographically largest canonical representative."""
    if not len(X):
        return None
    sq = np.einsum("ij,ij->i", X, X)
    cand = np.unique(_canonical(X[sq == sq.min()]), axis=0)
    return cand[-1]


BANDS = {"two_sided", "positive_side"}


def band_for(eps: float, mode: str) -> tuple[float, float]:
    if mode == "two_sided":
        return -eps, eps
    if mode == "positive_side":
        return 0.0, eps
    raise ValueError(f"mode must be one of {sorted(BANDS)}")


def min_height_solution(Q: QuadraticForm, eps: float, mode: str = "two_sided", T_max: float = 1000.0) -> Optional[SmallValue]:
    """Shortest nonzero x in Z^n with |Q(x)| < eps (or 0 < Q(x) < eps).

    The search radius starts at 4 and doubles until a solution appears or
    T_max is reached; returns None when nothing exists within T_max.
    """
    if not Q.is_indefinite:
        raise ValueError("min_height_solution needs an indefinite form")
    if eps <= 0:
        raise ValueError("eps must be positive")
    lo, hi = band_for(eps, mode)
    R = min(4.0, T_max)
    while True:
        x = pick_min_height(form_solutions(Q, lo, hi, R))
        if x is not None:
            xf = x.astype(float)
            return SmallValue(tuple(int(v) for v in x), float(np.linalg.norm(xf)), float(evaluate(Q, xf)))
        if R >= T_max:
            return None
        R = min(2 * R, T_max)
