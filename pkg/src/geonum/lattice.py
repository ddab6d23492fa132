"""Unimodular lattices g Z^n, LLL reduction and random-lattice samplers."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .forms import random_unimodular

DET_TOL = 1e-9
SINGULAR_TOL = 1e-12
MAX_CONDITION = 1e12
DEFAULT_Q = 1_000_003


@dataclass(frozen=True, eq=False)
class Lattice:
    """Full-rank lattice spanned by the columns of ``basis`` with det 1."""

    basis: np.ndarray

    def __post_init__(self):
        b = np.array(self.basis, dtype=float)
        if b.ndim != 2 or b.shape[0] != b.shape[1]:
            raise ValueError("basis must be square")
        if b.shape[0] < 2:
            raise ValueError("lattice dimension must be >= 2")
        d = np.linalg.det(b)
        if abs(d - 1.0) > DET_TOL:
            raise ValueError(f"basis determinant {d!r} is not 1")
        b.setflags(write=False)
        object.__setattr__(self, "basis", b)

    @property
    def dim(self) -> int:
        return self.basis.shape[0]

    @cached_property
    def reduced_basis(self) -> np.ndarray:
        """LLL-reduced basis of the same lattice (computed once)."""
        b, _ = _lll(self.basis, 0.99)
        b.setflags(write=False)
        return b

    def __repr__(self):
        return f"Lattice(dim={self.dim})"

    def to_json(self) -> str:
        return json.dumps({"dim": self.dim, "basis": [float(v) for v in self.basis.ravel()]})

    @classmethod
    def from_json(cls, text: str) -> "Lattice":
        d = json.loads(text)
        n = int(d["dim"])
        return cls(np.asarray(d["basis"], dtype=float).reshape(n, n))


def from_basis(M, normalize: bool = False) -> Lattice:
    """Build a lattice from basis columns, optionally rescaling to det 1."""
    M = np.array(M, dtype=float)
    n = M.shape[0]
    d = np.linalg.det(M)
    if abs(d) < SINGULAR_TOL:
        raise ValueError("singular basis matrix")
    if normalize:
        if d < 0:
            M[:, 0] = -M[:, 0]
            d = -d
        M = M * d ** (-1.0 / n)
    return Lattice(M)


def standard(n: int) -> Lattice:
    return Lattice(np.eye(n))


def gaussian_unimodular(n: int, seed: int) -> Lattice:
    """Lattice spanned by a normalized Gaussian matrix (not Haar)."""
    if n < 2:
        raise ValueError("n must be >= 2")
    rng = np.random.default_rng(seed)
    return from_basis(random_unimodular(n, rng), normalize=True)


def is_prime(q: int) -> bool:
    if q < 2:
        return False
    if q % 2 == 0:
        return q == 2
    for d in range(3, math.isqrt(q) + 1, 2):
        if q % d == 0:
            return False
    return True


def goldstein_mayer_basis(a, q: int) -> np.ndarray:
    """Columns e_i + a_i e_n (i < n) and q e_n, scaled by q^(-1/n)."""
    a = np.asarray(a, dtype=float)
    n = a.size + 1
    B = np.eye(n)
    B[n - 1, : n - 1] = a
    B[n - 1, n - 1] = q
    return B * float(q) ** (-1.0 / n)


def goldstein_mayer(n: int, q: int = DEFAULT_Q, seed: int = 0) -> Lattice:
    """Random q-ary lattice {x : x_n = sum a_i x_i mod q}, rescaled to covolume 1.

    Equidistributes toward Haar measure on SL(n,R)/SL(n,Z) as q grows.
    """
    if q < 101:
        raise ValueError("q must be >= 101")
    if not is_prime(q):
        raise ValueError(f"q = {q} is not prime")
    if n < 2:
        raise ValueError("n must be >= 2")
    rng = np.random.default_rng(seed)
    a = rng.integers(0, q, size=n - 1)
    return from_basis(goldstein_mayer_basis(a, q), normalize=True)


@dataclass(frozen=True)
class LatticeSampler:
    """Picklable description of a random-lattice distribution."""

    kind: str = "gm"
    n: int = 3
    q: int = DEFAULT_Q

    def __post_init__(self):
        if self.kind not in ("gm", "gaussian"):
            raise ValueError(f"unknown sampler {self.kind!r}")
        if self.kind == "gm" and (self.q < 101 or not is_prime(self.q)):
            raise ValueError("gm sampler needs a prime q >= 101")

    def __call__(self, seed: int) -> Lattice:
        if self.kind == "gm":
            return goldstein_mayer(self.n, self.q, seed)
        return gaussian_unimodular(self.n, seed)


def _gso_r(B: np.ndarray) -> np.ndarray:
    r = np.linalg.qr(B, mode="r")
    return r * np.sign(np.diag(r))[:, None]


def _lll(B: np.ndarray, delta: float, eta: float = 0.5001) -> tuple[np.ndarray, np.ndarray]:
    B = np.array(B, dtype=float)
    n = B.shape[1]
    U = np.eye(n, dtype=np.int64)
    if np.linalg.cond(B) > MAX_CONDITION:
        raise ArithmeticError("basis too ill-conditioned for floating-point LLL")
    R = _gso_r(B)
    k = 1
    swaps = 0
    while k < n:
        # size reduction of column k; mu[k, j] = R[j, k] / R[j, j]
        mu = R[:k, k] / np.diag(R)[:k]
        changed = False
        for j in range(k - 1, -1, -1):
            if abs(mu[j]) > eta:
                c = round(mu[j])
                B[:, k] -= c * B[:, j]
                U[:, k] -= c * U[:, j]
                mu[: j + 1] -= c * R[: j + 1, j] / np.diag(R)[: j + 1]
                changed = True
        if changed:
            R = _gso_r(B)
            mu_kk1 = R[k - 1, k] / R[k - 1, k - 1]
        else:
            mu_kk1 = mu[k - 1]
        if R[k, k] ** 2 >= (delta - mu_kk1**2) * R[k - 1, k - 1] ** 2:
            k += 1
        else:
            B[:, [k - 1, k]] = B[:, [k, k - 1]]
            U[:, [k - 1, k]] = U[:, [k, k - 1]]
            R = _gso_r(B)
            k = max(k - 1, 1)
            swaps += 1
            if swaps > 100_000:
                raise ArithmeticError("LLL did not terminate")
    return B, U


def lll_reduce(L: Lattice, delta: float = 0.99, return_transform: bool = False):
    """LLL-reduce the basis of ``L``.

    The result spans the same lattice: reduced = basis @ U with U integral,
    det U = +-1. With ``return_transform`` the pair (Lattice, U) is returned.
    """
    if not 0.25 < delta < 1:
        raise ValueError("delta must lie in (0.25, 1)")
    B, U = _lll(L.basis, delta)
    if round(np.linalg.det(U)) == -1:
        # keep det(reduced) = +1
        B[:, 0] = -B[:, 0]
        U[:, 0] = -U[:, 0]
    out = Lattice(B)
    return (out, U) if return_transform else out
