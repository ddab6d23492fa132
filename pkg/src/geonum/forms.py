"""Real quadratic forms Q(x) = x^T G x of signature (p, q)."""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

SYMMETRY_TOL = 1e-12
ZERO_EIG_REL_TOL = 1e-9
UNIMODULAR_TOL = 1e-9


def signature_of(gram: np.ndarray) -> tuple[int, int]:
    """Eigenvalue sign counts; raises on a (numerically) zero eigenvalue."""
    eig = np.linalg.eigvalsh(gram)
    scale = np.max(np.abs(gram))
    if scale == 0 or np.any(np.abs(eig) < ZERO_EIG_REL_TOL * scale):
        raise ValueError("degenerate quadratic form (zero eigenvalue)")
    return int(np.sum(eig > 0)), int(np.sum(eig < 0))


@dataclass(frozen=True, eq=False)
class QuadraticForm:
    """A nondegenerate quadratic form, immutable after construction."""

    gram: np.ndarray
    signature: tuple[int, int] = field(init=False)

    def __post_init__(self):
        g = np.array(self.gram, dtype=float)
        if g.ndim != 2 or g.shape[0] != g.shape[1]:
            raise ValueError("gram must be a square matrix")
        if g.shape[0] < 3:
            raise ValueError("quadratic forms need n >= 3 variables")
        if np.max(np.abs(g - g.T)) > SYMMETRY_TOL:
            raise ValueError("gram matrix is not symmetric")
        g = 0.5 * (g + g.T)
        g.setflags(write=False)
        object.__setattr__(self, "gram", g)
        object.__setattr__(self, "signature", signature_of(g))

    @property
    def dim(self) -> int:
        return self.gram.shape[0]

    @property
    def is_indefinite(self) -> bool:
        p, q = self.signature
        return p > 0 and q > 0

    def __call__(self, x):
        return evaluate(self, x)

    def __neg__(self) -> "QuadraticForm":
        return QuadraticForm(-self.gram)

    def __repr__(self):
        return f"QuadraticForm(dim={self.dim}, signature={self.signature})"

    def to_json(self) -> str:
        return json.dumps({"dim": self.dim, "gram": [float(v) for v in self.gram.ravel()]})

    @classmethod
    def from_json(cls, text: str) -> "QuadraticForm":
        d = json.loads(text)
        n = int(d["dim"])
        return cls(np.asarray(d["gram"], dtype=float).reshape(n, n))

    def to_csv(self) -> str:
        return "".join(",".join(repr(float(v)) for v in row) + "\n" for row in self.gram)


def _check_dim(Q: QuadraticForm, x: np.ndarray):
    if x.shape[-1] != Q.dim:
        raise ValueError(f"vector length {x.shape[-1]} does not match form dimension {Q.dim}")


def evaluate(Q: QuadraticForm, x) -> np.ndarray | float:
    """x^T G x. Accepts a single vector or an array of row vectors."""
    x = np.asarray(x, dtype=float)
    _check_dim(Q, x)
    val = np.einsum("...i,ij,...j->...", x, Q.gram, x)
    return float(val) if val.ndim == 0 else val


def gradient(Q: QuadraticForm, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    _check_dim(Q, x)
    return 2.0 * x @ Q.gram.T


def standard_form(p: int, q: int) -> QuadraticForm:
    """diag(+1 x p, -1 x q)."""
    if p < 1 or q < 1:
        raise ValueError("indefinite signature required (p >= 1 and q >= 1)")
    if p + q < 3:
        raise ValueError("need p + q >= 3")
    return QuadraticForm(np.diag([1.0] * p + [-1.0] * q))


def deform(Q0: QuadraticForm, g) -> QuadraticForm:
    """The form x -> Q0(g x), with gram g^T G0 g."""
    g = np.asarray(g, dtype=float)
    if g.shape != (Q0.dim, Q0.dim):
        raise ValueError("deformation matrix has wrong shape")
    if abs(np.linalg.det(g) - 1.0) > UNIMODULAR_TOL:
        raise ValueError("deformation matrix must have determinant 1")
    Q = QuadraticForm(g.T @ Q0.gram @ g)
    if Q.signature != Q0.signature:
        raise ArithmeticError("signature changed under congruence; input too ill-conditioned")
    return Q


def random_unimodular(n: int, rng: np.random.Generator, max_tries: int = 100) -> np.ndarray:
    """Gaussian matrix rescaled to determinant 1.

    Absolutely continuous on SL(n, R) but not Haar distributed.
    """
    for _ in range(max_tries):
        g = rng.standard_normal((n, n))
        d = np.linalg.det(g)
        if abs(d) < 1e-6:
            continue
        if d < 0:
            g[:, 0] = -g[:, 0]
            d = -d
        return g / d ** (1.0 / n)
    raise RuntimeError("could not draw a nonsingular Gaussian matrix")


def random_form(p: int, q: int, seed: int) -> QuadraticForm:
    """standard_form(p, q) deformed by a seeded random unimodular matrix.

    Irrationality is not certified; it holds almost surely.
    """
    Q0 = standard_form(p, q)
    rng = np.random.default_rng(seed)
    return deform(Q0, random_unimodular(p + q, rng))
