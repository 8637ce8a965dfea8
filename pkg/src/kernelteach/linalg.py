"""Small dense linear-algebra kernel used by the teachers and learners.

Everything here is deterministic and sized for a few hundred dimensions at
most: orthogonal-basis extension, kernel Gram matrices, a Cholesky solver
that fails loudly on non-positive pivots, and greedy selection of linearly
independent vectors.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from ._validation import as_matrix, as_vector, require
from .kernels import GAUSSIAN, FeatureVector, KernelSpec, kernel_matrix

__all__ = [
    "GramMatrix",
    "SingularMatrixError",
    "PDSolution",
    "extend_orthogonal_basis",
    "gram_matrix",
    "solve_positive_definite",
    "select_independent",
]

DEFAULT_PIVOT_TOL = 1e-8


class SingularMatrixError(np.linalg.LinAlgError):
    """Cholesky pivot fell below tolerance; carries the offending index."""

    def __init__(self, pivot_index: int, pivot: float):
        self.pivot_index = pivot_index
        self.pivot = pivot
        super().__init__(
            f"matrix numerically singular at pivot {pivot_index} (value {pivot:.3e})"
        )


@dataclass(frozen=True)
class GramMatrix:
    """Pairwise kernel values of a point set, kept with its generators."""

    entries: np.ndarray
    points: np.ndarray
    spec: KernelSpec

    def __len__(self) -> int:
        return self.entries.shape[0]


def extend_orthogonal_basis(theta) -> np.ndarray:
    """Unit vectors spanning the orthogonal complement of ``theta``.

    Returns a (d-1, d) array: each row has unit norm, is orthogonal to theta
    and to every other row.  Deterministic: the standard basis axis most
    aligned with theta is dropped and the rest are Gram-Schmidt reduced
    against theta and each other.
    """
    t = as_vector(theta, "theta")
    norm = np.linalg.norm(t)
    require(norm > 0, "theta must be nonzero")
    d = len(t)
    if d == 1:
        return np.empty((0, 1))
    u = t / norm
    drop = int(np.argmax(np.abs(u)))
    basis = []
    for axis in range(d):
        if axis == drop:
            continue
        v = np.zeros(d)
        v[axis] = 1.0
        v = v - (v @ u) * u
        for w in basis:
            v = v - (v @ w) * w
        # second reduction pass for numerical orthogonality
        v = v - (v @ u) * u
        for w in basis:
            v = v - (v @ w) * w
        nv = np.linalg.norm(v)
        require(nv > 1e-12, "degenerate basis extension")
        basis.append(v / nv)
    return np.array(basis)


def gram_matrix(spec: KernelSpec, points) -> GramMatrix:
    """Symmetric matrix of pairwise kernel values."""
    P = as_matrix(points, "points")
    entries = kernel_matrix(spec, P, P)
    entries = 0.5 * (entries + entries.T)
    if spec.family == GAUSSIAN:
        np.fill_diagonal(entries, 1.0)
    return GramMatrix(entries=entries, points=P, spec=spec)


class PDSolution(NamedTuple):
    solution: np.ndarray
    condition: float


def _cholesky(A: np.ndarray, pivot_tol: float) -> np.ndarray:
    n = A.shape[0]
    L = np.zeros_like(A)
    threshold = pivot_tol * float(np.max(np.abs(np.diag(A))))
    for j in range(n):
        pivot = A[j, j] - L[j, :j] @ L[j, :j]
        if pivot <= threshold:
            raise SingularMatrixError(j, float(pivot))
        L[j, j] = np.sqrt(pivot)
        if j + 1 < n:
            L[j + 1:, j] = (A[j + 1:, j] - L[j + 1:, :j] @ L[j, :j]) / L[j, j]
    return L


def _cho_solve(L: np.ndarray, b: np.ndarray) -> np.ndarray:
    n = L.shape[0]
    y = np.zeros(n)
    for i in range(n):
        y[i] = (b[i] - L[i, :i] @ y[:i]) / L[i, i]
    x = np.zeros(n)
    for i in range(n - 1, -1, -1):
        x[i] = (y[i] - L[i + 1:, i] @ x[i + 1:]) / L[i, i]
    return x


def solve_positive_definite(M, rhs, pivot_tol: float = DEFAULT_PIVOT_TOL) -> PDSolution:
    """Solve M eta = rhs for a symmetric positive-definite M.

    Uses a Cholesky factorization with iterative refinement; raises
    SingularMatrixError (with the pivot index) when a pivot falls below
    ``pivot_tol`` relative to the largest diagonal entry.  The returned
    residual satisfies |M eta - rhs|_inf <= 1e-8 (1 + |rhs|_inf) or a
    LinAlgError is raised.
    """
    A = M.entries if isinstance(M, GramMatrix) else as_matrix(M, "M")
    require(A.shape[0] == A.shape[1], "M must be square")
    require(np.allclose(A, A.T, atol=1e-12), "M must be symmetric")
    b = as_vector(rhs, "rhs")
    require(len(b) == A.shape[0], "rhs length must match M")

    L = _cholesky(A, pivot_tol)
    x = _cho_solve(L, b)
    target = 1e-8 * (1.0 + float(np.max(np.abs(b))))
    for _ in range(4):
        resid = b - A @ x
        if float(np.max(np.abs(resid))) <= 1e-14 * (1.0 + float(np.max(np.abs(b)))):
            break
        x = x + _cho_solve(L, resid)
    resid = float(np.max(np.abs(b - A @ x)))
    if resid > target:
        raise np.linalg.LinAlgError(
            f"solve residual {resid:.3e} exceeds tolerance {target:.3e}"
        )
    condition = float(np.linalg.cond(A, 2))
    return PDSolution(solution=x, condition=condition)


def _coerce_rows(vectors) -> np.ndarray:
    if isinstance(vectors, np.ndarray):
        return as_matrix(vectors, "vectors")
    rows = []
    for v in vectors:
        rows.append(v.coords if isinstance(v, FeatureVector) else np.asarray(v, float))
    return as_matrix(np.array(rows), "vectors")


def select_independent(
    vectors: Sequence | np.ndarray,
    target_count: int,
    pivot_tol: float = DEFAULT_PIVOT_TOL,
) -> list[int]:
    """Greedy selection of at most ``target_count`` linearly independent rows.

    A row is accepted when its residual after projecting onto the span of the
    previously accepted rows has norm above ``pivot_tol`` times the largest
    row norm in the batch.  Callers check whether the target was reached.
    """
    V = _coerce_rows(vectors)
    require(pivot_tol > 0, "pivot_tol must be > 0")
    require(target_count >= 0, "target_count must be >= 0")
    scale = float(np.max(np.linalg.norm(V, axis=1)))
    if scale == 0.0 or target_count == 0:
        return []
    threshold = pivot_tol * scale
    accepted: list[int] = []
    basis: list[np.ndarray] = []
    for i, row in enumerate(V):
        if len(accepted) >= target_count:
            break
        w = row.copy()
        for q in basis:
            w -= (w @ q) * q
        for q in basis:
            w -= (w @ q) * q
        nw = np.linalg.norm(w)
        if nw > threshold:
            accepted.append(i)
            basis.append(w / nw)
    return accepted
