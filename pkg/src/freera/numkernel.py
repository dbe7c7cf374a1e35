"""Dense symmetric linear algebra: eigendecomposition, ranks, nullspaces,
PSD square roots and orthogonal complements."""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

from . import config


class SymEig(NamedTuple):
    values: np.ndarray  # descending
    vectors: np.ndarray  # orthonormal columns


def _check_symmetric(S: np.ndarray, name: str = "matrix") -> np.ndarray:
    S = np.asarray(S, dtype=float)
    if S.ndim != 2 or S.shape[0] != S.shape[1]:
        raise ValueError(f"{name} must be square, got shape {S.shape}")
    scale = max(1.0, float(np.abs(S).max(initial=0.0)))
    if np.abs(S - S.T).max(initial=0.0) > 1e-9 * scale:
        raise ValueError(f"{name} is not symmetric")
    return (S + S.T) / 2


def sym_eig(S: np.ndarray) -> SymEig:
    S = _check_symmetric(S)
    w, V = np.linalg.eigh(S)
    order = np.argsort(w)[::-1]
    return SymEig(w[order], V[:, order])


def rank(M: np.ndarray, tol: float | None = None) -> int:
    M = np.atleast_2d(np.asarray(M, dtype=float))
    if M.size == 0:
        return 0
    tol = config.get().rank if tol is None else tol
    s = np.linalg.svd(M, compute_uv=False)
    return int((s > tol * max(s[0], 1e-300)).sum()) if s[0] > 0 else 0


def nullspace(M: np.ndarray, tol: float | None = None, scale: float | None = None) -> np.ndarray:
    """Orthonormal basis (columns) of the right nullspace of ``M``.

    Singular values below ``tol * sigma_max`` count as zero.  When ``M`` is
    a projection of a larger matrix, pass that matrix's norm as ``scale`` so
    roundoff left by the projection is measured against it instead.
    """
    M = np.atleast_2d(np.asarray(M, dtype=float))
    n = M.shape[1]
    if M.shape[0] == 0 or not np.any(M):
        return np.eye(n)
    tol = config.get().rank if tol is None else tol
    _, s, Vt = np.linalg.svd(M)
    ref = s[0] if scale is None else max(s[0], scale)
    r = int((s > tol * ref).sum())
    return Vt[r:].T.copy()


def orth(M: np.ndarray, tol: float | None = None) -> np.ndarray:
    """Orthonormal basis (columns) of the column span of ``M``."""
    M = np.atleast_2d(np.asarray(M, dtype=float))
    if M.size == 0 or not np.any(M):
        return np.zeros((M.shape[0], 0))
    tol = config.get().rank if tol is None else tol
    U, s, _ = np.linalg.svd(M, full_matrices=False)
    r = int((s > tol * s[0]).sum())
    return U[:, :r].copy()


def orthocomplement(vectors: np.ndarray, dim: int | None = None, tol: float | None = None) -> np.ndarray:
    """Orthonormal basis of the orthogonal complement of the span of the columns."""
    V = np.asarray(vectors, dtype=float)
    if V.ndim == 1:
        V = V[:, None]
    if V.size == 0:
        return np.eye(dim if dim is not None else V.shape[0])
    return nullspace(V.T, tol)


def psd_sqrt(A: np.ndarray, tol: float | None = None) -> np.ndarray:
    """Symmetric square root of a PSD matrix.

    Eigenvalues in ``[-tol * max(1, |A|), 0)`` are clipped to zero, as are
    positive ones below the relative rank threshold; anything more negative
    is an error.
    """
    A = _check_symmetric(A, "psd_sqrt input")
    if A.size == 0:
        return A.copy()
    w, V = np.linalg.eigh(A)
    scale = max(1.0, float(np.abs(w).max()))
    neg_tol = 1e-8 if tol is None else tol
    if w.min() < -neg_tol * scale:
        raise ValueError(f"matrix is not PSD (min eigenvalue {w.min():.3e})")
    w = np.where(w > config.get().rank * w.max(), w, 0.0)
    return (V * np.sqrt(w)) @ V.T


def psd_factor(A: np.ndarray, rel_tol: float | None = None) -> np.ndarray:
    """Columns ``u_i sqrt(lambda_i)`` over the significant eigenpairs, so that
    ``F @ F.T`` reproduces ``A`` up to the dropped part."""
    A = _check_symmetric(A)
    if A.size == 0:
        return np.zeros((0, 0))
    w, V = np.linalg.eigh(A)
    rel_tol = config.get().rank if rel_tol is None else rel_tol
    keep = w > rel_tol * max(w.max(), 0.0)
    if w.max() <= 0:
        return np.zeros((A.shape[0], 0))
    return V[:, keep] * np.sqrt(w[keep])


def min_eig(S: np.ndarray) -> float:
    S = np.asarray(S, dtype=float)
    if S.size == 0:
        return float("inf")
    return float(np.linalg.eigvalsh((S + S.T) / 2)[0])


def rref(M: np.ndarray, col_order: np.ndarray | None = None, tol: float | None = None) -> tuple[np.ndarray, list[int]]:
    """Reduced row echelon form with pivots chosen along ``col_order``.

    Rows of the result are the nonzero echelon rows, each with pivot entry 1.
    Returns the rows and the pivot column of each.
    """
    M = np.array(M, dtype=float, copy=True)
    if M.ndim == 1:
        M = M[None, :]
    nrows, ncols = M.shape
    order = np.arange(ncols) if col_order is None else np.asarray(col_order)
    tol = config.get().rank if tol is None else tol
    scale = max(float(np.abs(M).max(initial=0.0)), 1e-300)
    pivots: list[int] = []
    r = 0
    for c in order:
        if r == nrows:
            break
        i = r + int(np.argmax(np.abs(M[r:, c])))
        if abs(M[i, c]) <= tol * scale:
            continue
        M[[r, i]] = M[[i, r]]
        M[r] /= M[r, c]
        others = np.arange(nrows) != r
        M[others] -= np.outer(M[others, c], M[r])
        M[others, c] = 0.0
        pivots.append(int(c))
        r += 1
    out = M[:r]
    out[np.abs(out) < config.get().zero] = 0.0
    return out, pivots
