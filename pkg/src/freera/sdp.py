"""Semidefinite feasibility: nonzero PSD points of linear subspaces of
block-diagonal symmetric matrices, facial reduction by zero diagonals, the
Gram-matrix subspaces used by the radical and certificate searches, and
strict feasibility of small linear matrix inequalities.

The interior-point work is delegated to ``cvxopt.solvers.sdp``.  Everything
returned is re-derived from exact subspace coordinates and checked here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from cvxopt import matrix as cvx_matrix
from cvxopt import solvers as cvx_solvers
from scipy.optimize import linprog

from . import config, numkernel
from .errors import IndeterminateError
from .freepoly import CoeffIndex, LinearPencil, MatPoly

FEASIBLE, INFEASIBLE, INDETERMINATE = "feasible", "infeasible", "indeterminate"


class SdpError(IndeterminateError):
    pass


# ---------------------------------------------------------------------------
# block-diagonal symmetric matrices in orthonormal svec coordinates


class BlockSpace:
    """Coordinates for tuples of symmetric matrices.

    Diagonal entries map to themselves and off-diagonal pairs to
    ``sqrt(2) * Y[i, j]``, so the Euclidean inner product of coordinate
    vectors equals the trace inner product.
    """

    def __init__(self, sizes: Sequence[int]):
        self.sizes = tuple(int(n) for n in sizes)
        self.offsets = [0]
        for n in self.sizes:
            self.offsets.append(self.offsets[-1] + n * (n + 1) // 2)
        self.dim = self.offsets[-1]
        self._iu = [np.triu_indices(n) for n in self.sizes]

    def to_blocks(self, v: np.ndarray) -> list[np.ndarray]:
        out = []
        for b, n in enumerate(self.sizes):
            seg = v[self.offsets[b]:self.offsets[b + 1]]
            M = np.zeros((n, n))
            i, j = self._iu[b]
            off = i != j
            vals = np.where(off, seg / math.sqrt(2), seg)
            M[i, j] = vals
            M[j, i] = vals
            out.append(M)
        return out

    def to_vec(self, blocks: Sequence[np.ndarray]) -> np.ndarray:
        v = np.zeros(self.dim)
        for b, n in enumerate(self.sizes):
            M = (blocks[b] + blocks[b].T) / 2
            i, j = self._iu[b]
            v[self.offsets[b]:self.offsets[b + 1]] = np.where(i != j, M[i, j] * math.sqrt(2), M[i, j])
        return v

    def coord(self, b: int, i: int, j: int) -> int:
        n = self.sizes[b]
        if i > j:
            i, j = j, i
        return self.offsets[b] + i * n - i * (i - 1) // 2 + (j - i)

    def trace_vec(self) -> np.ndarray:
        return self.to_vec([np.eye(n) for n in self.sizes])

    def coord_list(self) -> list[tuple[int, int, int]]:
        """``(block, i, j)`` with ``i <= j`` for every coordinate, in order."""
        out = []
        for b, n in enumerate(self.sizes):
            i, j = self._iu[b]
            out.extend((b, int(a), int(c)) for a, c in zip(i, j))
        return out


# ---------------------------------------------------------------------------
# results


@dataclass
class PsdSolution:
    """Outcome of a PSD search.

    ``blocks`` is a nonzero PSD point of the subspace (total trace 1) when
    ``status == "feasible"``; ``certificate`` is a positive definite element
    of the orthogonal complement when ``status == "infeasible"``.
    """

    status: str
    blocks: list[np.ndarray] | None = None
    certificate: list[np.ndarray] | None = None
    ranks: list[int] = field(default_factory=list)
    margin: float = float("nan")
    residual: float = float("nan")
    message: str = ""

    @property
    def feasible(self) -> bool:
        return self.status == FEASIBLE

    @property
    def infeasible(self) -> bool:
        return self.status == INFEASIBLE


@dataclass(frozen=True)
class AffinePsdProblem:
    """Homogeneous linear constraints on a tuple of symmetric blocks.

    ``constraints`` has one row per equation and one column per svec
    coordinate of :class:`BlockSpace` (``block_sizes``).  A scalar ``c >= 0``
    is simply a block of size one.
    """

    block_sizes: tuple[int, ...]
    constraints: np.ndarray

    def __post_init__(self) -> None:
        space = BlockSpace(self.block_sizes)
        C = np.atleast_2d(np.asarray(self.constraints, dtype=float))
        if C.size and C.shape[1] != space.dim:
            raise ValueError(f"constraints have {C.shape[1]} columns, expected {space.dim}")
        object.__setattr__(self, "constraints", C.reshape(-1, space.dim))

    @property
    def space(self) -> BlockSpace:
        return BlockSpace(self.block_sizes)

    def basis(self) -> np.ndarray:
        """Orthonormal basis (columns) of the solution subspace."""
        return numkernel.nullspace(self.constraints) if self.constraints.shape[0] else np.eye(self.space.dim)

    def residual(self, blocks: Sequence[np.ndarray]) -> float:
        if not self.constraints.shape[0]:
            return 0.0
        return float(np.abs(self.constraints @ self.space.to_vec(blocks)).max())


# ---------------------------------------------------------------------------
# facial reduction


@dataclass
class FacialReduction:
    """Result of zero-diagonal propagation on ``Y(y) = sum_j y_j F_j``.

    The surviving parameters are ``y = param_map @ u``; ``keep[b]`` lists the
    indices of block ``b`` that remain, and ``coeffs[b]`` has shape
    ``(len(u), len(keep[b]), len(keep[b]))``.
    """

    param_map: np.ndarray
    keep: list[np.ndarray]
    coeffs: list[np.ndarray]
    forced_zero: list[tuple[int, int]]

    @property
    def vanished(self) -> bool:
        return self.param_map.shape[1] == 0 or all(len(k) == 0 for k in self.keep)


def _forced_diagonal(cur: list[np.ndarray], tol: float) -> list[np.ndarray]:
    """Diagonal positions that vanish on every PSD value of the pencil.

    Looks for a nonnegative diagonal matrix ``D`` orthogonal to every
    coefficient (so ``sum_i D_ii Y_ii = 0`` on the whole span) by a linear
    program maximizing ``sum D_ii`` with ``0 <= D_ii <= 1``; its support is
    forced to zero.  Identically zero diagonal entries are the special case
    ``D = E_ii``.
    """
    sizes = [F.shape[1] for F in cur]
    cols = [np.diagonal(F, axis1=1, axis2=2) for F in cur if F.shape[1]]
    if not cols:
        return [np.zeros(0, dtype=int) for _ in cur]
    Dg = np.hstack(cols)  # (k, total)
    total = Dg.shape[1]
    scale = np.abs(Dg).max(initial=0.0)
    if scale <= tol:
        d = np.ones(total)
    else:
        res = linprog(-np.ones(total), A_eq=Dg / scale, b_eq=np.zeros(Dg.shape[0]), bounds=(0.0, 1.0),
                      method="highs")
        d = res.x if res.status == 0 else np.zeros(total)
    out, off = [], 0
    for n in sizes:
        out.append(np.nonzero(d[off:off + n] > 1e-7)[0])
        off += n
    return out


def facial_reduce(coeffs: Sequence[np.ndarray], tol: float = 1e-12) -> FacialReduction:
    """Remove diagonal positions that vanish on every PSD value of a
    structured pencil.

    ``coeffs[b]`` has shape ``(k, n_b, n_b)``: the pencil block ``b`` is
    ``sum_j y_j coeffs[b][j]``.  A PSD value with a zero diagonal entry has a
    zero row and column there, which gives linear equations on ``y``; the
    step repeats until nothing more is forced.
    """
    coeffs = [np.asarray(F, dtype=float) for F in coeffs]
    k = coeffs[0].shape[0] if coeffs else 0
    P = np.eye(k)
    keep = [np.arange(F.shape[1]) for F in coeffs]
    cur = [F.copy() for F in coeffs]
    forced: list[tuple[int, int]] = []
    while P.shape[1] > 0:
        zeros = _forced_diagonal(cur, tol)
        if not any(len(z) for z in zeros):
            break
        eqs = [cur[b][:, i, :].T for b, z in enumerate(zeros) for i in z]
        E = np.vstack(eqs)
        scale = max((np.abs(F).max(initial=0.0) for F in cur), default=0.0)
        N = numkernel.nullspace(E) if np.abs(E).max() > tol * scale else np.eye(P.shape[1])
        P = P @ N
        for b, z in enumerate(zeros):
            if not len(z):
                continue
            forced.extend((b, int(keep[b][i])) for i in z)
            mask = np.ones(len(keep[b]), dtype=bool)
            mask[z] = False
            keep[b] = keep[b][mask]
        cur = []
        for b, F in enumerate(coeffs):
            G = np.tensordot(P.T, F, axes=1) if F.shape[0] else F
            cur.append(G[:, keep[b]][:, :, keep[b]])
    return FacialReduction(P, keep, cur, forced)


# ---------------------------------------------------------------------------
# the core PSD search


def _solver_options() -> dict:
    return {
        "show_progress": False,
        "maxiters": min(config.get().sdp_max_iter, 500),
        "abstol": 1e-10,
        "reltol": 1e-10,
        "feastol": 1e-10,
    }


def _max_min_eig(N: np.ndarray, space: BlockSpace):
    """Solve ``max t : Y = sum z_j N_j, Y - t I >= 0, tr Y = 1``.

    Returns ``(t, Y-blocks, W-blocks)`` with ``W`` the dual matrix, or
    ``None`` when the solver fails outright.
    """
    k = N.shape[1]
    Gs, hs = [], []
    blocks_of = [space.to_blocks(N[:, j]) for j in range(k)]
    for b, n in enumerate(space.sizes):
        if n == 0:
            continue
        G = np.zeros((n * n, k + 1))
        for j in range(k):
            G[:, j] = -blocks_of[j][b].ravel(order="F")
        G[:, k] = np.eye(n).ravel(order="F")
        Gs.append(cvx_matrix(G))
        hs.append(cvx_matrix(np.zeros((n, n))))
    tr = np.array([sum(np.trace(B) for B in blocks_of[j]) for j in range(k)])
    c = cvx_matrix(np.r_[np.zeros(k), -1.0])
    A = cvx_matrix(np.r_[tr, 0.0].reshape(1, -1))
    b = cvx_matrix([1.0])
    try:
        sol = cvx_solvers.sdp(c, Gs=Gs, hs=hs, A=A, b=b, options=_solver_options())
    except (ValueError, ArithmeticError) as exc:  # singular KKT systems
        return None, str(exc)
    if sol["x"] is None:
        return None, sol["status"]
    xv = np.array(sol["x"]).ravel()
    z, t = xv[:k], xv[k]
    Y = space.to_blocks(N @ z)
    W, it = [], 0
    for n in space.sizes:
        if n == 0:
            W.append(np.zeros((0, 0)))
        else:
            W.append(np.array(sol["zs"][it]))
            it += 1
    return (t, Y, W), sol["status"]


def _project_out(N: np.ndarray, v: np.ndarray) -> np.ndarray:
    return v - N @ (N.T @ v) if N.shape[1] else v


def _certificate(N: np.ndarray, space: BlockSpace, W: list[np.ndarray], t: float):
    """Project ``W - t I`` onto the orthogonal complement of the subspace and
    measure how positive definite it is (after scaling to spectral norm 1)."""
    shifted = [Wb - t * np.eye(Wb.shape[0]) for Wb in W]
    v = _project_out(N, space.to_vec(shifted))
    C = space.to_blocks(v)
    eigs = [np.linalg.eigvalsh(Cb) for Cb in C if Cb.size]
    if not eigs:
        return C, float("inf")
    top = max(e.max() for e in eigs)
    if top <= 0:
        return C, -1.0
    C = [Cb / top for Cb in C]
    return C, float(min(e.min() for e in eigs) / top)


def _orthonormal(vectors: np.ndarray) -> np.ndarray:
    if vectors.size == 0:
        return vectors.reshape(vectors.shape[0], 0)
    return numkernel.orth(vectors, 1e-10)


def _restrict(N: np.ndarray, space: BlockSpace, U: list[np.ndarray]):
    """Elements of span(N) of the form ``U M U^T`` blockwise, expressed in
    the smaller coordinates of ``M``."""
    k = N.shape[1]
    rows = []
    mats = [space.to_blocks(N[:, j]) for j in range(k)]
    for b, n in enumerate(space.sizes):
        if n == 0 or U[b].shape[1] == n:
            continue
        Q = numkernel.orthocomplement(U[b], n) if U[b].shape[1] else np.eye(n)
        rows.append(np.stack([(Q.T @ mats[j][b]).ravel() for j in range(k)], axis=1))
    Z = _null_abs(np.vstack(rows), 1e-9) if rows else np.eye(k)
    sub = BlockSpace([Ub.shape[1] for Ub in U])
    cols = []
    for i in range(Z.shape[1]):
        Yb = [sum(Z[j, i] * mats[j][b] for j in range(k)) for b in range(len(space.sizes))]
        cols.append(sub.to_vec([U[b].T @ Yb[b] @ U[b] for b in range(len(U))]))
    M = np.array(cols).T if cols else np.zeros((sub.dim, 0))
    return _orthonormal(M), sub


def _null_abs(M: np.ndarray, tol: float) -> np.ndarray:
    """Nullspace with an absolute singular-value threshold (the callers'
    matrices are built from orthonormal bases, so their scale is one)."""
    if M.size == 0:
        return np.eye(M.shape[1])
    _, s, Vt = np.linalg.svd(M)
    return Vt[int((s > tol).sum()):].T.copy()


def _lift(blocks: list[np.ndarray], U: list[np.ndarray]) -> list[np.ndarray]:
    return [U[b] @ blocks[b] @ U[b].T for b in range(len(U))]


def _normalize(blocks: list[np.ndarray]) -> list[np.ndarray]:
    tr = sum(np.trace(B) for B in blocks)
    return [B / tr for B in blocks] if tr > 0 else blocks


def _ranks(blocks: list[np.ndarray], rel: float = 1e-7) -> list[int]:
    top = max((np.linalg.eigvalsh(B).max() for B in blocks if B.size), default=0.0)
    return [int((np.linalg.eigvalsh(B) > rel * top).sum()) if B.size else 0 for B in blocks]


def _range_basis(B: np.ndarray, rel: float, top: float | None = None) -> np.ndarray:
    """Eigenvectors of ``B`` with eigenvalue above ``rel * top`` (``top``
    defaults to the largest eigenvalue of ``B``)."""
    if B.size == 0:
        return np.zeros((0, 0))
    w, V = np.linalg.eigh((B + B.T) / 2)
    top = max(w.max(), 0.0) if top is None else top
    return V[:, w > rel * top] if top > 0 else np.zeros((B.shape[0], 0))


def _top_eig(blocks: Sequence[np.ndarray]) -> float:
    return max((np.linalg.eigvalsh(B).max() for B in blocks if B.size), default=0.0)


_FACE_REL = 1e-6


def psd_in_span(N: np.ndarray, space: BlockSpace, max_rank: bool = True, _depth: int = 0) -> PsdSolution:
    """Find a nonzero PSD element of the span of the orthonormal columns of
    ``N`` (svec coordinates of ``space``), or a positive definite element of
    the orthogonal complement.

    For a linear subspace exactly one of the two exists; the answer is
    ``indeterminate`` only when neither side clears the numerical margin.
    """
    tol = config.get().indeterminate
    if space.dim == 0 or all(n == 0 for n in space.sizes):
        return PsdSolution(INFEASIBLE, certificate=[np.eye(n) for n in space.sizes], margin=1.0)
    if N.shape[1] == 0:
        return PsdSolution(INFEASIBLE, certificate=[np.eye(n) for n in space.sizes], margin=1.0)

    if _traceless(N, space):
        return PsdSolution(INFEASIBLE, certificate=[np.eye(n) for n in space.sizes], margin=1.0)

    # zero-diagonal facial reduction first
    coeffs = []
    for b, n in enumerate(space.sizes):
        coeffs.append(np.array([space.to_blocks(N[:, j])[b] for j in range(N.shape[1])]).reshape(N.shape[1], n, n))
    fr = facial_reduce(coeffs)
    if fr.forced_zero:
        if fr.vanished:
            return _fallback_certificate(N, space)
        U = []
        for b, n in enumerate(space.sizes):
            E = np.zeros((n, len(fr.keep[b])))
            E[fr.keep[b], np.arange(len(fr.keep[b]))] = 1.0
            U.append(E)
        Nr, sub = _restrict(N, space, U)
        if Nr.shape[1] == 0:
            return _fallback_certificate(N, space)
        inner = psd_in_span(Nr, sub, max_rank, _depth + 1)
        if inner.feasible:
            blocks = _normalize(_lift(inner.blocks, U))
            return _finish(blocks, N, space, inner.margin)
        if inner.infeasible:
            return _fallback_certificate(N, space, inner)
        return inner

    res, status = _max_min_eig(N, space)
    if res is None:
        return PsdSolution(INDETERMINATE, message=f"solver failure: {status}")
    t, Y, W = res
    Y = _normalize(Y)
    lam = min((np.linalg.eigvalsh(B).min() for B in Y if B.size), default=0.0)
    if lam > 1e-9 and t > 0:
        return _finish(Y, N, space, t)
    C, margin = _certificate(N, space, W, t)
    if t < -1e-9 and margin >= tol:
        return PsdSolution(INFEASIBLE, certificate=C, margin=margin)

    # boundary: restrict to the face spanned by the significant range of Y
    top = _top_eig(Y)
    U = [_range_basis(B, _FACE_REL, top) for B in Y]
    if all(u.shape[1] == n for u, n in zip(U, space.sizes)) or _depth > 40:
        if margin >= tol:
            return PsdSolution(INFEASIBLE, certificate=C, margin=margin)
        return _clipped(Y, N, space, t, margin, "no facial progress")
    Nr, sub = _restrict(N, space, U)
    if Nr.shape[1] == 0:
        if margin >= tol:
            return PsdSolution(INFEASIBLE, certificate=C, margin=margin)
        return _clipped(Y, N, space, t, margin, "empty face")
    inner = psd_in_span(Nr, sub, max_rank, _depth + 1)
    if inner.feasible:
        blocks = _normalize(_lift(inner.blocks, U))
        if max_rank:
            blocks = _enlarge(blocks, N, space, W, _depth)
        return _finish(blocks, N, space, inner.margin)
    if margin >= tol:
        return PsdSolution(INFEASIBLE, certificate=C, margin=margin)
    return _clipped(Y, N, space, t, margin, "boundary case without a verified side")


_CLIP_RESIDUAL = 1e-9


def _clipped(Y, N, space, t, margin, message) -> PsdSolution:
    """Last resort on the boundary: clip the solver's matrix to the PSD cone
    and accept it when it still lies in the span (relative residual below
    ``_CLIP_RESIDUAL``) and is clearly nonzero."""
    top = _top_eig(Y)
    if top > 0 and min((np.linalg.eigvalsh(B).min() for B in Y if B.size), default=0.0) >= -_CLIP_RESIDUAL * top:
        clipped = []
        for B in Y:
            if B.size == 0:
                clipped.append(B)
                continue
            w, V = np.linalg.eigh((B + B.T) / 2)
            clipped.append((V * np.clip(w, 0.0, None)) @ V.T)
        clipped = _normalize(clipped)
        v = space.to_vec(clipped)
        if np.linalg.norm(_project_out(N, v)) <= _CLIP_RESIDUAL * np.linalg.norm(v):
            return _finish(clipped, N, space, 0.0)
    return PsdSolution(INDETERMINATE, margin=max(t, margin), message=message)


def _enlarge(blocks, N, space, W, depth):
    """Try the face cut out by the dual matrix, which contains every PSD
    element of the subspace; keep it when it gives a larger rank."""
    top = _top_eig(W)
    U = [numkernel.orthocomplement(_range_basis(Wb, _FACE_REL, top), Wb.shape[0]) if Wb.size else np.zeros((0, 0))
         for Wb in W]
    cur = _ranks(blocks)
    if sum(u.shape[1] for u in U) <= sum(cur):
        return blocks
    Nr, sub = _restrict(N, space, U)
    if Nr.shape[1] == 0:
        return blocks
    inner = psd_in_span(Nr, sub, False, depth + 1)
    if inner.feasible:
        cand = _normalize(_lift(inner.blocks, U))
        if sum(_ranks(cand)) > sum(cur):
            return cand
    return blocks


def _finish(blocks, N, space, margin) -> PsdSolution:
    v = space.to_vec(blocks)
    resid = float(np.abs(_project_out(N, v)).max(initial=0.0))
    return PsdSolution(FEASIBLE, blocks=blocks, ranks=_ranks(blocks), margin=float(margin), residual=resid)


def _traceless(N: np.ndarray, space: BlockSpace) -> bool:
    """Whether every element of the span has trace zero (then the identity
    is a certificate)."""
    return bool(np.abs(N.T @ space.trace_vec()).max(initial=0.0) <= 1e-12 * math.sqrt(space.dim))


def _fallback_certificate(N, space, inner: PsdSolution | None = None) -> PsdSolution:
    """Certificate for the full problem once a reduced problem has none.

    First route: maximize the smallest eigenvalue directly over the
    orthogonal complement of the span.  Second route: solve the primal
    problem and read its dual.
    """
    if _traceless(N, space):
        return PsdSolution(INFEASIBLE, certificate=[np.eye(n) for n in space.sizes], margin=1.0)
    tol = config.get().indeterminate
    best = None
    perp = numkernel.orthocomplement(N, space.dim) if N.shape[1] else np.eye(space.dim)
    if perp.shape[1]:
        res, _ = _max_min_eig(perp, space)
        if res is not None:
            C, margin = _certificate(N, space, res[1], 0.0)
            best = (C, margin)
    if best is None or best[1] < tol:
        res, status = _max_min_eig(N, space) if N.shape[1] else ((-1.0, None, [np.eye(n) for n in space.sizes]), "")
        if res is not None:
            C, margin = _certificate(N, space, res[2], res[0])
            if best is None or margin > best[1]:
                best = (C, margin)
    if best is None:
        return PsdSolution(INFEASIBLE if inner is None else inner.status, message="no certificate: solver failed")
    C, margin = best
    if margin >= tol:
        return PsdSolution(INFEASIBLE, certificate=C, margin=margin)
    return PsdSolution(INFEASIBLE, certificate=None, margin=margin,
                       message="infeasible by facial reduction; dual certificate below margin")


def feasible_psd_affine(problem: AffinePsdProblem, max_rank: bool = True) -> PsdSolution:
    """Nonzero PSD solution of the homogeneous constraints, normalized to
    total trace one, or a dual certificate."""
    space = problem.space
    sol = psd_in_span(problem.basis(), space, max_rank)
    if sol.feasible:
        sol.residual = problem.residual(sol.blocks)
    return sol


# ---------------------------------------------------------------------------
# Gram subspaces


@dataclass
class GramFamily:
    """Gram products ``left_a^* mid left_b`` (``mid`` omitted means identity)."""

    left: list[MatPoly]
    mid: MatPoly | None = None

    def products(self) -> list[list[MatPoly]]:
        n = len(self.left)
        lefts = [(p.star() if self.mid is None else p.star() @ self.mid) for p in self.left]
        return [[lefts[a] @ self.left[b] for b in range(n)] for a in range(n)]


@dataclass
class GramSubspace:
    """Tuples of Gram matrices ``Z`` (plus an optional scale ``s >= 0`` for a
    target polynomial) with ``sum_f E_f(Z_f) - s * target`` in the span of the
    right-hand polynomials."""

    space: BlockSpace
    basis: np.ndarray
    index: CoeffIndex
    coord_polys: np.ndarray  # key-space vector of each svec coordinate (columns)
    rhs_basis: np.ndarray  # orthonormal basis of the right-hand span (columns)
    has_target: bool
    target_vec: np.ndarray | None

    def expression(self, blocks: Sequence[np.ndarray]) -> np.ndarray:
        """Key-space vector of ``sum_f E_f(Z_f)`` (target block ignored)."""
        v = self.space.to_vec(list(blocks))
        if self.has_target:
            v = v.copy()
            v[-1] = 0.0
        return self.coord_polys @ v


def gram_subspace(families: Sequence[GramFamily], rhs: Sequence[MatPoly], target: MatPoly | None = None,
                  extra_keys: Sequence[MatPoly] = ()) -> GramSubspace:
    sizes = [len(f.left) for f in families] + ([1] if target is not None else [])
    space = BlockSpace(sizes)
    coords = space.coord_list()
    prods = [f.products() for f in families]
    index = CoeffIndex()
    for P in prods:
        for row in P:
            index.add_polys(row)
    index.add_polys(rhs)
    index.add_polys(extra_keys)
    if target is not None:
        index.add_polys([target])
    cols = np.zeros((len(index), space.dim))
    r2 = math.sqrt(2)
    for c, (b, i, j) in enumerate(coords):
        if b < len(families):
            P = prods[b]
            v = index.vector(P[i][j])
            if i != j:
                v = (v + index.vector(P[j][i])) / r2
            cols[:, c] = v
        else:
            cols[:, c] = -index.vector(target)
    R = numkernel.orth(index.matrix(list(rhs))) if rhs else np.zeros((len(index), 0))
    M = _project_out(R, cols)
    scale = float(np.linalg.norm(cols, 2)) if cols.size else 0.0
    basis = numkernel.nullspace(M, 1e-9, scale) if M.size else np.eye(space.dim)
    return GramSubspace(space, basis, index, cols, R, target is not None,
                        index.vector(target) if target is not None else None)


# ---------------------------------------------------------------------------
# modified SOS step of the radical algorithm


@dataclass
class ModifiedSosResult:
    A: np.ndarray
    B: np.ndarray
    solution: PsdSolution


def modified_sos(tau: Sequence[MatPoly], kappa: Sequence[MatPoly], L: LinearPencil | MatPoly,
                 rhs: Sequence[MatPoly]) -> ModifiedSosResult | None:
    """Search for ``A, B >= 0``, not both zero, with
    ``tau^* A tau + sum_jk B_jk kappa_j^* L kappa_k`` in the span of ``rhs``.

    Returns ``None`` when the only solution is zero; raises
    :class:`SdpError` on an indeterminate verdict.
    """
    Lp = L.to_matpoly() if isinstance(L, LinearPencil) else L
    fams = [GramFamily(list(tau)), GramFamily(list(kappa), Lp)]
    gs = gram_subspace(fams, rhs)
    sol = psd_in_span(gs.basis, gs.space, max_rank=True)
    if sol.status == INDETERMINATE:
        raise SdpError(f"modified SOS step is indeterminate ({sol.message})")
    if not sol.feasible:
        return None
    A, B = sol.blocks
    return ModifiedSosResult(A, B, sol)


# ---------------------------------------------------------------------------
# strict feasibility of an LMI at scalar points


@dataclass
class StrictPoint:
    x: np.ndarray
    margin: float


def solve_lmi_strict(L: LinearPencil, radius: float = 1e4) -> StrictPoint | None:
    """A point ``x`` with ``lambda_min(L(x)) >= 1e-6``, searched by
    maximizing the smallest eigenvalue over boxes ``|x_i| <= r`` of growing
    radius up to ``radius``."""
    nu, g = L.size, L.g
    need = config.get().indeterminate
    m0 = numkernel.min_eig(L.A0)
    if m0 >= need or g == 0:
        return StrictPoint(np.zeros(g), m0) if m0 >= need else None
    G = np.zeros((nu * nu, g + 1))
    for k, Ak in enumerate(L.A):
        G[:, k] = -(Ak + Ak.T).ravel(order="F")
    G[:, g] = np.eye(nu).ravel(order="F")
    Gl = np.zeros((2 * g, g + 1))
    Gl[:g, :g] = np.eye(g)
    Gl[g:, :g] = -np.eye(g)
    c = np.r_[np.zeros(g), -1.0]
    r = min(10.0, radius)
    while True:
        hl = np.full(2 * g, r)
        try:
            sol = cvx_solvers.sdp(cvx_matrix(c), Gl=cvx_matrix(Gl), hl=cvx_matrix(hl), Gs=[cvx_matrix(G)],
                                  hs=[cvx_matrix(L.A0)], options=_solver_options())
        except (ValueError, ArithmeticError):
            sol = {"x": None}
        if sol["x"] is not None:
            xv = np.array(sol["x"]).ravel()[:g]
            m = numkernel.min_eig(L.at_point(xv))
            if m >= need:
                return StrictPoint(xv, m)
        if r >= radius:
            return None
        r = min(radius, r * 100.0)
