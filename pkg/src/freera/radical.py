"""Real radicals of left modules relative to a linear pencil.

:func:`lreal_radical_zero` computes the linear generators of the radical of
the zero module together with a reduced pencil that is strictly feasible
(or the constant pencil ``(1)`` when there is nothing left).  From it come
feasibility, the decomposition of thin pencils and their affine hull.

:func:`lreal_radical` handles a general module generated in
``R<x,x*>_1 C``; :func:`real_radical` is the special case ``L = (1)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import config, numkernel, sdp
from .errors import IndeterminateError
from .freepoly import ChipSpace, LinearPencil, MatPoly
from .leftmod import ChipBasis, LeftModule, chip_basis, to_rowdict


class RadicalError(IndeterminateError):
    """The computation could not reach a verdict (indeterminate SDP or no
    progress)."""


# ---------------------------------------------------------------------------
# linear forms as vectors over 1, x1, x1*, x2, x2*, ...


def linear_form(v: np.ndarray, g: int) -> MatPoly:
    t = {}
    if v[0]:
        t[(0, 0, ())] = float(v[0])
    for k in range(1, g + 1):
        if v[2 * k - 1]:
            t[(0, 0, (k,))] = float(v[2 * k - 1])
        if v[2 * k]:
            t[(0, 0, (-k,))] = float(v[2 * k])
    return MatPoly(1, 1, g, t)


def linear_vector(p: MatPoly) -> np.ndarray:
    if p.degree() > 1 or p.shape != (1, 1):
        raise ValueError("not a scalar linear form")
    v = np.zeros(2 * p.g + 1)
    for (_, _, w), c in p.terms.items():
        v[0 if not w else (2 * w[0] - 1 if w[0] > 0 else -2 * w[0])] += c
    return v


def star_vector(v: np.ndarray) -> np.ndarray:
    """Involution of a linear form: swap the coefficients of ``x_k`` and ``x_k^*``."""
    out = v.copy()
    out[1::2], out[2::2] = v[2::2], v[1::2]
    return out


def collapse(v: np.ndarray) -> np.ndarray:
    """Commutative collapse ``x_k^* -> x_k``: coefficients over ``1, x1, ..., xg``."""
    return np.r_[v[0], v[1::2] + v[2::2]]


def _echelon(rows: np.ndarray) -> np.ndarray:
    """Monic echelon rows, pivot at the largest monomial (the last coordinate)."""
    if rows.size == 0:
        return rows.reshape(0, rows.shape[-1] if rows.ndim == 2 else 0)
    n = rows.shape[1]
    R, _ = numkernel.rref(rows, np.arange(n)[::-1])
    return R


def _range(stack: np.ndarray) -> np.ndarray:
    """Orthonormal basis of the joint column range of the coefficient
    matrices, in echelon-first form so coordinate subspaces stay coordinate."""
    nu = stack.shape[1]
    V = numkernel.orth(stack.reshape(-1, nu).T) if nu else np.zeros((0, 0))
    if V.shape[1] == 0:
        return V
    R, _ = numkernel.rref(V.T)
    Q, Rr = np.linalg.qr(R.T)
    return Q * np.sign(np.diag(Rr))


def _pivot(row: np.ndarray) -> int:
    return int(np.nonzero(np.abs(row) > 0)[0].max())


# ---------------------------------------------------------------------------
# the radical of the zero module


@dataclass
class RadicalZeroResult:
    """``generators`` are monic linear forms spanning the degree-one part of
    the radical; ``reduced_pencil`` is strictly feasible or ``(1)``."""

    generators: list[MatPoly]
    reduced_pencil: LinearPencil
    feasible: bool
    g: int
    audit: list[dict] = field(default_factory=list)

    @property
    def generator_vectors(self) -> np.ndarray:
        if not self.generators:
            return np.zeros((0, 2 * self.g + 1))
        return np.array([linear_vector(p) for p in self.generators])

    @property
    def hull(self) -> np.ndarray:
        """Equations of the affine hull of the scalar solution set, as rows
        ``(c0, c1, ..., cg)`` meaning ``c0 + sum ck xk = 0``."""
        V = self.generator_vectors
        if V.shape[0] == 0:
            return np.zeros((0, self.g + 1))
        C = np.array([collapse(v) for v in V])
        return _echelon(C)

    def module(self) -> LeftModule:
        return LeftModule(1, self.g, self.generators)


def _complement(S: np.ndarray, g: int) -> tuple[np.ndarray, str]:
    """A ``*``-invariant complement of ``span(S)`` in the linear forms.

    Uses the constant and the letters that are not leading letters of
    ``S`` or ``S^*`` when they form a direct complement, the orthogonal
    complement otherwise.
    """
    dim = 2 * g + 1
    if S.shape[1] == 0:
        return np.eye(dim), "monomial"
    ech = _echelon(S.T)
    leads = set()
    for row in list(ech) + [star_vector(r) for r in ech]:
        p = _pivot(row)
        if p > 0:
            leads.add((p + 1) // 2)
    idx = [0] + [c for k in range(1, g + 1) if k not in leads for c in (2 * k - 1, 2 * k)]
    T = np.eye(dim)[:, idx]
    if S.shape[1] + T.shape[1] == dim and numkernel.rank(np.hstack([S, T])) == dim:
        return T, "monomial"
    return numkernel.orthocomplement(S, dim), "orthogonal"


def _zero_constraints(stack: np.ndarray) -> np.ndarray:
    """Rows: the linear-form coefficients of ``Tr(L A) + c`` in the svec
    coordinates of the blocks ``(A, c)``."""
    m, nu, _ = stack.shape
    space = sdp.BlockSpace([nu, 1])
    C = np.zeros((m, space.dim))
    for col, (b, i, j) in enumerate(space.coord_list()):
        if b == 0:
            if i == j:
                C[:, col] = stack[:, i, i]
            else:
                C[:, col] = (stack[:, i, j] + stack[:, j, i]) / np.sqrt(2)
        else:
            C[0, col] = 1.0
    return C


def lreal_radical_zero(L: LinearPencil) -> RadicalZeroResult:
    """Radical of the zero module relative to ``L`` and the reduced pencil."""
    g = L.g
    dim = 2 * g + 1
    unit = LinearPencil.identity(g)
    audit: list[dict] = []
    stack = L.coefficient_stack()
    V = _range(stack)
    if V.shape[1] == 0:
        return RadicalZeroResult([], unit, True, g, audit)
    cur = L.compress(V)
    S = np.zeros((dim, 0))  # orthonormal basis of span(I + I^*)
    gens = np.zeros((0, dim))
    for it in range(dim + 1):
        cstack = cur.coefficient_stack()
        problem = sdp.AffinePsdProblem((cur.size, 1), _zero_constraints(cstack))
        sol = sdp.feasible_psd_affine(problem, max_rank=True)
        rec = {"iteration": it, "pencil": cur, "compression": V, "status": sol.status}
        audit.append(rec)
        if sol.status == sdp.INDETERMINATE:
            raise RadicalError(f"iteration {it}: SDP indeterminate ({sol.message})")
        if not sol.feasible:
            return RadicalZeroResult([linear_form(r, g) for r in gens], cur, True, g, audit)
        A, c = sol.blocks[0], float(sol.blocks[1][0, 0])
        rec["A"], rec["c"] = A, c
        if c > config.get().indeterminate:
            return _infeasible(g, audit)
        if np.trace(A) < config.get().indeterminate:
            raise RadicalError(f"iteration {it}: SDP solution below the nonzero threshold")
        root = numkernel.psd_sqrt(A)
        # record the matrix actually used (negligible eigenvalues dropped)
        rec["A_solver"], rec["A"] = A, root @ root
        batch = np.einsum("kij,jl->kil", cstack, root)
        rec["batch"] = batch
        new = batch.reshape(dim, -1).T
        gens = _echelon(np.vstack([gens, new]))
        rec["generators"] = gens.copy()
        if any(_pivot(r) == 0 for r in gens):
            return _infeasible(g, audit)
        S = numkernel.orth(np.hstack([gens.T, np.array([star_vector(r) for r in gens]).T]))
        T, kind = _complement(S, g)
        rec["complement"], rec["complement_kind"] = T, kind
        # split every entry of the current pencil along span(S) + span(T)
        coeffs = np.linalg.lstsq(np.hstack([S, T]), cstack.reshape(dim, -1), rcond=None)[0]
        LT = (T @ coeffs[S.shape[1]:]).reshape(cstack.shape)
        LT[np.abs(LT) < config.get().zero] = 0.0
        split = LinearPencil.from_coefficient_stack(LT)
        V = _range(LT)
        rec["next_compression"] = V
        if V.shape[1] == 0:
            return RadicalZeroResult([linear_form(r, g) for r in gens], unit, True, g, audit)
        cur = split.compress(V)
    raise RadicalError("radical of the zero module did not stabilize within the iteration cap")


def _infeasible(g: int, audit: list[dict]) -> RadicalZeroResult:
    one = np.zeros(2 * g + 1)
    one[0] = 1.0
    return RadicalZeroResult([linear_form(one, g)], LinearPencil.identity(g), False, g, audit)


def is_feasible(L: LinearPencil) -> bool:
    """Whether ``L(X) >= 0`` has a solution (of some size)."""
    return lreal_radical_zero(L).feasible


@dataclass
class DecompositionResult:
    """Affine hull equations (rows ``c0, c1, ..., cg``), the linear
    generators they come from, and the reduced pencil."""

    hull: np.ndarray
    generators: list[MatPoly]
    reduced_pencil: LinearPencil
    feasible: bool


def decompose_pencil(L: LinearPencil) -> DecompositionResult:
    r = lreal_radical_zero(L)
    return DecompositionResult(r.hull, r.generators, r.reduced_pencil, r.feasible)


# ---------------------------------------------------------------------------
# general radicals over a chip space


def _kappa(nu: int, T, ell: int, g: int) -> list[MatPoly]:
    return [MatPoly(nu, ell, g, {(j, i, w): 1.0}) for j in range(nu) for i, w in T]


def _combine(polys: list[MatPoly], coeffs: np.ndarray, like: MatPoly) -> MatPoly:
    out = MatPoly.zero(like.nrows, like.ncols, like.g)
    for p, c in zip(polys, coeffs):
        if abs(c) > config.get().zero:
            out = out + p.scale(float(c))
    return out


def _rows_in_module_test(module: LeftModule, polys: list[MatPoly]) -> np.ndarray:
    """Matrix whose kernel is the set of combinations lying in the module:
    columns are the normal forms of ``polys`` (rows stacked)."""
    index: dict = {}
    cols = []
    for p in polys:
        d = {}
        for r, row in enumerate(p.rows()):
            for k, v in module.normal_form_dict(to_rowdict(row)).items():
                d[(r, k)] = v
        for k in d:
            index.setdefault(k, len(index))
        cols.append(d)
    M = np.zeros((len(index), len(polys)))
    for j, d in enumerate(cols):
        for k, v in d.items():
            M[index[k], j] = v
    return M


def _significant(M: np.ndarray, top: float) -> np.ndarray:
    """Columns ``u sqrt(w)`` over eigenpairs with ``w > 1e-6 * top``."""
    if M.size == 0:
        return np.zeros((M.shape[0], 0))
    w, U = np.linalg.eigh((M + M.T) / 2)
    keep = w > 1e-6 * top if top > 0 else np.zeros_like(w, dtype=bool)
    return U[:, keep] * np.sqrt(w[keep])


def symmetric_span(cb: ChipBasis) -> list[tuple[MatPoly, MatPoly, MatPoly]]:
    """Triples ``(c, iota, c^* iota + iota^* c)`` over chip monomials ``c``
    and the basis of the module intersected with ``R<x,x*>_1 C``; the third
    entries span the symmetric part of the module and its adjoint in
    ``C^* R<x,x*>_1 C``."""
    out = []
    for c in cb.chips.as_rows():
        for iota in cb.intersection():
            out.append((c, iota, c.star() @ iota + iota.star() @ c))
    return out


def lreal_radical(I: LeftModule, L: LinearPencil, chips: ChipSpace, strong: bool = False) -> ChipBasis:
    """The (strong) ``(L, C)``-real radical of ``I`` as a chip basis."""
    if not chips.is_full():
        raise ValueError("the chip space must be full")
    if L.g != I.g:
        raise ValueError("pencil and module use different numbers of variables")
    ell, g, nu = I.ell, I.g, L.size
    Lp = L.to_matpoly()
    gens = list(I.generators)
    audit: list[dict] = []
    cap = len(chips.one_step()) + 1
    for it in range(cap + 1):
        module = LeftModule(ell, g, gens, I.order)
        cb = chip_basis(module, chips)
        tau = cb.tau()
        kappa = _kappa(nu, cb.T, ell, g)
        # J: combinations whose pencil image already lies in the module
        if kappa:
            M = _rows_in_module_test(module, [Lp @ k for k in kappa])
            Jmat = numkernel.nullspace(M) if M.size else np.eye(len(kappa))
        else:
            Jmat = np.zeros((0, 0))
        if strong:
            Kmat = np.eye(len(kappa))
        else:
            Kmat = numkernel.orthocomplement(Jmat, len(kappa)) if Jmat.size else np.eye(len(kappa))
        kbasis = [_combine(kappa, Kmat[:, j], kappa[0]) for j in range(Kmat.shape[1])] if kappa else []
        rhs = [f for _, _, f in symmetric_span(cb)]
        rec = {"iteration": it, "T": list(cb.T), "J_dim": int(Jmat.shape[1]) if Jmat.size else 0}
        audit.append(rec)
        if not tau and not kbasis:
            break
        try:
            res = sdp.modified_sos(tau, kbasis, Lp, rhs)
        except sdp.SdpError as exc:
            raise RadicalError(f"iteration {it}: {exc}") from exc
        if res is None:
            break
        rec["A"], rec["B"] = res.A, res.B
        new: list[MatPoly] = []
        top = max((np.linalg.eigvalsh(M).max() for M in (res.A, res.B) if M.size), default=0.0)
        for u in _significant(res.A, top).T:
            new.append(_combine(tau, u, tau[0]))
        for u in _significant(res.B, top).T if kbasis else []:
            q = _combine(kbasis, u, kbasis[0])
            new.extend((q if strong else Lp @ q).rows())
        new = [p for p in new if not p.is_zero()]
        if not new:
            raise RadicalError(f"iteration {it}: SDP solution produced no new generators")
        # keep the combinations that are new modulo the current module
        M = _rows_in_module_test(module, new)
        if M.size == 0 or not np.any(M):
            raise RadicalError(f"iteration {it}: no progress")
        _, s, Vt = np.linalg.svd(M, full_matrices=False)
        r = int((s > config.get().rank * 1e2 * s[0]).sum())
        added = [_combine(new, Vt[k], new[0]) for k in range(r)]
        rec["added"] = added
        gens = [*gens, *added]
    else:
        raise RadicalError("radical did not stabilize within the iteration cap")
    cb.audit = audit
    return cb


def real_radical(I: LeftModule, chips: ChipSpace) -> ChipBasis:
    """Real radical of ``I`` over the chip space (the pencil is ``(1)``)."""
    return lreal_radical(I, LinearPencil.identity(I.g), chips, strong=False)
