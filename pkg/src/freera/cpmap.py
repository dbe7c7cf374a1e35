"""Complete positivity of linear *-maps between operator systems.

An operator system is a transpose-closed subspace of ``R^{nu x nu}``; it
need not contain a positive definite element.  A *-map ``tau`` is tested by
building the pencil ``L_A`` of a symmetric basis whose first element is a
maximum-rank positive semidefinite matrix, the pencil ``L_B`` of the images,
and deciding ``L_B >= 0`` on the spectrahedron of ``L_A``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import config, numkernel, sdp
from .certify import Certificate, Witness, check_positive
from .errors import IndeterminateError
from .freepoly import LinearPencil, MatPoly
from .leftmod import LeftModule
from .radical import is_feasible

CP = "CP"
NOT_CP = "not-CP"
CP_TRIVIALLY = "CP-trivially"
INDETERMINATE = "indeterminate"

_CLOSURE_TOL = 1e-10


def _vec(M: np.ndarray) -> np.ndarray:
    return np.asarray(M, dtype=float).reshape(-1)


def _span_coords(basis: list[np.ndarray], M: np.ndarray) -> tuple[np.ndarray, float]:
    """Least-squares coordinates of ``M`` in ``basis`` and the residual."""
    if not basis:
        return np.zeros(0), float(np.linalg.norm(M))
    B = np.stack([_vec(b) for b in basis], axis=1)
    c = np.linalg.lstsq(B, _vec(M), rcond=None)[0]
    return c, float(np.linalg.norm(B @ c - _vec(M)))


@dataclass
class OperatorSystem:
    """A transpose-closed span of real ``nu x nu`` matrices."""

    nu: int
    basis: list[np.ndarray]

    def __post_init__(self) -> None:
        mats = [np.atleast_2d(np.asarray(b, dtype=float)) for b in self.basis]
        for b in mats:
            if b.shape != (self.nu, self.nu):
                raise ValueError(f"basis element of shape {b.shape}, expected {(self.nu, self.nu)}")
        if mats:
            B = np.stack([_vec(b) for b in mats], axis=1)
            if numkernel.rank(B) < len(mats):
                raise ValueError("basis elements are linearly dependent")
        self.basis = mats
        for b in mats:
            _, res = _span_coords(mats, b.T)
            if res > _CLOSURE_TOL * max(1.0, float(np.linalg.norm(b))):
                raise ValueError("not an operator system: span is not closed under the transpose")

    @classmethod
    def full(cls, nu: int) -> "OperatorSystem":
        """All of ``R^{nu x nu}`` with the matrix units as basis."""
        basis = []
        for i in range(nu):
            for j in range(nu):
                E = np.zeros((nu, nu))
                E[i, j] = 1.0
                basis.append(E)
        return cls(nu, basis)

    @property
    def dim(self) -> int:
        return len(self.basis)

    def coords(self, M: np.ndarray) -> np.ndarray:
        """Coordinates of ``M`` in the basis; raises if ``M`` is outside."""
        c, res = _span_coords(self.basis, M)
        if res > 1e-8 * max(1.0, float(np.linalg.norm(M))):
            raise ValueError("matrix is not in the operator system")
        return c

    def symmetric_part(self) -> np.ndarray:
        """Orthonormal (trace inner product) basis of the symmetric elements, as columns of vec'd matrices."""
        return self._part(+1)

    def skew_part(self) -> np.ndarray:
        return self._part(-1)

    def _part(self, sign: int) -> np.ndarray:
        if not self.basis:
            return np.zeros((self.nu * self.nu, 0))
        M = np.stack([_vec((b + sign * b.T) / 2) for b in self.basis], axis=1)
        return numkernel.orth(M)


@dataclass
class LinearStarMap:
    """``tau: A -> R^{ell x ell}`` given by the images of the basis of ``A``."""

    domain: OperatorSystem
    ell: int
    images: list[np.ndarray]

    def __post_init__(self) -> None:
        imgs = [np.atleast_2d(np.asarray(m, dtype=float)) for m in self.images]
        if len(imgs) != self.domain.dim:
            raise ValueError("need one image per domain basis element")
        for m in imgs:
            if m.shape != (self.ell, self.ell):
                raise ValueError(f"image of shape {m.shape}, expected {(self.ell, self.ell)}")
        self.images = imgs
        scale = max([1.0] + [float(np.abs(m).max()) for m in imgs])
        for b, m in zip(self.domain.basis, imgs):
            c = self.domain.coords(b.T)
            if np.abs(self(None, coords=c) - m.T).max() > _CLOSURE_TOL * scale * max(1.0, float(np.abs(c).sum())):
                raise ValueError("not a *-map: tau(A^T) differs from tau(A)^T")

    def __call__(self, A: np.ndarray | None, coords: np.ndarray | None = None) -> np.ndarray:
        c = self.domain.coords(A) if coords is None else coords
        out = np.zeros((self.ell, self.ell))
        for ck, m in zip(c, self.images):
            out += ck * m
        return out

    def ampliate(self, S: np.ndarray) -> np.ndarray:
        """``(tau (x) Id_d)(S)`` for ``S`` in ``M_d(A)`` stored as ``d x d`` blocks of size ``nu``."""
        nu = self.domain.nu
        d = S.shape[0] // nu
        out = np.zeros((d * self.ell, d * self.ell))
        for i in range(d):
            for j in range(d):
                out[i * self.ell:(i + 1) * self.ell, j * self.ell:(j + 1) * self.ell] = \
                    self(S[i * nu:(i + 1) * nu, j * nu:(j + 1) * nu])
        return out

    @classmethod
    def from_function(cls, domain: OperatorSystem, ell: int, f) -> "LinearStarMap":
        return cls(domain, ell, [np.asarray(f(b), dtype=float) for b in domain.basis])


# ---------------------------------------------------------------------------
# symmetric bases


@dataclass
class SymmetricBasis:
    """``A0`` (maximum-rank PSD), the other symmetric elements and the skew ones."""

    A0: np.ndarray
    symmetric: list[np.ndarray]
    skew: list[np.ndarray]

    @property
    def elements(self) -> list[np.ndarray]:
        return [self.A0] + self.symmetric + self.skew

    @property
    def s(self) -> int:
        """Index of the first skew element, so ``A_1..A_{s-1}`` are symmetric."""
        return 1 + len(self.symmetric)


def _mat(v: np.ndarray, nu: int) -> np.ndarray:
    return v.reshape(nu, nu)


def symmetric_basis(A: OperatorSystem) -> SymmetricBasis:
    """A basis of symmetric and skew elements with a maximum-rank PSD first
    element and the symmetric ones pairwise trace-orthogonal.

    Raises ``ValueError`` when the system has no nonzero PSD element.
    """
    nu = A.nu
    Sym = A.symmetric_part()
    if Sym.shape[1] == 0:
        raise ValueError("no nonzero positive semidefinite element")
    space = sdp.BlockSpace([nu])
    N = numkernel.orth(np.stack([space.to_vec([_mat(Sym[:, k], nu)]) for k in range(Sym.shape[1])], axis=1))
    sol = sdp.psd_in_span(N, space, max_rank=True)
    if sol.status == sdp.INDETERMINATE:
        raise IndeterminateError(f"maximum-rank PSD search indeterminate ({sol.message})")
    if not sol.feasible:
        raise ValueError("no nonzero positive semidefinite element")
    A0 = sol.blocks[0]
    A0 = _clean_psd(A0)
    A0 = A0 / np.linalg.norm(A0)
    # the other symmetric elements: orthonormal complement of A0 inside Sym
    a0 = _vec(A0)
    R = Sym - np.outer(a0, a0 @ Sym)
    rest = numkernel.orth(R) if R.size else R
    symmetric = [_mat(rest[:, k], nu) for k in range(rest.shape[1])]
    symmetric = [(M + M.T) / 2 for M in symmetric]
    Sk = A.skew_part()
    skew = [_mat(Sk[:, k], nu) for k in range(Sk.shape[1])]
    skew = [(M - M.T) / 2 for M in skew]
    return SymmetricBasis(A0, symmetric, skew)


def _clean_psd(M: np.ndarray) -> np.ndarray:
    """Drop the negligible part of the spectrum so the rank is unambiguous."""
    w, V = numkernel.sym_eig((M + M.T) / 2)
    keep = w > config.get().rank * max(1.0, float(w.max()))
    return (V[:, keep] * w[keep]) @ V[:, keep].T


def pencil_of(basis: SymmetricBasis) -> LinearPencil:
    """``A0 + sum_sym A_i (x_i + x_i^*) + sum_skew A_i (x_i - x_i^*)``."""
    return LinearPencil(basis.A0, basis.symmetric + basis.skew)


def image_pencil(tau: LinearStarMap, basis: SymmetricBasis) -> LinearPencil:
    imgs = [tau(M) for M in basis.elements]
    T0 = (imgs[0] + imgs[0].T) / 2
    return LinearPencil(T0, imgs[1:])


# ---------------------------------------------------------------------------
# trivial positives


def expanded_pencil(A: OperatorSystem) -> LinearPencil:
    """``L (+) (Tr L - 1)`` over a symmetric/skew basis with no constant term."""
    nu = A.nu
    Sym, Sk = A.symmetric_part(), A.skew_part()
    mats = [(_mat(Sym[:, k], nu) + _mat(Sym[:, k], nu).T) / 2 for k in range(Sym.shape[1])]
    mats += [(_mat(Sk[:, k], nu) - _mat(Sk[:, k], nu).T) / 2 for k in range(Sk.shape[1])]
    A0 = np.zeros((nu + 1, nu + 1))
    A0[nu, nu] = -1.0
    coeffs = []
    for M in mats:
        C = np.zeros((nu + 1, nu + 1))
        C[:nu, :nu] = M
        C[nu, nu] = np.trace(M)
        coeffs.append(C)
    if not coeffs:
        coeffs = [np.zeros((nu + 1, nu + 1))]
    return LinearPencil(A0, coeffs)


def trivial_positives(A: OperatorSystem) -> bool:
    """Whether the only PSD element of ``A`` is zero."""
    return not is_feasible(expanded_pencil(A))


# ---------------------------------------------------------------------------
# the CP test


@dataclass
class CpResult:
    verdict: str
    basis: SymmetricBasis | None = None
    L_A: LinearPencil | None = None
    L_B: LinearPencil | None = None
    certificate: Certificate | None = None
    witness: Witness | None = None
    S: np.ndarray | None = None  # element of M_d(A), PSD, with tau(S) not PSD
    tau_S_min_eig: float | None = None
    message: str = ""
    audit: dict = field(default_factory=dict)

    @property
    def is_cp(self) -> bool | None:
        if self.verdict in (CP, CP_TRIVIALLY):
            return True
        if self.verdict == NOT_CP:
            return False
        return None


def is_completely_positive(tau: LinearStarMap, lift_witness: bool = True) -> CpResult:
    """Decide complete positivity of ``tau`` by LMI domination."""
    try:
        if trivial_positives(tau.domain):
            return CpResult(CP_TRIVIALLY, message="the domain has no nonzero PSD element")
        try:
            basis = symmetric_basis(tau.domain)
        except ValueError as exc:
            return CpResult(INDETERMINATE, message=f"no PSD element found: {exc}")
        LA, LB = pencil_of(basis), image_pencil(tau, basis)
        p = LB.to_matpoly()
        out = check_positive(p, LA, LeftModule(tau.ell, LA.g))
    except IndeterminateError as exc:
        return CpResult(INDETERMINATE, message=str(exc))
    if isinstance(out, Certificate):
        return CpResult(CP, basis, LA, LB, certificate=out)
    res = CpResult(NOT_CP, basis, LA, LB, witness=out)
    if lift_witness:
        S = lift(basis, out)
        TS = tau.ampliate(S)
        res.S = S
        res.tau_S_min_eig = numkernel.min_eig((TS + TS.T) / 2)
        if res.tau_S_min_eig > -config.get().indeterminate:
            return CpResult(INDETERMINATE, basis, LA, LB, witness=out,
                            message="lifted witness does not refute positivity")
    return res


def lift(basis: SymmetricBasis, w: Witness) -> np.ndarray:
    """The PSD element ``I (x) A0 + sum (X_i +- X_i^T) (x) A_i`` of ``M_n(A)``."""
    Xs = w.X.X
    n = w.n
    S = np.kron(np.eye(n), basis.A0)
    for k, M in enumerate(basis.symmetric + basis.skew):
        X = Xs[k]
        sign = 1.0 if k < len(basis.symmetric) else -1.0
        S = S + np.kron(X + sign * X.T, M)
    return S


def choi_matrix(tau: LinearStarMap) -> np.ndarray:
    """``sum_ij E_ij (x) tau(E_ij)``; requires the full matrix algebra as domain."""
    nu, ell = tau.domain.nu, tau.ell
    C = np.zeros((nu * ell, nu * ell))
    for i in range(nu):
        for j in range(nu):
            E = np.zeros((nu, nu))
            E[i, j] = 1.0
            C[i * ell:(i + 1) * ell, j * ell:(j + 1) * ell] = tau(E)
    return C


def choi_is_psd(tau: LinearStarMap, tol: float | None = None) -> bool | None:
    """Choi test on a full algebra; ``None`` inside the indeterminate band
    ``(-tol, -rank_tol)``."""
    tol = config.get().indeterminate if tol is None else tol
    C = choi_matrix(tau)
    lam = numkernel.min_eig((C + C.T) / 2)
    if lam >= -config.get().rank * max(1.0, float(np.abs(C).max())):
        return True
    if lam <= -tol:
        return False
    return None
