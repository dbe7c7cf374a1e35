"""Positivity certificates on spectrahedra intersected with module varieties.

:func:`check_positive` either writes ``p`` as

    sum p_i^* p_i + sum q_j^* L q_j + sum (r_k^* iota_k + iota_k^* r_k)

with every ``iota_k`` in the real radical, or returns matrices ``X`` and a
vector ``v`` with ``L(X) >= 0``, ``iota(X) v = 0`` and ``v^* p(X) v < 0``.
The witness comes from a separating linear functional and its GNS
representation.

Also here: the structured certificate for defining polynomials of a monic
pencil, vanishing tests and size bounds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import config, numkernel, sdp
from .errors import IndeterminateError, VerificationError
from .freepoly import (
    ChipSpace,
    CoeffIndex,
    LinearPencil,
    MatPoly,
    MatrixTuple,
    default_chip_space,
    evaluate,
    words_upto,
)
from .leftmod import ChipBasis, LeftModule, chip_order, leading, to_rowdict
from .radical import lreal_radical, symmetric_span

# ---------------------------------------------------------------------------
# records


@dataclass
class Certificate:
    """Gram form of a positivity certificate.

    ``p = tau^* A tau + sum_ab B_ab kappa_a^* L kappa_b + sum_k (r_k^* iota_k + iota_k^* r_k)``.
    """

    tau: list[MatPoly]
    kappa: list[MatPoly]
    A: np.ndarray
    B: np.ndarray
    module_terms: list[tuple[MatPoly, MatPoly]]  # (r_k, iota_k)
    chips: ChipSpace
    strict: bool
    radical: ChipBasis | None = None

    @property
    def sos_terms(self) -> list[MatPoly]:
        """Rows ``p_i`` of ``sqrt(A) tau``."""
        F = numkernel.psd_factor(self.A, 1e-12)
        return [_combine(self.tau, F[:, i]) for i in range(F.shape[1])]

    @property
    def pencil_terms(self) -> list[MatPoly]:
        """``q_j = sum_a sqrt(B)_{a j} kappa_a``."""
        F = numkernel.psd_factor(self.B, 1e-12)
        return [_combine(self.kappa, F[:, j]) for j in range(F.shape[1])]

    def expansion(self, L: LinearPencil) -> MatPoly:
        Lp = L.to_matpoly()
        ell, g = self.chips.ell, self.chips.g
        out = MatPoly.zero(ell, ell, g)
        for a, ta in enumerate(self.tau):
            for b, tb in enumerate(self.tau):
                if self.A[a, b]:
                    out = out + (ta.star() @ tb).scale(self.A[a, b])
        for a, ka in enumerate(self.kappa):
            kaL = ka.star() @ Lp
            for b, kb in enumerate(self.kappa):
                if self.B[a, b]:
                    out = out + (kaL @ kb).scale(self.B[a, b])
        for r, iota in self.module_terms:
            out = out + r.star() @ iota + iota.star() @ r
        return out


@dataclass
class Witness:
    """``X`` of size ``n`` and a unit vector ``v`` in ``R^{ell n}`` refuting positivity."""

    X: MatrixTuple
    v: np.ndarray
    value: float  # v^* p(X) v
    min_eig: float  # smallest eigenvalue of L(X)
    module_residual: float  # max over radical generators of |iota(X) v|
    gns_rank: int

    @property
    def n(self) -> int:
        return self.X.n


@dataclass
class VerificationReport:
    accepted: bool
    expansion_residual: float
    gram_min_eig: float
    memberships: list[bool]
    failures: list[str] = field(default_factory=list)


# ---------------------------------------------------------------------------
# helpers


def _combine(polys: list[MatPoly], coeffs: np.ndarray) -> MatPoly:
    out = MatPoly.zero(polys[0].nrows, polys[0].ncols, polys[0].g)
    for q, c in zip(polys, coeffs):
        if abs(c) > config.get().zero:
            out = out + q.scale(float(c))
    return out


def _kappa(nu: int, T, ell: int, g: int) -> list[MatPoly]:
    return [MatPoly(nu, ell, g, {(j, i, w): 1.0}) for j in range(nu) for i, w in T]


def _check_domain(p: MatPoly, chips: ChipSpace) -> None:
    """Raise unless every term of ``p`` lies in ``C^* R<x,x*>_1 C``."""
    members = set(chips.monomials)
    for (i, j, w) in p.terms:
        ok = False
        for a in range(len(w) + 1):
            left = tuple(-s for s in reversed(w[:a]))
            if (i, left) not in members:
                continue
            rest = w[a:]
            for mid in (0, 1):
                if mid <= len(rest) and (j, rest[mid:]) in members:
                    ok = True
                    break
            if ok:
                break
        if not ok:
            raise ValueError(f"term {(i, j, w)} of p lies outside C^* R<x,x*>_1 C")


def _max_coeff(p: MatPoly) -> float:
    return max((abs(v) for v in p.terms.values()), default=0.0)


@dataclass
class _Setup:
    """Everything derived from the radical that both the certificate and
    the witness searches need."""

    p: MatPoly
    L: LinearPencil
    radical: ChipBasis
    strict: bool

    def __post_init__(self) -> None:
        cb = self.radical
        ell, g = cb.chips.ell, cb.chips.g
        self.Lp = self.L.to_matpoly()
        self.tau = cb.tau()
        self.kappa = _kappa(self.L.size, cb.T, ell, g)
        self.span = symmetric_span(cb)
        self.rhs = [f for _, _, f in self.span]
        # J: combinations kappa with L kappa in the module; K its complement
        if self.kappa and not self.strict:
            M = _nf_matrix(cb.module, [self.Lp @ k for k in self.kappa])
            J = numkernel.nullspace(M) if M.size and np.any(M) else np.eye(len(self.kappa))
            K = numkernel.orthocomplement(J, len(self.kappa)) if J.shape[1] else np.eye(len(self.kappa))
            self.K = [_combine(self.kappa, K[:, j]) for j in range(K.shape[1])]
        else:
            self.K = list(self.kappa)


def _nf_matrix(module: LeftModule, polys: list[MatPoly]) -> np.ndarray:
    index: dict = {}
    cols = []
    for q in polys:
        d = {}
        for r, row in enumerate(q.rows()):
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


# ---------------------------------------------------------------------------
# the main entry point


def check_positive(p: MatPoly, L: LinearPencil, I: LeftModule | None = None, chips: ChipSpace | None = None,
                   strict: bool = False) -> Certificate | Witness:
    """Certificate of ``v^* p(X) v >= 0`` on ``{L(X) >= 0 (> 0 if strict), iota(X) v = 0}``
    or a witness refuting it.

    Raises :class:`IndeterminateError` when neither side can be verified.
    """
    ell, g = p.nrows, p.g
    if p.nrows != p.ncols:
        raise ValueError("p must be square")
    if not p.is_symmetric(1e-9 * max(1.0, _max_coeff(p))):
        raise ValueError("p must be symmetric")
    if L.g != g:
        raise ValueError("p and L use different numbers of variables")
    I = LeftModule(ell, g) if I is None else I
    chips = default_chip_space(ell, g, p, I.generators) if chips is None else chips
    _check_domain(p, chips)
    rad = lreal_radical(I, L, chips, strong=strict)
    st = _Setup(p, L, rad, strict)

    cert = _search_certificate(st)
    if cert is not None:
        report = verify_certificate(cert, p, L, I, recompute_radical=False)
        if report.accepted:
            return cert
        raise IndeterminateError(f"certificate found but not verified: {', '.join(report.failures)}")
    return _witness(st)


def _search_certificate(st: _Setup) -> Certificate | None:
    fams = [sdp.GramFamily(st.tau), sdp.GramFamily(st.kappa, st.Lp)]
    gs = sdp.gram_subspace(fams, st.rhs, target=st.p)
    sol = sdp.psd_in_span(gs.basis, gs.space, max_rank=True)
    if sol.status == sdp.INDETERMINATE:
        raise IndeterminateError(f"certificate SDP indeterminate ({sol.message})")
    if not sol.feasible:
        return None
    A, B, S = sol.blocks
    s = float(S[0, 0])
    if s <= config.get().indeterminate:
        return None
    A, B = A / s, B / s
    return _assemble(st, A, B)


def _assemble(st: _Setup, A: np.ndarray, B: np.ndarray) -> Certificate:
    cb = st.radical
    ell, g = cb.chips.ell, cb.chips.g
    cert = Certificate(st.tau, st.kappa, A, B, [], cb.chips, st.strict, cb)
    rest = st.p - cert.expansion(st.L)
    if st.span and not rest.is_zero():
        idx = CoeffIndex()
        idx.add_polys(st.rhs)
        idx.add_polys([rest])
        F = idx.matrix(st.rhs)
        alpha = np.linalg.lstsq(F, idx.vector(rest), rcond=None)[0]
        by_iota: dict[int, MatPoly] = {}
        iotas = cb.intersection()
        pos = {id(q): k for k, q in enumerate(iotas)}
        for (c, iota, _), a in zip(st.span, alpha):
            if abs(a) > config.get().zero:
                k = pos[id(iota)]
                by_iota[k] = by_iota.get(k, MatPoly.zero(1, ell, g)) + c.scale(float(a))
        cert.module_terms = [(r, iotas[k]) for k, r in sorted(by_iota.items())]
    return cert


def verify_certificate(cert: Certificate, p: MatPoly, L: LinearPencil, I: LeftModule | None = None,
                       recompute_radical: bool = True) -> VerificationReport:
    """Re-expand the certificate and re-check its Gram matrices and module
    memberships; accepts when everything is within the residual tolerance."""
    tol = config.get().residual
    failures = []
    resid = _max_coeff(cert.expansion(L) - p)
    if resid > tol:
        failures.append("expansion_residual")
    eigs = [numkernel.min_eig(M) for M in (cert.A, cert.B) if M.size]
    gmin = min(eigs, default=0.0)
    if gmin < -tol:
        failures.append("gram_not_psd")
    module = cert.radical.module if cert.radical is not None else None
    if recompute_radical or module is None:
        I = LeftModule(p.nrows, p.g) if I is None else I
        module = lreal_radical(I, L, cert.chips, strong=cert.strict).module
    members = [module.contains(iota, tol) for _, iota in cert.module_terms]
    if not all(members):
        failures.append("module_term_outside_radical")
    return VerificationReport(not failures, resid, gmin, members, failures)


# ---------------------------------------------------------------------------
# witnesses


def extract_witness(L: LinearPencil, I: LeftModule, chips: ChipSpace, p: MatPoly, strict: bool = False) -> Witness:
    """A refuting pair for ``p``; only meaningful when no certificate exists."""
    rad = lreal_radical(I, L, chips, strong=strict)
    return _witness(_Setup(p, L, rad, strict))


def _pd_certificate(st: _Setup, extra: list[MatPoly]):
    """Search the Gram pairs (on tau and K) whose image lies in
    ``span(extra) + R``; return ``(found_psd, solution, subspace)``."""
    fams = [sdp.GramFamily(st.tau), sdp.GramFamily(st.K, st.Lp)]
    gs = sdp.gram_subspace(fams, st.rhs + extra, extra_keys=[st.p])
    sol = sdp.psd_in_span(gs.basis, gs.space, max_rank=False)
    return sol, gs


def _witness(st: _Setup) -> Witness:
    tol = config.get()
    if not st.tau:
        raise VerificationError("the radical contains every chip, so the positivity set is empty")
    # W = R p when no PSD Gram pair maps into R p + R, else W = {0}
    sol, gs = _pd_certificate(st, [st.p])
    W_is_p = sol.infeasible
    if sol.status == sdp.INDETERMINATE:
        raise IndeterminateError(f"witness SDP indeterminate ({sol.message})")
    if not W_is_p:
        sol, gs = _pd_certificate(st, [])
        if not sol.infeasible:
            raise IndeterminateError("no positive definite separating functional found")
    if sol.certificate is None:
        raise IndeterminateError("separating functional below the margin")
    Ct, Ck = sol.certificate
    mu = len(st.tau)

    # keys: everything the functional will be evaluated on
    idx = CoeffIndex()
    tt = [[a.star() @ b for b in st.tau] for a in st.tau]
    KL = [a.star() @ st.Lp for a in st.K]
    kk = [[ka @ b for b in st.K] for ka in KL]
    moves = [[[a.star() @ (_letter(st, i) @ b) for b in st.tau] for a in st.tau] for i in range(1, st.p.g + 1)]
    for rows in (tt, kk):
        for r in rows:
            idx.add_polys(r)
    for H in moves:
        for r in H:
            idx.add_polys(r)
    idx.add_polys(st.rhs)
    idx.add_polys([st.p])

    rows, vals = [], []
    for a in range(mu):
        for b in range(mu):
            rows.append(idx.vector(tt[a][b]))
            vals.append(Ct[a, b])
    for a in range(len(st.K)):
        for b in range(len(st.K)):
            rows.append(idx.vector(kk[a][b]))
            vals.append(Ck[a, b])
    zero_polys = st.rhs + ([st.p] if W_is_p else [])
    for f in zero_polys:
        rows.append(idx.vector(f))
        vals.append(0.0)
    Lam = np.array(rows)
    lam, *_ = np.linalg.lstsq(Lam, np.array(vals), rcond=None)
    consistency = float(np.abs(Lam @ lam - vals).max(initial=0.0))
    if consistency > 1e-6:
        raise VerificationError(f"separating functional is inconsistent (residual {consistency:.2e})")

    if W_is_p:
        R = numkernel.orth(idx.matrix(st.rhs)) if st.rhs else np.zeros((len(idx), 0))
        pv = idx.vector(st.p)
        xi = -(pv - R @ (R.T @ pv))
        Gt = np.array([[xi @ idx.vector(tt[a][b]) for b in range(mu)] for a in range(mu)])
        Gk = np.array([[xi @ idx.vector(kk[a][b]) for b in range(len(st.K))] for a in range(len(st.K))])
        eps = None
        for e in 10.0 ** -np.arange(1, 13):
            if numkernel.min_eig(Ct + e * Gt) > 1e-8 and (not st.K or numkernel.min_eig(Ck + e * Gk) > 1e-8):
                eps = e
                break
        if eps is None:
            raise IndeterminateError("no admissible perturbation of the separating functional")
        lam = lam + eps * xi

    # GNS construction on the quotient basis tau
    G = np.array([[lam @ idx.vector(tt[a][b]) for b in range(mu)] for a in range(mu)])
    G = (G + G.T) / 2
    try:
        Rf = np.linalg.cholesky(G).T  # G = Rf^T Rf
    except np.linalg.LinAlgError as exc:
        raise IndeterminateError("moment matrix is not positive definite") from exc
    Rinv = np.linalg.inv(Rf)
    X = []
    for H in moves:
        Hm = np.array([[lam @ idx.vector(H[a][b]) for b in range(mu)] for a in range(mu)])
        X.append(Rinv.T @ Hm @ Rinv)
    n = mu
    ell = st.p.nrows
    v = np.zeros(ell * n)
    for j in range(ell):
        v[j * n:(j + 1) * n] = Rf @ _tau_coords(st.radical, (j, ()))
    norm = np.linalg.norm(v)
    if norm == 0:
        raise VerificationError("GNS vector vanished")
    v /= norm
    Xt = MatrixTuple(X, n)
    return _check_witness(st, Xt, v)


def _letter(st: _Setup, i: int) -> MatPoly:
    return MatPoly(1, 1, st.p.g, {(0, 0, (i,)): 1.0})


def _tau_coords(cb: ChipBasis, m) -> np.ndarray:
    """Coordinates over ``tau`` of a chip monomial modulo the module."""
    T = cb.T
    pos = {t: k for k, t in enumerate(T)}
    out = np.zeros(len(T))
    if m not in set(cb.chips.monomials):
        return out
    if m in pos:
        out[pos[m]] = 1.0
        return out
    o = chip_order(cb.chips)
    for th in cb.thetas:
        d = to_rowdict(th)
        if leading(d, o) == m:
            for k, c in d.items():
                if k != m and k in pos:
                    out[pos[k]] -= c
            return out
    return out


def _check_witness(st: _Setup, X: MatrixTuple, v: np.ndarray) -> Witness:
    tol = config.get().residual
    value = float(v @ evaluate(st.p, X) @ v)
    lmin = numkernel.min_eig(st.L.evaluate(X))
    res = 0.0
    for iota in st.radical.module.groebner:
        res = max(res, float(np.linalg.norm(evaluate(iota, X) @ v)))
    cols = [evaluate(t, X) @ v for t in st.tau]
    rank = numkernel.rank(np.array(cols).T, 1e-8) if cols else 0
    w = Witness(X, v, value, lmin, res, rank)
    failures = []
    if value > -tol:
        failures.append(f"v*p(X)v = {value:.3e} is not negative")
    if (st.strict and lmin < tol) or (not st.strict and lmin < -tol):
        failures.append(f"lambda_min(L(X)) = {lmin:.3e}")
    if res > tol:
        failures.append(f"module residual {res:.3e}")
    if rank != X.n:
        failures.append(f"GNS rank {rank} != {X.n}")
    if failures:
        raise VerificationError("witness failed its checks: " + "; ".join(failures))
    return w


# ---------------------------------------------------------------------------
# structured certificates for defining polynomials of monic pencils


@dataclass
class DefiningCertificate:
    """``p = sum_ab A_ab (m_a L)^* (m_b L) + sum_ab B_ab phi_a^* L phi_b`` where
    ``m_a`` are row monomials and each ``phi`` is ``r L + C`` with ``C``
    commuting with the coefficients of ``L``."""

    rows: list[MatPoly]
    phis: list[MatPoly]
    commutant: list[np.ndarray]
    A: np.ndarray
    B: np.ndarray
    residual: float

    @property
    def q_terms(self) -> list[MatPoly]:
        F = numkernel.psd_factor(self.A, 1e-12)
        return [_combine(self.rows, F[:, i]) for i in range(F.shape[1])]

    @property
    def pencil_terms(self) -> list[MatPoly]:
        F = numkernel.psd_factor(self.B, 1e-12)
        return [_combine(self.phis, F[:, j]) for j in range(F.shape[1])]


def commutant(L: LinearPencil) -> list[np.ndarray]:
    """Orthonormal basis of the constant matrices commuting with every
    coefficient of ``L`` (and their transposes)."""
    n = L.size
    mats = [L.A0] + [M for A in L.A for M in (A, A.T)]
    I = np.eye(n)
    rows = [np.kron(I, M) - np.kron(M.T, I) for M in mats]  # vec(MC - CM), column-major vec
    N = numkernel.nullspace(np.vstack(rows))
    return [N[:, k].reshape(n, n, order="F") for k in range(N.shape[1])]


def check_defining(p: MatPoly, L: LinearPencil, dq: int | None = None, dr: int | None = None) -> DefiningCertificate | None:
    """Search the structured certificate for ``p`` relative to a monic ``L``.

    A certificate implies ``p >= 0`` on the spectrahedron and that ``p(X)``
    annihilates the kernel of ``L(X)``.  Returns ``None`` when the SDP has
    no solution at the chosen degrees.
    """
    if not L.is_monic():
        raise ValueError("L must be monic")
    ell, g = L.size, L.g
    if p.shape != (ell, ell) or p.g != g:
        raise ValueError("p must be ell x ell in the pencil's variables")
    d = int(max(p.degree(), 0))
    dq = max(0, math.ceil((d - 2) / 2)) if dq is None else dq
    dr = max(0, math.ceil((d - 3) / 2)) if dr is None else dr
    Lp = L.to_matpoly()
    rows = [MatPoly(1, ell, g, {(0, j, w): 1.0}) @ Lp for w in words_upto(g, dq) for j in range(ell)]
    comm = commutant(L)
    phis = [MatPoly(ell, ell, g, {(a, b, w): 1.0}) @ Lp for w in words_upto(g, dr)
            for a in range(ell) for b in range(ell)]
    phis += [MatPoly.constant(C, g) for C in comm]
    fams = [sdp.GramFamily(rows), sdp.GramFamily(phis, Lp)]
    gs = sdp.gram_subspace(fams, [], target=p)
    sol = sdp.psd_in_span(gs.basis, gs.space, max_rank=True)
    if sol.status == sdp.INDETERMINATE:
        raise IndeterminateError(f"defining-certificate SDP indeterminate ({sol.message})")
    if not sol.feasible:
        return None
    A, B, S = sol.blocks
    s = float(S[0, 0])
    if s <= config.get().indeterminate:
        return None
    A, B = A / s, B / s
    expansion = MatPoly.zero(ell, ell, g)
    for a, ra in enumerate(rows):
        for b, rb in enumerate(rows):
            if A[a, b]:
                expansion = expansion + (ra.star() @ rb).scale(A[a, b])
    for a, fa in enumerate(phis):
        faL = fa.star() @ Lp
        for b, fb in enumerate(phis):
            if B[a, b]:
                expansion = expansion + (faL @ fb).scale(B[a, b])
    resid = _max_coeff(expansion - p)
    if resid > config.get().residual:
        raise IndeterminateError(f"defining certificate residual {resid:.2e}")
    for C in comm:
        for M in [L.A0] + list(L.A):
            if np.abs(C @ M - M @ C).max() > 1e-8:
                raise VerificationError("commutant element does not commute with L")
    return DefiningCertificate(rows, phis, comm, A, B, resid)


# ---------------------------------------------------------------------------
# vanishing and size bounds


def vanishing_chip_space(p: MatPoly, I: LeftModule) -> ChipSpace:
    """Degree-bounded chips large enough to certify ``-p^* p``."""
    gdeg = max((q.degree() for q in I.generators), default=0)
    d = int(max(max(gdeg, 1) - 1, p.degree(), 0))
    from .freepoly import degree_bounded_chips

    return degree_bounded_chips(p.ncols, p.g, d)


def vanishes_on(p: MatPoly, L: LinearPencil, I: LeftModule | None = None, chips: ChipSpace | None = None) -> bool:
    """Whether ``p(X) v = 0`` for every ``(X, v)`` with ``L(X) >= 0`` and
    ``iota(X) v = 0`` for all ``iota`` in ``I``."""
    if p.nrows != 1:
        raise ValueError("p must be a row polynomial")
    I = LeftModule(p.ncols, p.g) if I is None else I
    if p.is_zero():
        return True
    chips = vanishing_chip_space(p, I) if chips is None else chips
    rad = lreal_radical(I, L, chips)
    return rad.module.contains(p)


def size_bound(chips: ChipSpace, L: LinearPencil, strict: bool = False, I: LeftModule | None = None) -> int:
    """Matrix size that suffices to test positivity of polynomials in
    ``C^* R<x,x*>_1 C``: ``dim C`` minus the dimension of the radical inside ``C``."""
    I = LeftModule(chips.ell, chips.g) if I is None else I
    rad = lreal_radical(I, L, chips, strong=strict)
    return chips.dim - len(rad.thetas)
