"""Left modules of row polynomials: monomial orders, right division,
reduction, reduced left Groebner bases, chip-space orders and chip bases.

Row polynomials in ``R^{1 x ell}<x,x*>`` are handled internally as dicts
from monomials ``(i, w)`` (meaning ``e_i (kron) w``) to coefficients.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Iterable, Sequence

import numpy as np

from . import config, numkernel
from .freepoly import ChipSpace, MatPoly, Monomial, Word, deglex, letters, mono_key

RowDict = dict[Monomial, float]


class GroebnerError(RuntimeError):
    pass


# ---------------------------------------------------------------------------
# orders


@dataclass(frozen=True)
class MonomialOrder:
    """A left-admissible order given by a sort key on monomials."""

    name: str
    key: Callable[[Monomial], tuple] = field(compare=False)


DEGLEX = MonomialOrder("deglex", mono_key)


def chip_order(chips: ChipSpace) -> MonomialOrder:
    """Ranks chips below ``R<x,x*>_1 C`` minus chips below everything else,
    degree-lex inside each stratum."""
    inner = set(chips.monomials)
    one = set(chips.one_step())

    def key(m: Monomial) -> tuple:
        stratum = 0 if m in inner else (1 if m in one else 2)
        return (stratum, *mono_key(m))

    return MonomialOrder(f"chip-order(dim={chips.dim})", key)


# ---------------------------------------------------------------------------
# row-dict helpers


def to_rowdict(p: MatPoly) -> RowDict:
    if p.nrows != 1:
        raise ValueError("expected a row polynomial")
    return {(c, w): v for (_, c, w), v in p.terms.items()}


def from_rowdict(d: RowDict, ell: int, g: int) -> MatPoly:
    return MatPoly(1, ell, g, {(0, i, w): v for (i, w), v in d.items()})


def leading(d: RowDict, order: MonomialOrder = DEGLEX) -> Monomial:
    return max(d, key=order.key)


def monic(d: RowDict, order: MonomialOrder = DEGLEX) -> RowDict:
    m = leading(d, order)
    c = d[m]
    out = {k: v / c for k, v in d.items()}
    out[m] = 1.0
    return out


def divides_right(m1: Monomial, m2: Monomial) -> Word | None:
    """Quotient ``w`` with ``w m1 = m2`` when ``m1`` right-divides ``m2``."""
    (i1, w1), (i2, w2) = m1, m2
    if i1 != i2 or len(w1) > len(w2):
        return None
    if w1 and w2[len(w2) - len(w1):] != w1:
        return None
    return w2[:len(w2) - len(w1)]


# ---------------------------------------------------------------------------
# reduction


def _prune(d: RowDict, scale: float) -> None:
    tol = max(config.get().zero, config.get().elimination * scale)
    for k in [k for k, v in d.items() if abs(v) <= tol]:
        del d[k]


class _Divisors:
    """Lookup of basis elements by leading monomial, via suffixes."""

    def __init__(self, basis: Sequence[RowDict], order: MonomialOrder):
        self.by_lm: dict[Monomial, RowDict] = {}
        self.maxlen = 0
        for g in basis:
            m = leading(g, order)
            self.by_lm.setdefault(m, g)
            self.maxlen = max(self.maxlen, len(m[1]))

    def find(self, m: Monomial) -> tuple[Word, RowDict] | None:
        i, w = m
        for s in range(len(w) - min(len(w), self.maxlen), len(w) + 1):
            g = self.by_lm.get((i, w[s:]))
            if g is not None:
                return w[:s], g
        return None


def reduce_dict(f: RowDict, basis: Sequence[RowDict], order: MonomialOrder = DEGLEX) -> tuple[RowDict, bool]:
    """Full reduction of ``f`` by a list of monic polynomials.

    Returns the normal form and whether any division step happened.
    """
    if not basis or not f:
        return dict(f), False
    div = _Divisors(basis, order)
    f = dict(f)
    scale = max(abs(v) for v in f.values())
    out: RowDict = {}
    touched = False
    key = order.key
    while f:
        m = max(f, key=key)
        c = f.pop(m)
        hit = div.find(m)
        if hit is None:
            out[m] = c
            continue
        touched = True
        u, g = hit
        lm = leading(g, order)
        for (i, w), v in g.items():
            if (i, w) == lm:
                continue
            k = (i, u + w)
            f[k] = f.get(k, 0.0) - c * v
        scale = max(scale, max((abs(v) for v in f.values()), default=0.0))
        _prune(f, scale)
    _prune(out, scale)
    return out, touched


def reduce(p: MatPoly, G: Sequence[MatPoly], order: MonomialOrder = DEGLEX) -> MatPoly:
    """Normal form of ``p`` with respect to the monic polynomials ``G``."""
    basis = [to_rowdict(q) for q in G if not q.is_zero()]
    r, _ = reduce_dict(to_rowdict(p), basis, order)
    return from_rowdict(r, p.ncols, p.g)


def _canonical(d: RowDict, order: MonomialOrder) -> tuple:
    return tuple(sorted(((order.key(m), v) for m, v in d.items()), reverse=True))


def reduced_groebner_dicts(gens: Iterable[RowDict], order: MonomialOrder = DEGLEX) -> list[RowDict]:
    """Reduced left Groebner basis by interreduction.

    For left modules over the free algebra, mutually non-dividing leading
    monomials already make a Groebner basis (one-sided products of distinct
    basis elements never share a leading monomial), so interreduction to a
    fixed point suffices.
    """
    basis = [monic(d, order) for d in gens if d]
    basis.sort(key=lambda d: _canonical(d, order))
    cap = 10 * max(1, sum(len(d) for d in basis))
    passes = 0
    changed = True
    while changed:
        passes += 1
        if passes > cap:
            raise GroebnerError(f"interreduction did not settle within {cap} passes")
        changed = False
        basis.sort(key=lambda d: _canonical(d, order))
        for idx in range(len(basis)):
            g = basis[idx]
            if not g:
                continue
            others = [b for j, b in enumerate(basis) if j != idx and b]
            r, touched = reduce_dict(g, others, order)
            if touched:
                changed = True
                basis[idx] = monic(r, order) if r else {}
        basis = [b for b in basis if b]
    basis.sort(key=lambda d: order.key(leading(d, order)))
    return basis


def reduced_groebner(generators: Sequence[MatPoly], order: MonomialOrder = DEGLEX) -> list[MatPoly]:
    if not generators:
        return []
    ell, g = generators[0].ncols, generators[0].g
    dicts = reduced_groebner_dicts((to_rowdict(p) for p in generators), order)
    return [from_rowdict(d, ell, g) for d in dicts]


# ---------------------------------------------------------------------------
# modules


class LeftModule:
    """A left ``R<x,x*>``-module of rows generated by finitely many polynomials."""

    def __init__(self, ell: int, g: int, generators: Iterable[MatPoly] = (), order: MonomialOrder = DEGLEX):
        gens = []
        for p in generators:
            if p.nrows != 1 or p.ncols != ell or p.g != g:
                raise ValueError(f"generator of shape {p.shape}, g={p.g} does not fit ell={ell}, g={g}")
            if not p.is_zero():
                gens.append(p)
        self.ell, self.g, self.order = ell, g, order
        self.generators: tuple[MatPoly, ...] = tuple(gens)

    @cached_property
    def basis_dicts(self) -> list[RowDict]:
        return reduced_groebner_dicts((to_rowdict(p) for p in self.generators), self.order)

    @cached_property
    def groebner(self) -> list[MatPoly]:
        return [from_rowdict(d, self.ell, self.g) for d in self.basis_dicts]

    def leading_monomials(self) -> list[Monomial]:
        return [leading(d, self.order) for d in self.basis_dicts]

    def normal_form_dict(self, d: RowDict) -> RowDict:
        return reduce_dict(d, self.basis_dicts, self.order)[0]

    def normal_form(self, p: MatPoly) -> MatPoly:
        return from_rowdict(self.normal_form_dict(to_rowdict(p)), self.ell, self.g)

    def contains(self, p: MatPoly, tol: float | None = None) -> bool:
        d = to_rowdict(p)
        if not d:
            return True
        tol = config.get().rank if tol is None else tol
        scale = max(abs(v) for v in d.values())
        nf = self.normal_form_dict(d)
        return max((abs(v) for v in nf.values()), default=0.0) <= tol * max(scale, 1.0)

    def is_whole(self) -> bool:
        """Whether the module is all of ``R^{1 x ell}<x,x*>``."""
        lms = set(self.leading_monomials())
        return all((i, ()) in lms for i in range(self.ell))

    def max_degree(self) -> float:
        return max((p.degree() for p in self.generators), default=-math.inf)

    def extended(self, more: Iterable[MatPoly]) -> "LeftModule":
        return LeftModule(self.ell, self.g, list(self.groebner) + list(more), self.order)

    def same_as(self, other: "LeftModule", tol: float = 1e-6) -> bool:
        """Equality as modules, compared through reduced bases."""
        a, b = self.basis_dicts, other.basis_dicts
        if len(a) != len(b):
            return False
        return all(
            abs(da.get(k, 0.0) - db.get(k, 0.0)) <= tol
            for da, db in zip(a, b)
            for k in set(da) | set(db)
        )

    def __repr__(self) -> str:
        return f"LeftModule(ell={self.ell}, g={self.g}, {len(self.generators)} generators)"


def contains(I: LeftModule, p: MatPoly) -> bool:
    return I.contains(p)


# ---------------------------------------------------------------------------
# chip bases


@dataclass
class ChipBasis:
    """Canonical generators of a module relative to a chip space.

    ``thetas`` span ``I`` intersected with the chips; ``iotas`` complete
    them to a basis of ``I`` intersected with ``R<x,x*>_1 C``.  Every element
    has a distinct leading monomial under the chip order and is monic.
    """

    module: LeftModule
    chips: ChipSpace
    iotas: list[MatPoly]
    thetas: list[MatPoly]
    one_step: tuple[Monomial, ...]
    # coordinates of the intersection with R<x,x*>_1 C, rows over one_step
    kernel: np.ndarray
    # per-iteration records left by the radical computation that produced it
    audit: list = field(default_factory=list)

    @property
    def order(self) -> MonomialOrder:
        return chip_order(self.chips)

    @cached_property
    def theta_leads(self) -> set[Monomial]:
        o = chip_order(self.chips)
        return {leading(to_rowdict(t), o) for t in self.thetas}

    @cached_property
    def T(self) -> list[Monomial]:
        """Chip monomials that are not leading monomials of thetas."""
        return [m for m in self.chips.monomials if m not in self.theta_leads]

    def tau(self) -> list[MatPoly]:
        ell, g = self.chips.ell, self.chips.g
        return [MatPoly(1, ell, g, {(0, i, w): 1.0}) for i, w in self.T]

    def intersection(self) -> list[MatPoly]:
        """A basis of the module intersected with ``R<x,x*>_1 C``."""
        return self.thetas + self.iotas

    def decompose(self, f: MatPoly, max_steps: int = 100000):
        """Write ``f = sum_i p_i iota_i + sum_j alpha_j theta_j``.

        Returns ``(ps, alphas, remainder)``; the remainder is zero when
        ``f`` lies in the span.
        """
        o = chip_order(self.chips)
        iotas = [to_rowdict(q) for q in self.iotas]
        thetas = [to_rowdict(q) for q in self.thetas]
        iota_lm = [leading(d, o) for d in iotas]
        theta_lm = {leading(d, o): j for j, d in enumerate(thetas)}
        ell, g = self.chips.ell, self.chips.g
        ps: list[dict] = [dict() for _ in iotas]
        alphas = np.zeros(len(thetas))
        rem: RowDict = {}
        d = dict(to_rowdict(f))
        scale = max((abs(v) for v in d.values()), default=1.0)
        for _ in range(max_steps):
            if not d:
                break
            m = max(d, key=o.key)
            c = d.pop(m)
            if m in theta_lm:
                j = theta_lm[m]
                alphas[j] += c
                for k, v in thetas[j].items():
                    if k != m:
                        d[k] = d.get(k, 0.0) - c * v
            else:
                for idx, lm in enumerate(iota_lm):
                    u = divides_right(lm, m)
                    if u is not None:
                        ps[idx][u] = ps[idx].get(u, 0.0) + c
                        for (i, w), v in iotas[idx].items():
                            k = (i, u + w)
                            if k != m:
                                d[k] = d.get(k, 0.0) - c * v
                        break
                else:
                    rem[m] = c
            _prune(d, scale)
        polys = [MatPoly(1, 1, g, {(0, 0, u): v for u, v in p.items()}) for p in ps]
        return polys, alphas, from_rowdict(rem, ell, g)


def chip_basis(I: LeftModule, chips: ChipSpace) -> ChipBasis:
    """Chip basis of ``I`` relative to ``chips``, by linear algebra on
    normal forms over ``R<x,x*>_1 C``."""
    if chips.ell != I.ell or chips.g != I.g:
        raise ValueError("chip space does not match the module")
    V1 = chips.one_step()
    V1set = set(V1)
    for p in I.generators:
        for (_, c, w) in p.terms:
            if (c, w) not in V1set:
                raise ValueError("module generator lies outside R<x,x*>_1 C")
    o = chip_order(chips)
    ell, g = I.ell, I.g
    if not I.generators or not V1:
        return ChipBasis(I, chips, [], [], V1, np.zeros((0, len(V1))))
    # normal forms of every monomial of V1
    nf_index: dict[Monomial, int] = {}
    cols = []
    for m in V1:
        nf = I.normal_form_dict({m: 1.0})
        for k in nf:
            nf_index.setdefault(k, len(nf_index))
        cols.append(nf)
    N = np.zeros((len(nf_index), len(V1)))
    for j, nf in enumerate(cols):
        for k, v in nf.items():
            N[nf_index[k], j] = v
    K = numkernel.nullspace(N).T if len(nf_index) else np.eye(len(V1))
    if K.shape[0] == 0:
        return ChipBasis(I, chips, [], [], V1, np.zeros((0, len(V1))))
    # echelon form with pivots at the largest monomials in the chip order
    desc = sorted(range(len(V1)), key=lambda j: o.key(V1[j]), reverse=True)
    R, piv = numkernel.rref(K, np.array(desc))
    inner = set(chips.monomials)
    iotas, thetas = [], []
    for row, pc in zip(R, piv):
        p = MatPoly(1, ell, g, {(0, V1[j][0], V1[j][1]): row[j] for j in np.nonzero(row)[0]})
        (thetas if V1[pc] in inner else iotas).append(p)
    key = lambda q: o.key(leading(to_rowdict(q), o))
    thetas.sort(key=key)
    iotas.sort(key=key)
    return ChipBasis(I, chips, iotas, thetas, V1, R)
