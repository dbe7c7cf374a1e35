"""Words, noncommutative polynomials with matrix coefficients, linear pencils,
evaluation at matrix tuples, chip spaces and the symmetric-variable transforms.

A word is a tuple of signed letters: ``+k`` stands for ``x_k`` and ``-k`` for
``x_k^*`` (``k`` is 1-based).  The empty tuple is the identity word.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import cached_property
from numbers import Real
from typing import Iterable, Iterator, Mapping, Sequence

import numpy as np

from . import config

Word = tuple[int, ...]
Key = tuple[int, int, Word]  # (row, col, word)

# ---------------------------------------------------------------------------
# words


def word_star(w: Word) -> Word:
    return tuple(-a for a in reversed(w))


def letter_rank(a: int) -> int:
    """Letter order x1 < x1* < x2 < x2* < ..."""
    return 2 * (abs(a) - 1) + (a < 0)


def deglex(w: Word) -> tuple:
    return (len(w), tuple(letter_rank(a) for a in w))


def letters(g: int) -> list[int]:
    """All 2g letters in increasing order."""
    return [s * k for k in range(1, g + 1) for s in (1, -1)]


def words_upto(g: int, d: int) -> list[Word]:
    """All words of length at most ``d``, in degree-lex order."""
    out: list[Word] = [()]
    alphabet = letters(g)
    for n in range(1, d + 1):
        out.extend(itertools.product(alphabet, repeat=n))
    return out


def check_word(w: Sequence[int], g: int) -> Word:
    w = tuple(int(a) for a in w)
    for a in w:
        if a == 0 or abs(a) > g:
            raise ValueError(f"letter {a} out of range for arity {g}")
    return w


# ---------------------------------------------------------------------------
# matrix polynomials


class MatPoly:
    """A sparse ``nrows x ncols`` matrix of polynomials in ``x, x^*``.

    Terms map ``(row, col, word)`` to a real coefficient.  Values are treated
    as immutable; arithmetic returns new objects.
    """

    __slots__ = ("nrows", "ncols", "g", "terms")

    def __init__(self, nrows: int, ncols: int, g: int, terms: Mapping[Key, float] | None = None, *, prune: bool = True):
        if nrows < 0 or ncols < 0 or g < 0:
            raise ValueError("dimensions and arity must be nonnegative")
        self.nrows, self.ncols, self.g = int(nrows), int(ncols), int(g)
        out: dict[Key, float] = {}
        if terms:
            zero = config.get().zero
            for (r, c, w), v in terms.items():
                if not (0 <= r < nrows and 0 <= c < ncols):
                    raise ValueError(f"entry ({r}, {c}) outside {nrows}x{ncols}")
                v = float(v)
                if prune and abs(v) < zero:
                    continue
                out[(int(r), int(c), tuple(w))] = v
        self.terms = out

    # -- constructors -----------------------------------------------------
    @classmethod
    def zero(cls, nrows: int, ncols: int, g: int) -> "MatPoly":
        return cls(nrows, ncols, g)

    @classmethod
    def constant(cls, M, g: int) -> "MatPoly":
        M = np.atleast_2d(np.asarray(M, dtype=float))
        return cls(M.shape[0], M.shape[1], g, {(i, j, ()): M[i, j] for i, j in zip(*np.nonzero(M))})

    @classmethod
    def identity(cls, n: int, g: int) -> "MatPoly":
        return cls(n, n, g, {(i, i, ()): 1.0 for i in range(n)})

    @classmethod
    def monomial(cls, word: Sequence[int], g: int, coeff: float = 1.0, row: int = 0, col: int = 0,
                 nrows: int = 1, ncols: int = 1) -> "MatPoly":
        return cls(nrows, ncols, g, {(row, col, check_word(word, g)): coeff})

    @classmethod
    def from_entries(cls, entries: Sequence[Sequence["MatPoly | float"]], g: int) -> "MatPoly":
        """Assemble a matrix from scalar (1x1) polynomials or numbers."""
        nrows = len(entries)
        ncols = len(entries[0]) if nrows else 0
        terms: dict[Key, float] = {}
        for i, row in enumerate(entries):
            if len(row) != ncols:
                raise ValueError("ragged entries")
            for j, e in enumerate(row):
                if isinstance(e, MatPoly):
                    if (e.nrows, e.ncols) != (1, 1) or e.g != g:
                        raise ValueError("entries must be scalar polynomials of matching arity")
                    for (_, _, w), v in e.terms.items():
                        terms[(i, j, w)] = terms.get((i, j, w), 0.0) + v
                elif e:
                    terms[(i, j, ())] = terms.get((i, j, ()), 0.0) + float(e)
        return cls(nrows, ncols, g, terms)

    @classmethod
    def block(cls, blocks: Sequence[Sequence["MatPoly"]]) -> "MatPoly":
        g = blocks[0][0].g
        heights = [row[0].nrows for row in blocks]
        widths = [b.ncols for b in blocks[0]]
        terms: dict[Key, float] = {}
        r0 = 0
        for bi, row in enumerate(blocks):
            c0 = 0
            for bj, b in enumerate(row):
                if (b.nrows, b.ncols) != (heights[bi], widths[bj]) or b.g != g:
                    raise ValueError("block dimensions do not line up")
                for (r, c, w), v in b.terms.items():
                    terms[(r0 + r, c0 + c, w)] = v
                c0 += widths[bj]
            r0 += heights[bi]
        return cls(sum(heights), sum(widths), g, terms)

    # -- basic queries ----------------------------------------------------
    @property
    def shape(self) -> tuple[int, int]:
        return (self.nrows, self.ncols)

    def is_zero(self) -> bool:
        return not self.terms

    def degree(self) -> float:
        return max((len(w) for (_, _, w) in self.terms), default=-math.inf)

    def letter_degrees(self) -> dict[int, int]:
        """Maximum number of occurrences of each letter in a single word."""
        out: dict[int, int] = {}
        for (_, _, w) in self.terms:
            for a in set(w):
                out[a] = max(out.get(a, 0), w.count(a))
        return out

    def sorted_terms(self) -> list[tuple[Key, float]]:
        return sorted(self.terms.items(), key=lambda kv: (kv[0][0], kv[0][1], deglex(kv[0][2])))

    def coeff(self, row: int, col: int, word: Sequence[int] = ()) -> float:
        return self.terms.get((row, col, tuple(word)), 0.0)

    def entry(self, i: int, j: int) -> "MatPoly":
        return MatPoly(1, 1, self.g, {(0, 0, w): v for (r, c, w), v in self.terms.items() if r == i and c == j})

    def row(self, i: int) -> "MatPoly":
        return MatPoly(1, self.ncols, self.g, {(0, c, w): v for (r, c, w), v in self.terms.items() if r == i})

    def col(self, j: int) -> "MatPoly":
        return MatPoly(self.nrows, 1, self.g, {(r, 0, w): v for (r, c, w), v in self.terms.items() if c == j})

    def rows(self) -> list["MatPoly"]:
        return [self.row(i) for i in range(self.nrows)]

    def constant_term(self) -> np.ndarray:
        M = np.zeros(self.shape)
        for (r, c, w), v in self.terms.items():
            if not w:
                M[r, c] = v
        return M

    def max_abs(self) -> float:
        return max((abs(v) for v in self.terms.values()), default=0.0)

    # -- arithmetic -------------------------------------------------------
    def _like(self, other: "MatPoly") -> None:
        if self.shape != other.shape or self.g != other.g:
            raise ValueError(f"shape/arity mismatch: {self.shape},g={self.g} vs {other.shape},g={other.g}")

    def __add__(self, other):
        if isinstance(other, Real):
            other = MatPoly.constant(np.eye(self.nrows, self.ncols) * float(other), self.g)
        if not isinstance(other, MatPoly):
            return NotImplemented
        self._like(other)
        t = dict(self.terms)
        for k, v in other.terms.items():
            t[k] = t.get(k, 0.0) + v
        return MatPoly(self.nrows, self.ncols, self.g, t)

    __radd__ = __add__

    def __neg__(self):
        return MatPoly(self.nrows, self.ncols, self.g, {k: -v for k, v in self.terms.items()})

    def __sub__(self, other):
        if isinstance(other, Real):
            return self + (-float(other))
        if not isinstance(other, MatPoly):
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, s: float) -> "MatPoly":
        return MatPoly(self.nrows, self.ncols, self.g, {k: s * v for k, v in self.terms.items()})

    def __mul__(self, other):
        if isinstance(other, Real):
            return self.scale(float(other))
        if isinstance(other, MatPoly):
            return multiply(self, other)
        return NotImplemented

    def __rmul__(self, other):
        if isinstance(other, Real):
            return self.scale(float(other))
        return NotImplemented

    def __matmul__(self, other):
        return multiply(self, other)

    def left_matmul(self, M) -> "MatPoly":
        """Constant matrix times polynomial matrix."""
        return multiply(MatPoly.constant(M, self.g), self)

    def right_matmul(self, M) -> "MatPoly":
        return multiply(self, MatPoly.constant(M, self.g))

    def star(self) -> "MatPoly":
        return involution(self)

    def transpose_entries(self) -> "MatPoly":
        """Transpose the coefficient layout without touching words."""
        return MatPoly(self.ncols, self.nrows, self.g, {(c, r, w): v for (r, c, w), v in self.terms.items()})

    def is_symmetric(self, tol: float = 0.0) -> bool:
        if self.nrows != self.ncols:
            return False
        return (self - self.star()).max_abs() <= tol

    def approx_equal(self, other: "MatPoly", tol: float = 1e-9) -> bool:
        return self.shape == other.shape and (self - other).max_abs() <= tol

    def __eq__(self, other) -> bool:
        if not isinstance(other, MatPoly):
            return NotImplemented
        return self.shape == other.shape and self.g == other.g and self.terms == other.terms

    def __hash__(self) -> int:
        return hash((self.nrows, self.ncols, self.g, tuple(self.sorted_terms())))

    def __repr__(self) -> str:
        return f"MatPoly({self.nrows}x{self.ncols}, g={self.g}, {format_poly(self)})"

    def __call__(self, X) -> np.ndarray:
        return evaluate(self, X)


RowPoly = MatPoly  # the nrows == 1 case
NCPoly = MatPoly  # the 1x1 case


def x(k: int, g: int) -> MatPoly:
    """The scalar polynomial ``x_k``."""
    return MatPoly.monomial((k,), g)


def xs(k: int, g: int) -> MatPoly:
    """The scalar polynomial ``x_k^*``."""
    return MatPoly.monomial((-k,), g)


def const(c: float, g: int) -> MatPoly:
    return MatPoly(1, 1, g, {(0, 0, ()): c})


def format_word(w: Word) -> str:
    if not w:
        return "1"
    return "".join(f"x{abs(a)}" + ("*" if a < 0 else "") for a in w)


def format_poly(p: MatPoly) -> str:
    if p.is_zero():
        return "0"
    parts = []
    for (r, c, w), v in p.sorted_terms():
        loc = f"[{r},{c}]" if (p.nrows, p.ncols) != (1, 1) else ""
        parts.append(f"{v:+.6g}{loc}{'' if not w else '*' + format_word(w)}")
    return " ".join(parts)


def multiply(p: MatPoly, q: MatPoly) -> MatPoly:
    """Product of conformable matrix polynomials (word concatenation)."""
    if p.ncols != q.nrows:
        raise ValueError(f"dimension mismatch: {p.shape} @ {q.shape}")
    if p.g != q.g:
        raise ValueError("arity mismatch")
    by_row: dict[int, list[tuple[int, Word, float]]] = {}
    for (r, c, w), v in q.terms.items():
        by_row.setdefault(r, []).append((c, w, v))
    t: dict[Key, float] = {}
    for (r, k, w1), v1 in p.terms.items():
        for c, w2, v2 in by_row.get(k, ()):
            key = (r, c, w1 + w2)
            t[key] = t.get(key, 0.0) + v1 * v2
    return MatPoly(p.nrows, q.ncols, p.g, t)


def involution(p: MatPoly) -> MatPoly:
    """``p^*``: transpose the matrix layout and reverse/star every word."""
    return MatPoly(p.ncols, p.nrows, p.g, {(c, r, word_star(w)): v for (r, c, w), v in p.terms.items()})


def left_word_mul(u: Word, p: MatPoly) -> MatPoly:
    return MatPoly(p.nrows, p.ncols, p.g, {(r, c, u + w): v for (r, c, w), v in p.terms.items()}, prune=False)


# ---------------------------------------------------------------------------
# evaluation


@dataclass(frozen=True)
class MatrixTuple:
    """A g-tuple of real ``n x n`` matrices (not necessarily symmetric)."""

    X: tuple[np.ndarray, ...]
    size: int

    def __init__(self, X: Iterable[np.ndarray], n: int | None = None):
        mats = tuple(np.atleast_2d(np.asarray(M, dtype=float)) for M in X)
        if not mats and n is None:
            raise ValueError("empty matrix tuple needs an explicit size n")
        size = mats[0].shape[0] if mats else int(n)
        for M in mats:
            if M.shape != (size, size):
                raise ValueError("all matrices must be square of the same size")
        if n is not None and size != n:
            raise ValueError(f"matrices have size {size}, expected {n}")
        object.__setattr__(self, "X", mats)
        object.__setattr__(self, "size", size)

    @property
    def n(self) -> int:
        return self.size

    @property
    def g(self) -> int:
        return len(self.X)

    def direct_sum(self, other: "MatrixTuple") -> "MatrixTuple":
        from scipy.linalg import block_diag

        return MatrixTuple([block_diag(A, B) for A, B in zip(self.X, other.X)], self.n + other.n)


def _as_tuple(X) -> list[np.ndarray]:
    if isinstance(X, MatrixTuple):
        return list(X.X)
    return [np.atleast_2d(np.asarray(M, dtype=float)) for M in X]


def evaluate(p: MatPoly, X, n: int | None = None) -> np.ndarray:
    """Evaluate ``p`` at the tuple ``X``: ``sum_w A_w (kron) w(X)``.

    ``x_k^*`` evaluates to ``X_k^T``.  The result has shape
    ``(nrows * n, ncols * n)``.
    """
    Xs = _as_tuple(X)
    if len(Xs) != p.g:
        raise ValueError(f"arity mismatch: polynomial has g={p.g}, tuple has {len(Xs)} matrices")
    if isinstance(X, MatrixTuple):
        n = X.n
    elif Xs:
        n = Xs[0].shape[0]
    elif n is None:
        n = 1
    cache: dict[Word, np.ndarray] = {(): np.eye(n)}

    # Of each pair {w, w*} only the deglex-smaller word is multiplied out; the
    # other is its transpose, and self-adjoint words u u* are symmetrized.
    # With the star-invariant summation order below this makes
    # evaluate(p.star(), X) equal to evaluate(p, X).T exactly.
    def word_val(w: Word) -> np.ndarray:
        if w in cache:
            return cache[w]
        ws = word_star(w)
        if ws == w:
            U = word_val(w[:len(w) // 2])
            val = U @ U.T
            val = (val + val.T) * 0.5
        elif deglex(ws) < deglex(w):
            val = word_val(ws).T
        else:
            a = w[-1]
            M = Xs[abs(a) - 1]
            val = word_val(w[:-1]) @ (M if a > 0 else M.T)
        cache[w] = val
        return val

    # group each block's terms by the pair {w, w*}; a pair is summed on its
    # own (two-term sums commute) before joining the block total
    groups: dict[tuple, list[np.ndarray]] = {}
    for (r, c, w), v in p.terms.items():
        pair = min(deglex(w), deglex(word_star(w)))
        groups.setdefault((r, c, pair), []).append(v * word_val(w))
    out = np.zeros((p.nrows * n, p.ncols * n))
    for (r, c, _), vals in sorted(groups.items(), key=lambda kv: kv[0][2]):
        out[r * n:(r + 1) * n, c * n:(c + 1) * n] += vals[0] if len(vals) == 1 else vals[0] + vals[1]
    return out


# ---------------------------------------------------------------------------
# linear pencils


@dataclass(frozen=True, eq=False)
class LinearPencil:
    """``L = A0 + sum_i A_i x_i + A_i^T x_i^*`` with ``A0`` symmetric."""

    A0: np.ndarray
    A: tuple[np.ndarray, ...]

    def __init__(self, A0, A: Sequence = ()):
        A0 = np.atleast_2d(np.asarray(A0, dtype=float))
        nu = A0.shape[0]
        if A0.shape != (nu, nu):
            raise ValueError("A0 must be square")
        if np.abs(A0 - A0.T).max(initial=0.0) > 1e-12 * max(1.0, np.abs(A0).max(initial=0.0)):
            raise ValueError("A0 must be symmetric")
        mats = []
        for Ai in A:
            Ai = np.asarray(Ai, dtype=float).reshape(nu, nu)
            mats.append(Ai)
        object.__setattr__(self, "A0", (A0 + A0.T) / 2)
        object.__setattr__(self, "A", tuple(mats))

    @classmethod
    def identity(cls, g: int, size: int = 1) -> "LinearPencil":
        return cls(np.eye(size), [np.zeros((size, size))] * g)

    @property
    def size(self) -> int:
        return self.A0.shape[0]

    @property
    def g(self) -> int:
        return len(self.A)

    def is_monic(self) -> bool:
        return np.array_equal(self.A0, np.eye(self.size))

    def coefficient_stack(self) -> np.ndarray:
        """Coefficients over the linear monomials ``1, x1, x1*, x2, ...``."""
        out = [self.A0]
        for Ai in self.A:
            out += [Ai, Ai.T]
        return np.array(out).reshape(1 + 2 * self.g, self.size, self.size)

    @classmethod
    def from_coefficient_stack(cls, stack: np.ndarray) -> "LinearPencil":
        g = (stack.shape[0] - 1) // 2
        return cls(stack[0], [stack[2 * k + 1] for k in range(g)])

    def to_matpoly(self) -> MatPoly:
        t: dict[Key, float] = {}
        nu = self.size
        for i in range(nu):
            for j in range(nu):
                if self.A0[i, j]:
                    t[(i, j, ())] = self.A0[i, j]
                for k, Ak in enumerate(self.A, start=1):
                    if Ak[i, j]:
                        t[(i, j, (k,))] = Ak[i, j]
                    if Ak[j, i]:
                        t[(i, j, (-k,))] = Ak[j, i]
        return MatPoly(nu, nu, self.g, t)

    @classmethod
    def from_matpoly(cls, p: MatPoly) -> "LinearPencil":
        if p.nrows != p.ncols or p.degree() > 1:
            raise ValueError("a pencil must be square of degree at most one")
        if not p.is_symmetric(1e-12):
            raise ValueError("a pencil must be symmetric")
        nu = p.nrows
        A0 = p.constant_term()
        A = [np.zeros((nu, nu)) for _ in range(p.g)]
        for (r, c, w), v in p.terms.items():
            if len(w) == 1 and w[0] > 0:
                A[w[0] - 1][r, c] = v
        return cls(A0, A)

    def evaluate(self, X) -> np.ndarray:
        Xs = _as_tuple(X)
        if len(Xs) != self.g:
            raise ValueError("arity mismatch")
        n = X.n if isinstance(X, MatrixTuple) else (Xs[0].shape[0] if Xs else 1)
        out = np.kron(self.A0, np.eye(n))
        for Ak, Xk in zip(self.A, Xs):
            out += np.kron(Ak, Xk) + np.kron(Ak.T, Xk.T)
        return out

    def __call__(self, X) -> np.ndarray:
        return self.evaluate(X)

    def at_point(self, xpt: Sequence[float]) -> np.ndarray:
        """Scalar evaluation, ``x_k = x_k^* = xpt[k]``."""
        out = self.A0.copy()
        for Ak, v in zip(self.A, xpt):
            out += v * (Ak + Ak.T)
        return out

    def compress(self, V: np.ndarray) -> "LinearPencil":
        """``V^T L V`` for a ``size x m`` matrix ``V``."""
        return LinearPencil(V.T @ self.A0 @ V, [V.T @ Ak @ V for Ak in self.A])

    def direct_sum(self, other: "LinearPencil") -> "LinearPencil":
        from scipy.linalg import block_diag

        return LinearPencil(block_diag(self.A0, other.A0), [block_diag(a, b) for a, b in zip(self.A, other.A)])

    def __repr__(self) -> str:
        return f"LinearPencil(size={self.size}, g={self.g})"


# ---------------------------------------------------------------------------
# chip spaces

Monomial = tuple[int, Word]  # e_i (kron) w in R^{1 x ell}


def mono_key(m: Monomial) -> tuple:
    """Degree-lex with the row index as final tie-break."""
    return (*deglex(m[1]), m[0])


@dataclass(frozen=True)
class ChipSpace:
    """A finite span of row monomials ``e_i (kron) w`` in ``R^{1 x ell}``."""

    ell: int
    g: int
    monomials: tuple[Monomial, ...] = field(default=())

    def __post_init__(self) -> None:
        ms = sorted({(int(i), tuple(w)) for i, w in self.monomials}, key=mono_key)
        for i, w in ms:
            if not 0 <= i < self.ell:
                raise ValueError(f"row index {i} outside ell={self.ell}")
            check_word(w, self.g)
        object.__setattr__(self, "monomials", tuple(ms))

    @cached_property
    def index(self) -> dict[Monomial, int]:
        return {m: k for k, m in enumerate(self.monomials)}

    @property
    def dim(self) -> int:
        return len(self.monomials)

    def __len__(self) -> int:
        return len(self.monomials)

    def __iter__(self) -> Iterator[Monomial]:
        return iter(self.monomials)

    def __contains__(self, m) -> bool:
        return m in self.index

    @cached_property
    def degree(self) -> int:
        return max((len(w) for _, w in self.monomials), default=-1)

    def is_chip_closed(self) -> bool:
        members = self.index
        for i, w in self.monomials:
            for a in range(len(w) + 1):
                for b in range(a, len(w) + 1):
                    # w = w1 w2 w3 with w1 = w[:a], w2 = w[a:b], w3 = w[b:]
                    if (i, w[b:]) in members and (i, w[a:]) not in members:
                        return False
        return True

    def is_full(self) -> bool:
        members = self.index
        return all((i, w[a:]) in members for i, w in self.monomials for a in range(len(w) + 1))

    def one_step(self) -> tuple[Monomial, ...]:
        """Monomials of ``R<x,x*>_1 C``: ``e_i (kron) a w`` with ``|a| <= 1``."""
        out = set(self.monomials)
        for i, w in self.monomials:
            for a in letters(self.g):
                out.add((i, (a,) + w))
        return tuple(sorted(out, key=mono_key))

    def as_rows(self) -> list[MatPoly]:
        return [MatPoly(1, self.ell, self.g, {(0, i, w): 1.0}) for i, w in self.monomials]


def degree_bounded_chips(ell: int, g: int, d: int, letter_caps: Mapping[int, int] | None = None) -> ChipSpace:
    """All ``e_i (kron) w`` with ``|w| <= d`` and per-letter occurrence caps."""
    if d < 0:
        return ChipSpace(ell, g, ())
    mons = []
    for w in words_upto(g, d):
        if letter_caps is not None and any(w.count(a) > letter_caps.get(a, 0) for a in set(w)):
            continue
        mons.extend((i, w) for i in range(ell))
    return ChipSpace(ell, g, tuple(mons))


def generator_chips(monomials: Iterable[Monomial], ell: int, g: int) -> ChipSpace:
    """Span of the proper right chips (strict suffixes) of the given monomials."""
    out = set()
    for i, w in monomials:
        for a in range(1, len(w) + 1):
            out.add((i, tuple(w[a:])))
    return ChipSpace(ell, g, tuple(out))


def default_chip_degree(p_degree: float, gen_degree: float) -> int:
    """Chip degree sufficient for certificates of a target of degree
    ``p_degree`` relative to generators of degree at most ``gen_degree``."""
    d = -1 if gen_degree == -math.inf else int(gen_degree)
    delta = 0 if p_degree == -math.inf else int(p_degree)
    return max(d - 1, math.ceil((delta - 1) / 2), 0)


def build_chip_space(mode: str, **params) -> ChipSpace:
    """Dispatch on ``mode``: ``"degree"`` (ell, g, d, letter_caps) or
    ``"generators"`` (monomials, ell, g)."""
    if mode in ("degree", "degree-bounded"):
        return degree_bounded_chips(params["ell"], params["g"], params.get("d", 0), params.get("letter_caps"))
    if mode in ("generators", "chips-of-generators"):
        return generator_chips(params.get("monomials", ()), params["ell"], params["g"])
    raise ValueError(f"unknown chip-space mode {mode!r}")


def default_chip_space(ell: int, g: int, p: MatPoly | None = None, generators: Sequence[MatPoly] = ()) -> ChipSpace:
    """Degree-bounded chip space sized for a target ``p`` and module generators.

    Per-letter caps take the larger of the occurrences in ``p`` and in the
    generators.
    """
    gen_deg = max((q.degree() for q in generators), default=-math.inf)
    p_deg = p.degree() if p is not None else -math.inf
    d = default_chip_degree(p_deg, gen_deg)
    caps: dict[int, int] = {}
    for q in list(generators) + ([p] if p is not None else []):
        for a, c in q.letter_degrees().items():
            caps[a] = max(caps.get(a, 0), c)
    return degree_bounded_chips(ell, g, d, caps)


# ---------------------------------------------------------------------------
# symmetric variables


def symmetrize(p: MatPoly) -> MatPoly:
    """Set ``x_k^* = x_k``: a polynomial in symmetric variables, stored with
    positive letters only."""
    t: dict[Key, float] = {}
    for (r, c, w), v in p.terms.items():
        key = (r, c, tuple(abs(a) for a in w))
        t[key] = t.get(key, 0.0) + v
    return MatPoly(p.nrows, p.ncols, p.g, t)


def free_lift(q: MatPoly) -> MatPoly:
    """Substitute ``(x_k + x_k^*)/2`` for each symmetric variable ``x_k``."""
    t: dict[Key, float] = {}
    for (r, c, w), v in q.terms.items():
        if any(a < 0 for a in w):
            raise ValueError("free_lift expects a symmetric-variable polynomial (positive letters only)")
        coeff = v / 2 ** len(w)
        for signs in itertools.product((1, -1), repeat=len(w)):
            key = (r, c, tuple(s * a for s, a in zip(signs, w)))
            t[key] = t.get(key, 0.0) + coeff
    return MatPoly(q.nrows, q.ncols, q.g, t)


def sym_involution(q: MatPoly) -> MatPoly:
    """Involution for symmetric-variable polynomials (words are reversed only)."""
    return MatPoly(q.ncols, q.nrows, q.g, {(c, r, tuple(reversed(w))): v for (r, c, w), v in q.terms.items()})


def symmetric_pencil_lift(A0, A: Sequence) -> LinearPencil:
    """Free pencil whose symmetrization is ``A0 + sum A_k x_k`` (``A_k`` symmetric)."""
    return LinearPencil(A0, [np.asarray(Ak, dtype=float) / 2 for Ak in A])


# ---------------------------------------------------------------------------
# coefficient vectors


class CoeffIndex:
    """Assigns column indices to coefficient keys so that families of matrix
    polynomials can be turned into dense matrices."""

    def __init__(self, keys: Iterable[Key] = ()):
        self.keys: list[Key] = []
        self.pos: dict[Key, int] = {}
        self.add(keys)

    def add(self, keys: Iterable[Key]) -> None:
        for k in keys:
            if k not in self.pos:
                self.pos[k] = len(self.keys)
                self.keys.append(k)

    def add_polys(self, polys: Iterable[MatPoly]) -> None:
        for p in polys:
            self.add(p.terms.keys())

    def __len__(self) -> int:
        return len(self.keys)

    def vector(self, p: MatPoly) -> np.ndarray:
        v = np.zeros(len(self.keys))
        for k, c in p.terms.items():
            v[self.pos[k]] += c
        return v

    def matrix(self, polys: Sequence[MatPoly]) -> np.ndarray:
        """Columns are the coefficient vectors of ``polys``."""
        M = np.zeros((len(self.keys), len(polys)))
        for j, p in enumerate(polys):
            for k, c in p.terms.items():
                M[self.pos[k], j] += c
        return M

    def poly(self, v: np.ndarray, nrows: int, ncols: int, g: int) -> MatPoly:
        return MatPoly(nrows, ncols, g, {k: v[i] for i, k in enumerate(self.keys) if v[i]})
