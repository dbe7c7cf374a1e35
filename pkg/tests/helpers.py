"""Shared fixtures: the six golden pencils, random instance generators and
independent oracles used across the test modules."""

from __future__ import annotations

import itertools

import numpy as np
from scipy.linalg import sqrtm

from freera import LeftModule, LinearPencil, MatPoly, const, x, xs
from freera.freepoly import words_upto


def E(i: int, j: int, n: int) -> np.ndarray:
    M = np.zeros((n, n))
    M[i, j] = 1.0
    return M


def golden_pencils() -> dict[int, LinearPencil]:
    """The six worked pencils, keyed 1..6 (the sixth with alpha = 1)."""
    return {
        1: LinearPencil(np.eye(2), [E(0, 1, 2)]),
        2: LinearPencil(np.diag([1.0, 0.0]), [E(0, 1, 2)]),
        3: LinearPencil(np.array([[0.0, 1.0], [1.0, 0.0]]), [E(0, 0, 2)]),
        4: LinearPencil(E(1, 2, 3) + E(2, 1, 3), [E(0, 1, 3) + E(2, 2, 3), E(1, 1, 3)]),
        5: LinearPencil(np.diag([1.0, 1.0, 1.0, 0.0]), [E(0, 1, 4), E(0, 2, 4), E(0, 3, 4)]),
        6: LinearPencil(np.diag([1.0, 0.0, 0.0]), [E(1, 1, 3), E(0, 0, 3) + E(1, 2, 3)]),
    }


BALL3 = LinearPencil(np.eye(3), [E(0, 1, 3), E(0, 2, 3), np.zeros((3, 3))])


def spectra(L: LinearPencil) -> list[np.ndarray]:
    """Eigenvalues of the symmetric parts of every coefficient (invariant
    under orthogonal changes of basis)."""
    out = [np.linalg.eigvalsh(L.A0)]
    out += [np.linalg.eigvalsh(A + A.T) for A in L.A]
    out += [np.linalg.svd(A, compute_uv=False) for A in L.A]
    return out


def same_up_to_orthogonal(L1: LinearPencil, L2: LinearPencil, tol: float = 1e-6) -> bool:
    if L1.size != L2.size or L1.g != L2.g:
        return False
    return all(np.allclose(a, b, atol=tol) for a, b in zip(spectra(L1), spectra(L2)))


def monic_linear(p: MatPoly) -> np.ndarray:
    """Coefficients (1, x1, x1*, ...) scaled so the last nonzero one is 1."""
    v = np.zeros(2 * p.g + 1)
    for (_, _, w), c in p.terms.items():
        if not w:
            v[0] = c
        else:
            a = w[0]
            v[2 * abs(a) - 1 if a > 0 else 2 * abs(a)] = c
    nz = np.nonzero(np.abs(v) > 1e-12)[0]
    return v / v[nz[-1]] if nz.size else v


def rand_pencil(rng: np.random.Generator, max_nu: int = 4, max_g: int = 3) -> LinearPencil:
    """Random pencil: generic, monic, or thin (a zero diagonal entry bordered
    by one variable, conjugated by a random orthogonal matrix)."""
    g = int(rng.integers(1, max_g + 1))
    nu = int(rng.integers(1, max_nu + 1))
    kind = int(rng.integers(0, 3))
    A = [rng.standard_normal((nu, nu)) * (rng.random() < 0.8) for _ in range(g)]
    if kind == 0:
        A0 = rng.standard_normal((nu, nu))
        A0 = A0 + A0.T
        if rng.random() < 0.5:
            A0 = A0 @ A0.T
    elif kind == 1:
        A0 = np.eye(nu)
    else:
        A0 = np.zeros((nu, nu))
        A0[1:, 1:] = np.eye(nu - 1)
        if nu > 1:
            for a in A:
                a[0, :] = 0.0
                a[:, 0] = 0.0
            A[int(rng.integers(0, g))][0, 1] = 1.0
            Q, _ = np.linalg.qr(rng.standard_normal((nu, nu)))
            A0 = Q.T @ A0 @ Q
            A = [Q.T @ a @ Q for a in A]
    return LinearPencil((A0 + A0.T) / 2, A)


def rand_tuple(rng: np.random.Generator, g: int, n: int, scale: float = 1.0) -> list[np.ndarray]:
    return [scale * rng.standard_normal((n, n)) for _ in range(g)]


def rand_instance(rng: np.random.Generator):
    """Random (p, L, I) with p symmetric of degree <= 2, L of size <= 3 in
    g <= 2 variables, and I zero or generated by one linear row."""
    g = int(rng.integers(1, 3))
    nu = int(rng.integers(1, 4))
    A0 = np.eye(nu) if rng.random() < 0.6 else np.diag(rng.integers(0, 2, nu).astype(float))
    L = LinearPencil(A0, [0.7 * rng.standard_normal((nu, nu)) for _ in range(g)])
    terms = {(0, 0, w): float(rng.standard_normal()) for w in words_upto(g, 2) if rng.random() < 0.5}
    q = MatPoly(1, 1, g, terms)
    p = (q + q.star()).scale(0.5) + const(float(rng.uniform(-0.5, 2.5)), g)
    gens = []
    if rng.random() < 0.3:
        k = int(rng.integers(1, g + 1))
        gens = [x(k, g) if rng.random() < 0.5 else x(k, g) + xs(k, g).scale(float(rng.standard_normal()))]
    return p, L, LeftModule(1, g, gens)


def sqrt_oracle(A: np.ndarray) -> np.ndarray:
    """Principal square root via scipy (independent of the package's eigh route)."""
    return np.real(sqrtm((A + A.T) / 2))


def span_oracle_member(I: LeftModule, p: MatPoly, D: int, tol: float = 1e-8) -> bool:
    """Is ``p`` in the span of ``u q`` over generators ``q`` and words ``u``
    with ``|u| + deg q <= D``?  Pure linear algebra, no reduction."""
    g, ell = I.g, I.ell
    cols = []
    keys: dict = {}

    def vec(poly: MatPoly) -> dict:
        out = {}
        for (_, c, w), v in poly.terms.items():
            k = (c, w)
            keys.setdefault(k, len(keys))
            out[k] = v
        return out

    for q in I.generators:
        dq = int(q.degree()) if not q.is_zero() else 0
        for u in words_upto(g, max(D - dq, -1)) if D >= dq else []:
            mono = MatPoly.monomial(u, g)
            cols.append(vec(mono @ q))
    target = vec(p)
    if not target:
        return True
    if not cols:
        return False
    M = np.zeros((len(keys), len(cols)))
    for j, c in enumerate(cols):
        for k, v in c.items():
            M[keys[k], j] = v
    b = np.zeros(len(keys))
    for k, v in target.items():
        b[keys[k]] = v
    sol = np.linalg.lstsq(M, b, rcond=None)[0]
    return float(np.abs(M @ sol - b).max()) <= tol * max(1.0, float(np.abs(b).max()))


def rand_row(rng: np.random.Generator, ell: int, g: int, d: int, density: float = 0.5) -> MatPoly:
    terms = {}
    for w in words_upto(g, d):
        for i in range(ell):
            if rng.random() < density:
                terms[(0, i, w)] = float(rng.integers(-3, 4))
    return MatPoly(1, ell, g, terms)


def all_words(g: int, d: int):
    letters = [a for k in range(1, g + 1) for a in (k, -k)]
    for n in range(d + 1):
        yield from itertools.product(letters, repeat=n)


def choi_min_eig(tau, nu: int) -> float:
    """Smallest eigenvalue of the Choi matrix sum_ij E_ij (x) tau(E_ij),
    assembled with np.kron directly from the map's values."""
    C = sum(np.kron(E(i, j, nu), tau(E(i, j, nu))) for i in range(nu) for j in range(nu))
    return float(np.linalg.eigvalsh((C + C.T) / 2)[0])
