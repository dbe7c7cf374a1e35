import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from freera import LinearPencil, MatPoly, MatrixTuple, const, evaluate, x, xs
from freera.freepoly import (
    ChipSpace,
    build_chip_space,
    default_chip_degree,
    default_chip_space,
    degree_bounded_chips,
    format_poly,
    free_lift,
    generator_chips,
    symmetric_pencil_lift,
    symmetrize,
    word_star,
    words_upto,
)
from strategies import polys, tuples


def test_word_star_reverses_and_flips():
    assert word_star((1, -2, 3)) == (-3, 2, -1)
    assert word_star(()) == ()


def test_words_upto_count_and_order():
    ws = words_upto(2, 2)
    assert len(ws) == 1 + 4 + 16
    assert ws[:5] == [(), (1,), (-1,), (2,), (-2,)]


def test_star_of_product_reverses_factors():
    g = 2
    p = x(1, g) @ xs(2, g)
    assert p.star() == x(2, g) @ xs(1, g)


@settings(max_examples=60, deadline=None)
@given(st.data())
def test_star_is_an_anti_automorphism(data):
    g = data.draw(st.integers(1, 3))
    a, b, c = (data.draw(st.integers(1, 2)) for _ in range(3))
    p = data.draw(polys(a, b, g))
    q = data.draw(polys(b, c, g))
    assert (p @ q).star() == q.star() @ p.star()
    assert p.star().star() == p


@settings(max_examples=60, deadline=None)
@given(st.data())
def test_evaluation_is_multiplicative(data):
    g = data.draw(st.integers(1, 3))
    a, b, c = (data.draw(st.integers(1, 2)) for _ in range(3))
    p = data.draw(polys(a, b, g))
    q = data.draw(polys(b, c, g))
    X = data.draw(tuples(g))
    n = X[0].shape[0]
    lhs = evaluate(p @ q, X)
    rhs = evaluate(p, X) @ evaluate(q, X)
    assert lhs.shape == (a * n, c * n)
    assert np.allclose(lhs, rhs, atol=1e-10 * max(1.0, np.abs(rhs).max()))
    assert np.array_equal(evaluate(p.star(), X), evaluate(p, X).T)


def _shuffle(nu: int, n: int, m: int) -> np.ndarray:
    """Permutation taking (block of X (+) block of Y) ordering to blocks of X (+) Y."""
    perm = []
    for i in range(nu):
        perm += [i * n + k for k in range(n)]
        perm += [nu * n + i * m + k for k in range(m)]
    return np.eye(nu * (n + m))[perm]


@settings(max_examples=40, deadline=None)
@given(st.data())
def test_direct_sum_compatibility(data):
    g = data.draw(st.integers(1, 3))
    nu = data.draw(st.integers(1, 3))
    p = data.draw(polys(nu, nu, g))
    X = MatrixTuple(data.draw(tuples(g)))
    Y = MatrixTuple(data.draw(tuples(g)))
    from scipy.linalg import block_diag

    P = _shuffle(nu, X.n, Y.n)
    expected = P @ block_diag(evaluate(p, X), evaluate(p, Y)) @ P.T
    assert np.allclose(evaluate(p, X.direct_sum(Y)), expected, atol=1e-10)


def test_evaluation_hand_computed():
    g = 1
    p = x(1, g) @ xs(1, g) - const(2.0, g)
    X = np.array([[0.0, 1.0], [0.0, 0.0]])
    assert np.array_equal(evaluate(p, [X]), np.array([[-1.0, 0.0], [0.0, -2.0]]))


def test_evaluate_with_no_variables_uses_size():
    p = MatPoly.constant(np.array([[2.0]]), 0)
    assert np.array_equal(evaluate(p, MatrixTuple([], 3)), 2.0 * np.eye(3))
    with pytest.raises(ValueError):
        MatrixTuple([])


def test_arity_mismatch():
    with pytest.raises(ValueError):
        evaluate(x(1, 2), [np.eye(2)])


def test_bad_letter_and_entry():
    with pytest.raises(ValueError):
        MatPoly.monomial((3,), 2)
    with pytest.raises(ValueError):
        MatPoly(1, 1, 1, {(1, 0, ()): 1.0})


def test_pruning_threshold():
    p = MatPoly(1, 1, 1, {(0, 0, ()): 1e-13, (0, 0, (1,)): 1.0})
    assert list(p.terms) == [(0, 0, (1,))]
    assert (x(1, 1) - x(1, 1)).is_zero()


def test_degree_and_letter_degrees():
    g = 2
    p = x(1, g) @ x(1, g) @ xs(2, g) + x(2, g)
    assert p.degree() == 3
    assert p.letter_degrees() == {1: 2, -2: 1, 2: 1}
    assert MatPoly.zero(1, 1, g).degree() == -math.inf


def test_from_entries_and_block():
    g = 1
    M = MatPoly.from_entries([[1.0, x(1, g)], [xs(1, g), 1.0]], g)
    assert M.is_symmetric()
    B = MatPoly.block([[M, MatPoly.zero(2, 1, g)]])
    assert B.shape == (2, 3)
    assert B.row(0) == MatPoly(1, 3, g, {(0, 0, ()): 1.0, (0, 1, (1,)): 1.0})


def test_format_poly_is_readable():
    s = format_poly(x(1, 2) @ xs(2, 2) - const(3.0, 2))
    assert "x1" in s and "x2*" in s


# pencils


def test_pencil_round_trip_and_star_coefficients():
    rng = np.random.default_rng(0)
    A0 = np.diag([1.0, 2.0])
    A = [rng.standard_normal((2, 2)) for _ in range(2)]
    L = LinearPencil(A0, A)
    P = L.to_matpoly()
    assert P.is_symmetric()
    for k, Ak in enumerate(A, start=1):
        assert P.coeff(0, 1, (k,)) == Ak[0, 1]
        assert P.coeff(0, 1, (-k,)) == Ak[1, 0]
    L2 = LinearPencil.from_matpoly(P)
    assert np.array_equal(L2.A0, L.A0) and all(np.array_equal(a, b) for a, b in zip(L2.A, L.A))
    X = [rng.standard_normal((3, 3)) for _ in range(2)]
    assert np.allclose(L.evaluate(X), evaluate(P, X))
    assert np.allclose(L.evaluate(X), L.evaluate(X).T)


def test_pencil_rejects_nonsymmetric_constant():
    with pytest.raises(ValueError):
        LinearPencil(np.array([[0.0, 1.0], [0.0, 0.0]]))
    with pytest.raises(ValueError):
        LinearPencil.from_matpoly(x(1, 1) @ x(1, 1))


def test_pencil_at_point_and_stack():
    L = LinearPencil(np.eye(2), [np.array([[0.0, 1.0], [0.0, 0.0]])])
    assert np.array_equal(L.at_point([0.5]), np.array([[1.0, 0.5], [0.5, 1.0]]))
    S = L.coefficient_stack()
    assert S.shape == (3, 2, 2)
    assert np.array_equal(S[2], S[1].T)
    assert LinearPencil.from_coefficient_stack(S).to_matpoly() == L.to_matpoly()
    assert L.is_monic()


def test_pencil_compress_and_direct_sum():
    L = LinearPencil(np.diag([1.0, 0.0]), [np.array([[0.0, 1.0], [0.0, 0.0]])])
    V = np.array([[1.0], [0.0]])
    C = L.compress(V)
    assert C.size == 1 and np.array_equal(C.A0, [[1.0]])
    D = L.direct_sum(C)
    assert D.size == 3
    X = [np.array([[2.0]])]
    from scipy.linalg import block_diag

    assert np.allclose(D.evaluate(X), block_diag(L.evaluate(X), C.evaluate(X)))


# chip spaces


def test_degree_bounded_count():
    C = degree_bounded_chips(2, 1, 1)
    assert C.dim == 6
    assert set(C) == {(i, w) for i in range(2) for w in [(), (1,), (-1,)]}
    assert C.is_full() and C.is_chip_closed()


def test_generator_chips_are_proper_right_chips():
    C = generator_chips([(0, (1, 2))], 1, 2)
    assert set(C) == {(0, (2,)), (0, ())}


def test_empty_chip_space():
    C = generator_chips([], 1, 1)
    assert C.dim == 0 and C.degree == -1


def test_chip_space_validation():
    with pytest.raises(ValueError):
        ChipSpace(1, 1, ((1, ()),))
    with pytest.raises(ValueError):
        build_chip_space("bogus", ell=1, g=1)


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 2), st.integers(1, 2), st.integers(0, 2), st.lists(st.integers(0, 2), min_size=4, max_size=4))
def test_constructed_chip_spaces_are_closed(ell, g, d, caps):
    letter_caps = {a: c for a, c in zip([1, -1, 2, -2], caps)}
    for C in (degree_bounded_chips(ell, g, d), degree_bounded_chips(ell, g, d, letter_caps)):
        assert C.is_full() and C.is_chip_closed()
        for i, w in C:
            for a in range(len(w) + 1):
                assert (i, w[a:]) in C


def test_not_full_detected():
    C = ChipSpace(1, 1, ((0, (1,)),))
    assert not C.is_full()


def test_default_chip_degree():
    assert default_chip_degree(2, 1) == 1
    assert default_chip_degree(4, 1) == 2
    assert default_chip_degree(-math.inf, -math.inf) == 0
    assert default_chip_degree(2, 3) == 2
    C = default_chip_space(1, 1, x(1, 1) @ xs(1, 1) @ x(1, 1) @ xs(1, 1))
    assert C.degree == 2


# symmetric variables


def test_symmetrize_and_free_lift():
    g = 2
    assert symmetrize(xs(1, g)) == x(1, g)
    assert free_lift(x(1, g)) == (x(1, g) + xs(1, g)).scale(0.5)
    q = x(1, g) @ x(2, g)
    assert symmetrize(free_lift(q)) == q
    with pytest.raises(ValueError):
        free_lift(xs(1, g))


def test_symmetric_pencil_lift():
    A1 = np.array([[0.0, 1.0], [1.0, 0.0]])
    L = symmetric_pencil_lift(np.eye(2), [A1])
    s = 0.3
    assert np.allclose(L.evaluate([np.array([[s]])]), np.eye(2) + s * A1)


def test_all_words_in_product_expansion():
    g = 1
    p = (x(1, g) + xs(1, g)) @ (x(1, g) + xs(1, g))
    assert set(w for _, _, w in p.terms) == set(itertools.product([1, -1], repeat=2))


def test_star_evaluation_exact_for_dense_real_coefficients():
    rng = np.random.default_rng(7)
    for _ in range(100):
        nr, nc = (int(v) for v in rng.integers(1, 3, 2))
        terms = {(int(rng.integers(0, nr)), int(rng.integers(0, nc)), w): float(rng.standard_normal())
                 for w in words_upto(2, 3) if rng.random() < 0.3}
        p = MatPoly(nr, nc, 2, terms)
        X = [rng.standard_normal((3, 3)) for _ in range(2)]
        assert np.array_equal(evaluate(p.star(), X), evaluate(p, X).T)
