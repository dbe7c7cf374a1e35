import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from freera import (
    LeftModule,
    LinearPencil,
    MatPoly,
    const,
    decompose_pencil,
    degree_bounded_chips,
    evaluate,
    is_feasible,
    lreal_radical,
    lreal_radical_zero,
    real_radical,
    x,
    xs,
)
from freera.radical import collapse, linear_vector
from freera.sdp import solve_lmi_strict
from helpers import BALL3, E, golden_pencils, monic_linear, rand_pencil, same_up_to_orthogonal


@pytest.fixture(scope="module")
def gold():
    return golden_pencils()


def test_example_one_is_already_real(gold):
    r = lreal_radical_zero(gold[1])
    assert r.generators == [] and r.feasible
    assert same_up_to_orthogonal(r.reduced_pencil, gold[1])


def test_example_two(gold):
    r = lreal_radical_zero(gold[2])
    assert len(r.generators) == 1
    assert np.allclose(monic_linear(r.generators[0]), [0.0, 1.0, 0.0])
    assert r.reduced_pencil.size == 1 and np.allclose(r.reduced_pencil.A0, 1.0)


@pytest.mark.parametrize("k", [3, 4])
def test_infeasible_examples(gold, k):
    r = lreal_radical_zero(gold[k])
    assert not r.feasible
    assert r.module().is_whole()
    assert not is_feasible(gold[k])


def test_example_five_ball(gold):
    r = lreal_radical_zero(gold[5])
    assert [tuple(np.round(monic_linear(q), 8)) for q in r.generators] == [(0, 0, 0, 0, 0, 1, 0)]
    assert same_up_to_orthogonal(r.reduced_pencil, BALL3)


def test_example_six(gold):
    r = lreal_radical_zero(gold[6])
    assert np.allclose(monic_linear(r.generators[0]), [0, 0, 0, 1, 0])
    want = LinearPencil(np.diag([1.0, 0.0]), [E(1, 1, 2), np.zeros((2, 2))])
    assert same_up_to_orthogonal(r.reduced_pencil, want)


def test_zero_pencil():
    r = lreal_radical_zero(LinearPencil(np.zeros((2, 2)), [np.zeros((2, 2))]))
    assert r.generators == [] and r.feasible
    assert r.reduced_pencil.size == 1 and np.allclose(r.reduced_pencil.A0, 1.0)


def test_is_feasible_examples(gold):
    assert is_feasible(gold[1])
    assert not is_feasible(gold[3])
    assert is_feasible(LinearPencil.identity(2))


def test_decompose_examples(gold):
    d5 = decompose_pencil(gold[5])
    assert d5.hull.shape == (1, 4) and np.allclose(np.abs(d5.hull), [[0, 0, 0, 1]])
    d6 = decompose_pencil(gold[6])
    assert np.allclose(np.abs(d6.hull), [[0, 0, 1]])
    assert decompose_pencil(gold[1]).hull.shape == (0, 2)


def test_generators_vanish_at_origin_when_feasible(gold):
    for k in (2, 5, 6):
        for q in lreal_radical_zero(gold[k]).generators:
            assert q.degree() <= 1
            assert abs(q.coeff(0, 0, ())) <= 1e-12


def test_generators_collapse_consistently_under_star(gold):
    for k in (2, 5, 6):
        for q in lreal_radical_zero(gold[k]).generators:
            assert np.allclose(collapse(linear_vector(q.star())), collapse(linear_vector(q)))


def test_audit_trail_reproduces_batches(gold):
    r = lreal_radical_zero(gold[5])
    recs = [rec for rec in r.audit if "batch" in rec]
    assert recs
    for rec in recs:
        C = rec["pencil"].coefficient_stack()
        root = rec["batch"]
        A = rec["A"]
        for k in range(C.shape[0]):
            assert np.allclose(root[k] @ root[k].T, C[k] @ A @ C[k].T, atol=1e-8)
        assert rec["A_solver"].shape == A.shape


def _feasible_matrix_points(L, rng, count=30):
    """Rejection sampling of D_L(n), n <= 2: a random subset of the variables
    is set to zero and the rest are small random matrices.  The computed
    generators play no part, so accepted points test them independently."""
    g = L.g
    out = []
    for _ in range(100 * count):
        if len(out) >= count:
            break
        n = int(rng.integers(1, 3))
        t = 10.0 ** -rng.integers(0, 3)
        zero = rng.random(g) < 0.5
        X = [np.zeros((n, n)) if zero[k] else t * rng.standard_normal((n, n)) for k in range(g)]
        if np.linalg.eigvalsh(L.evaluate(X)).min() >= 0:
            out.append(X)
    return out


def test_soundness_on_feasible_points():
    rng = np.random.default_rng(3)
    checked = 0
    for _ in range(30):
        L = rand_pencil(rng)
        r = lreal_radical_zero(L)
        if not r.feasible or not r.generators:
            continue
        for X in _feasible_matrix_points(L, rng):
            checked += 1
            for q in r.generators:
                assert np.abs(evaluate(q, X)).max() <= 1e-6
    assert checked > 0


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_strict_feasibility_of_reduced_pencil(seed):
    rng = np.random.default_rng(seed)
    L = rand_pencil(rng)
    r = lreal_radical_zero(L)
    if r.feasible:
        sp = solve_lmi_strict(r.reduced_pencil)
        assert sp is not None and sp.margin >= 1e-6


# general radicals


def test_zero_module_monic_pencil_is_real(gold):
    cb = lreal_radical(LeftModule(1, 1), gold[1], degree_bounded_chips(1, 1, 1))
    assert cb.module.groebner == []


def test_square_forces_linear_factor():
    g = 1
    cb = real_radical(LeftModule(1, g, [xs(1, g) @ x(1, g)]), degree_bounded_chips(1, g, 1))
    assert cb.module.same_as(LeftModule(1, g, [x(1, g)]))


def test_row_module_of_monic_pencil_is_real(gold):
    rows = gold[1].to_matpoly().rows()
    I = LeftModule(2, 1, rows)
    cb = real_radical(I, degree_bounded_chips(2, 1, 1))
    assert cb.module.same_as(I)


def test_radical_contains_input_and_is_idempotent(gold):
    L = gold[2]
    g = 1
    chips = degree_bounded_chips(1, g, 1)
    I = LeftModule(1, g, [x(1, g) @ x(1, g)])
    cb = lreal_radical(I, L, chips)
    assert all(cb.module.contains(q, 1e-8) for q in I.generators)
    assert cb.module.contains(x(1, g), 1e-8)
    again = lreal_radical(cb.module, L, chips)
    assert again.module.same_as(cb.module)


def test_strong_radical_of_monic_pencil(gold):
    cb = lreal_radical(LeftModule(1, 1), gold[1], degree_bounded_chips(1, 1, 1), strong=True)
    assert cb.module.groebner == []


def test_strong_radical_sees_boundary(gold):
    # L = [[1, x1], [x1*, 0]]: x1 vanishes on the closed set but the strict set is empty
    cb = lreal_radical(LeftModule(1, 1), gold[2], degree_bounded_chips(1, 1, 0), strong=True)
    assert cb.module.contains(const(1.0, 1), 1e-8)


def test_radical_requires_full_chip_space(gold):
    from freera.freepoly import ChipSpace

    with pytest.raises(ValueError):
        lreal_radical(LeftModule(1, 1), gold[1], ChipSpace(1, 1, ((0, (1,)),)))
    with pytest.raises(ValueError):
        lreal_radical(LeftModule(1, 2), gold[1], degree_bounded_chips(1, 2, 0))
