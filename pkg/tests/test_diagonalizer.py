from __future__ import annotations

import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nfdiag.automorphism import build_phi
from nfdiag.diagonalizer import (
    PostCheckFailed,
    diagonalize,
    synth_pair,
    synth_vertex,
    vandermonde_bracket,
)
from nfdiag.freegroup import FreeWord
from nfdiag.grpalg import GroupAlgebraElement as GA
from nfdiag.nntree import random_tree, validate_tree
from nfdiag.ratexpr import Inverse, Product, leaf, probable_equal
from nfdiag.scalar import Coefficient
from nfdiag.verifier import random_twist

C = Coefficient
B0, B1 = FreeWord.letter("b.0"), FreeWord.letter("b.1")
c, d = C.symbol("c"), C.symbol("d")
omega = C.root_of_unity(1, 3)


@pytest.fixture(scope="module")
def ex1(tree22):
    return diagonalize(build_phi(tree22).twisted({"b.0": "c"}))


@pytest.fixture(scope="module")
def ex2(tree33):
    return diagonalize(build_phi(tree33).twisted({"b.0": "c", "b.1": "d"}))


def self_pair_tree(rho):
    return validate_tree({"n": 3, "vertices": [{"id": "b", "parent": "a", "tau": 1, "gamma": 3, "beta": 3, "alpha": 3}],
                          "pairs": [{"e": "b", "f": "b", "delta": rho, "rho": rho, "eta": 0}]})


def test_ex1_vertex_data(ex1):
    vd = ex1.vertices["b"]
    assert vd.xi == C.symbol("c", Fraction(1, 2))
    assert vd.x[0][1] == C.symbol("c", Fraction(-1, 2))
    expected = Product((Inverse(leaf(GA.one() + GA.word(B0, vd.x[0][1]))), leaf(GA.one() - GA.word(B0, vd.x[0][1]))))
    assert vd.Y[(0, 1)] == expected


def test_ex1_y_matches_closed_form(ex1):
    rc = C.symbol("c", Fraction(1, 2))
    x = GA.letter("b.0")
    closed = Product((Inverse(leaf(GA.scalar(rc) + x)), leaf(GA.scalar(rc) - x)))
    assert probable_equal(ex1.vertices["b"].Y[(0, 1)], closed, sizes=(2, 3, 4), values={"c": 2}).ok


def test_ex1_single_generator(ex1):
    assert len(ex1.generators) == 1
    assert ex1.generators[0].eigenvalue == C.rational(-1)


def test_ex2_coefficients_and_eigenvalues(ex2):
    vd = ex2.vertices["b"]
    assert vd.x[0][1] == C.symbol("c", Fraction(-2, 3)) * C.symbol("d", Fraction(-1, 3))
    assert vd.x[0][2] == C.symbol("c", Fraction(-1, 3)) * C.symbol("d", Fraction(-2, 3))
    assert vd.xi == C.symbol("c", Fraction(2, 3)) * C.symbol("d", Fraction(1, 3))
    assert [g.eigenvalue for g in ex2.generators] == [omega**2, omega]


def test_untwisted_order_three(aut33):
    vd = synth_vertex(aut33, "b")
    assert vd.xi.is_one()
    assert all(x.is_one() for row in vd.x for x in row)
    assert vd.X[(0, 1)] == GA.one() + GA.word(B0, omega) + GA.word(B0 * B1, omega**2)


def test_length_one_cycle_is_y_itself(ex2):
    g = ex2.generators[0]
    assert g.expr is ex2.vertices["b"].Y[(0, 1)]
    assert g.eigenvalue == omega ** (-1 % 3)


def test_pair_trivial_corrections():
    aut = build_phi(self_pair_tree(3))
    pd = synth_pair(aut, aut.tree.pairs[0])
    assert (pd.u, pd.v) == (1, 1)
    assert all(L.is_one() for L in pd.L) and all(R.is_one() for R in pd.R)
    assert pd.T == [GA.letter(s) for s in aut.alphabet.pair_letters[aut.tree.pairs[0].key]]


def test_root_pair_swap(root_pair_tree):
    aut = build_phi(root_pair_tree)
    pd = synth_pair(aut, root_pair_tree.pairs[0])
    assert pd.T == [GA.letter("t.a.a.0.0"), GA.letter("t.a.a.0.1")]
    assert (pd.mu * pd.nu).is_one()


def test_self_pair_period_three():
    aut = build_phi(self_pair_tree(1))
    pd = synth_pair(aut, aut.tree.pairs[0])
    assert (pd.u, pd.v) == (3, 3)
    assert pd.mu.is_one()
    expected = GA.one() + GA.word(aut.M("b", 0, 1).inverse()) + GA.word(aut.M("b", 0, 2).inverse())
    assert pd.L[0] == expected


def test_right_factor_uses_forward_words():
    aut = build_phi(self_pair_tree(1))
    pd = synth_pair(aut, aut.tree.pairs[0])
    assert pd.R[0] == GA.one() + GA.word(aut.M("b", 0, 1)) + GA.word(aut.M("b", 0, 2))


def test_summation_identity_uses_x_i0(ex2):
    # sum_j X(i,j) = beta W(i) - X(i,0); with M_d(i,0) = 1 in place of X(i,0) it fails
    vd = ex2.vertices["b"]
    total = vd.X[(0, 1)] + vd.X[(0, 2)]
    W = vandermonde_bracket(ex2.aut, vd, 0, 0)
    assert total == W.scale(3) - vd.X[(0, 0)]
    assert total != W.scale(3) - GA.one()


def test_back_substitution_ex1(ex1):
    # b.0 = c^(1/2) (1 - Y)(1 + Y)^-1
    y = leaf("g.b.1.0")
    rc = C.symbol("c", Fraction(1, 2))
    closed = Product((leaf(GA.scalar(rc) - GA.scalar(rc) * GA.letter("g.b.1.0")),
                      Inverse(leaf(GA.one() + GA.letter("g.b.1.0")))))
    assert y is not None
    assert probable_equal(ex1.inverse["b.0"], closed, sizes=(2, 3, 4), values={"c": 2}).ok


def test_back_substitution_root_only():
    res = diagonalize(build_phi(validate_tree({"n": 2, "vertices": [], "pairs": []})))
    assert res.inverse == {} and res.generators == []


def test_faults_raise_in_strict_mode(tree33):
    aut = build_phi(tree33).twisted({"b.0": "c", "b.1": "d"})
    for fault in ("x", "xi"):
        with pytest.raises(PostCheckFailed) as exc:
            diagonalize(aut, faults=(fault,))
        assert exc.value.failures
    with pytest.raises(ValueError):
        diagonalize(aut, faults=("bogus",))


def test_pair_fault_caught_exactly(root_pair_tree):
    aut = build_phi(self_pair_tree(1)).twisted({"t.b.b.0.0": "c"})
    res = diagonalize(aut, faults=("wrap",), strict=False)
    assert any(ch.name.startswith("eigen.") and not ch.passed for ch in res.checks)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10**6))
def test_exact_identities_on_random_twisted_trees(seed):
    rng = random.Random(seed)
    tree = random_tree(rng)
    base = build_phi(tree)
    aut = base.twisted(random_twist(list(base.alphabet), rng).scalars)
    res = diagonalize(aut)  # strict: raises on any failed exact check
    assert len(res.generators) == len(base.alphabet)
    assert all(not g.eigenvalue.is_zero() for g in res.generators)
    assert set(res.inverse) == set(base.alphabet)


def test_ex2_x00_from_generators(ex2):
    # beta (1 + y1 + y2)^-1 = X(0,0); the constant is beta = 3
    from nfdiag.ratexpr import Scale, Sum, const

    vd = ex2.vertices["b"]
    lhs = Scale(C.rational(3), Inverse(Sum((vd.Y[(0, 1)], vd.Y[(0, 2)], const(1)))))
    assert probable_equal(lhs, leaf(vd.X[(0, 0)]), sizes=(3, 4), values={"c": 2, "d": 5}).ok
    wrong = Scale(C.rational(2), Inverse(Sum((vd.Y[(0, 1)], vd.Y[(0, 2)], const(1)))))
    assert not probable_equal(wrong, leaf(vd.X[(0, 0)]), sizes=(3, 4), values={"c": 2, "d": 5}).ok
