from __future__ import annotations

from hypothesis import given
from hypothesis import strategies as st

from nfdiag.freegroup import FreeWord
from nfdiag.grpalg import GroupAlgebraElement as GA
from nfdiag.grpalg import is_nonzero
from nfdiag.scalar import Coefficient

B0 = FreeWord.letter("b.0")
one = GA.one()
b0 = GA.word(B0)
omega = Coefficient.root_of_unity(1, 3)


def test_expansion_in_one_letter():
    assert (one + b0) * (one - b0) == one - GA.word(B0 * B0)


def test_word_cancellation():
    assert b0 * GA.word(B0.inverse()) == one


def test_omega_sum():
    x = one + b0
    assert x.scale(omega) + x.scale(omega**2) == -x


def test_nonzero(aut33):
    X01 = GA((aut33.M("b", 0, k), omega**k) for k in range(3))
    assert is_nonzero(X01)
    assert set(X01.support()) == {FreeWord.identity(), B0, B0 * FreeWord.letter("b.1")}
    assert not is_nonzero(GA.zero())
    assert not is_nonzero((one + b0) - (one + b0))


def test_json_round_trip():
    x = (one + b0.scale(Coefficient.symbol("c"))) * GA.letter("b.1", -1)
    assert GA.from_json(x.to_json()) == x


letters = st.sampled_from(["b.0", "b.1"])
word = st.lists(st.tuples(letters, st.sampled_from([1, -1])), max_size=4).map(FreeWord)
coeff = st.integers(-3, 3).map(Coefficient.rational)
elements = st.lists(st.tuples(word, coeff), max_size=4).map(GA)


@given(elements, elements, elements)
def test_ring_laws(x, y, z):
    assert (x * y) * z == x * (y * z)
    assert x * (y + z) == x * y + x * z
    assert (x + y) * z == x * z + y * z
    assert x + y == y + x
    assert x * one == x == one * x
