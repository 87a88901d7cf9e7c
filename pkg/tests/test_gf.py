import itertools

import pytest
from hypothesis import given
from hypothesis import strategies as st

from yuanlab.errors import NotPrime
from yuanlab.gf import FieldElement, field_of_order, least_irreducible, make_field, p_th_root

SMALL = [(2, 1), (2, 2), (2, 3), (2, 4), (3, 1), (3, 2), (5, 1), (5, 2), (7, 1)]


def test_prime_fields():
    assert make_field(2).q == 2 and make_field(2).modulus == (0, 1)
    assert make_field(3).q == 3 and make_field(3).is_prime_field


def test_f4_modulus_is_t2_t_1():
    F = make_field(2, 2)
    assert F.modulus == (1, 1, 1)
    assert F.q == 4


def test_rejects_non_prime():
    with pytest.raises(NotPrime):
        make_field(4)
    with pytest.raises(NotPrime):
        field_of_order(12)


def test_field_of_order():
    assert field_of_order(9) == make_field(3, 2)
    assert field_of_order(7) == make_field(7)


def test_p_th_root_examples():
    F = make_field(2, 2)
    zero, one, w = (FieldElement(F, v) for v in (0, 1, 2))
    assert p_th_root(zero) == zero
    assert p_th_root(one) == one
    assert p_th_root(w) == w * w
    assert (w * w) ** 2 == w


def test_modulus_is_least_irreducible():
    # F_8: T^3 + T + 1 is the smallest encoding without roots
    assert least_irreducible(2, 3) == (1, 1, 0, 1)
    assert least_irreducible(3, 2) == (1, 0, 1)


@pytest.mark.parametrize("p,e", SMALL)
def test_field_axioms_exhaustive(p, e):
    F = make_field(p, e)
    for a in F.elements():
        assert F.pow(a, F.q) == a
        if a:
            assert F.mul(a, F.inv(a)) == 1
        assert F.add(a, F.neg(a)) == 0


@pytest.mark.parametrize("p,e", [(2, 2), (2, 3), (2, 4), (3, 2)])
def test_frobenius_is_automorphism(p, e):
    F = make_field(p, e)
    for a, b in itertools.product(F.elements(), repeat=2):
        assert F.frobenius(F.add(a, b)) == F.add(F.frobenius(a), F.frobenius(b))
        assert F.frobenius(F.mul(a, b)) == F.mul(F.frobenius(a), F.frobenius(b))
    assert len({F.frobenius(a) for a in F.elements()}) == F.q


@given(st.sampled_from(SMALL), st.data())
def test_p_th_root_inverts_frobenius(pe, data):
    F = make_field(*pe)
    a = FieldElement(F, data.draw(st.integers(0, F.q - 1)))
    assert p_th_root(a) ** F.p == a
    assert p_th_root(a ** F.p) == a


@given(st.sampled_from(SMALL), st.data())
def test_distributive(pe, data):
    F = make_field(*pe)
    a, b, c = (FieldElement(F, data.draw(st.integers(0, F.q - 1))) for _ in range(3))
    assert a * (b + c) == a * b + a * c
    assert (a - b) + b == a
    if b:
        assert (a / b) * b == a
