import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from yuanlab.algebra import (
    FiniteAlgebra,
    Ideal,
    Subalgebra,
    all_ideals,
    all_subalgebras,
    annihilator,
    base_field_subalgebra,
    count_local_factors,
    frobenius_image,
    from_structure_constants,
    ideal_generate,
    is_local,
    local_structure,
    minimal_generators,
    monogenic_algebra,
    monomial_algebra,
    quotient,
    random_rebase,
    rebase,
    subalgebra_generate,
    tensor_over,
    truncated_algebra,
    zero_ideal,
)
from yuanlab.errors import ImproperIdeal, NotLocal
from yuanlab.galois import is_exponent_one
from yuanlab.gf import make_field
from yuanlab.linalg import Subspace


def span(A, *vecs):
    return Subspace.span(A.field, A.dim, vecs)


def split_pair(F):
    return from_structure_constants(F, [[(1, 0), (0, 0)], [(0, 0), (0, 1)]], (1, 1))


def test_truncated_22(C22):
    assert C22.dim == 4
    assert C22.labels == ("1", "x", "y", "x*y")
    x, y = C22.variables()
    assert not any(C22.mul_vec(x, x)) and not any(C22.mul_vec(y, y))
    assert C22.mul_vec(x, y) == C22.e("x*y")


def test_truncated_degenerate_cases(F2, F3):
    assert truncated_algebra(F2, 0).dim == 1
    C = truncated_algebra(F3, 1)
    assert C.dim == 3 and not any(C.power(C.e("x"), 3)) and any(C.power(C.e("x"), 2))


def test_structure_checks_reject_bad_tables(F2):
    with pytest.raises(ValueError):
        from_structure_constants(F2, [[(1, 0), (0, 1)], [(0, 0), (0, 0)]], (1, 0))  # not commutative
    # t^2 = 1 on a basis {1, t}, but unit given wrong
    with pytest.raises(ValueError):
        from_structure_constants(F2, [[(1, 0), (0, 1)], [(0, 1), (1, 0)]], (0, 1))


def test_subalgebra_generate_examples(C22):
    assert subalgebra_generate(C22, []).space == span(C22, C22.unit)
    assert subalgebra_generate(C22, [C22.e("y")]).space == span(C22, C22.unit, C22.e("y"))
    s = C22.add(C22.e("x"), C22.e("y"))
    assert subalgebra_generate(C22, [s]).space == span(C22, C22.unit, s)


def test_quotient_examples(C22):
    Q, _ = quotient(C22, zero_ideal(C22))
    assert Q.dim == 4
    Qx, proj = quotient(C22, ideal_generate(C22, [C22.e("x")]))
    assert Qx.dim == 2
    y = proj(C22.e("y"))
    assert any(y) and not any(Qx.mul_vec(y, y))
    assert quotient(C22, ideal_generate(C22, [C22.e("x*y")]))[0].dim == 3
    with pytest.raises(ImproperIdeal):
        quotient(C22, ideal_generate(C22, [C22.unit]))


def test_tensor_examples(F2, X4):
    D = truncated_algebra(F2, 1)
    T = tensor_over(base_field_subalgebra(D), D, D)
    assert T.algebra.dim == 4 and is_local(T.algebra)
    k = truncated_algebra(F2, 0)
    assert tensor_over(base_field_subalgebra(k), k, D).algebra.dim == 2
    A = Subalgebra(X4, span(X4, X4.unit, X4.e("x^2")))
    T = tensor_over(A, X4, X4)
    z = T.algebra.sub(T.left(X4.e("x")), T.right(X4.e("x")))
    assert T.algebra.dim == 8
    assert any(z) and not any(T.algebra.mul_vec(z, z))


def test_frobenius_image_examples(C22, X4):
    assert frobenius_image(C22).space == span(C22, C22.unit)
    assert frobenius_image(X4).space == span(X4, X4.unit, X4.e("x^2"))
    F4 = truncated_algebra(make_field(2, 2), 0)
    assert frobenius_image(F4).dim == 1


def test_local_structure_examples(C22, F2):
    ls = local_structure(C22)
    assert ls.residue_dim == 1
    assert ls.maximal_ideal.space == span(C22, C22.e("x"), C22.e("y"), C22.e("x*y"))
    F4_over_F2 = monogenic_algebra(F2, [1, 1])
    assert local_structure(F4_over_F2).maximal_ideal.is_zero
    assert local_structure(F4_over_F2).residue_dim == 2
    with pytest.raises(NotLocal):
        local_structure(split_pair(F2))
    assert count_local_factors(split_pair(F2)) == 2


def test_annihilator_examples(C22):
    assert annihilator(C22, C22.unit).is_zero
    assert annihilator(C22, C22.e("x")).space == span(C22, C22.e("x"), C22.e("x*y"))
    assert annihilator(C22, C22.e("x*y")).space == local_structure(C22).maximal_ideal.space


def test_minimal_generators_examples(C22, F3):
    m = local_structure(C22).maximal_ideal
    assert len(minimal_generators(m)) == 2
    assert minimal_generators(ideal_generate(C22, [C22.e("x*y")])) == [C22.e("x*y")]
    C = truncated_algebra(F3, 1)
    assert minimal_generators(local_structure(C).maximal_ideal) == [C.e("x")]


def test_exhaustive_lists(C22):
    ideals = all_ideals(C22)
    assert len(ideals) == 7
    assert all(isinstance(I, Ideal) for I in ideals)
    subs = all_subalgebras(C22)
    assert len(subs) == 12
    assert sum(S.dim == 2 for S in subs) == 7  # span{1, v} for each nonzero v in m


def test_json_round_trip(C22):
    again = FiniteAlgebra.from_json(C22.to_json())
    assert again.mul == C22.mul and again.unit == C22.unit


@given(st.integers(0, 2**31), st.sampled_from([(2, 1), (2, 2), (3, 1), (3, 2), (2, 3)]))
def test_rebase_is_an_isomorphism(seed, pn):
    p, n = pn
    A = truncated_algebra(make_field(p), n)
    R, iso = random_rebase(A, random.Random(seed))
    assert iso.is_bijective() and iso.is_multiplicative()
    assert iso(R.unit) == A.unit
    back = iso.inverse()
    assert all(back(iso(R.basis_vector(i))) == R.basis_vector(i) for i in range(R.dim))


@given(st.integers(0, 2**31))
def test_quotient_laws(seed):
    rng = random.Random(seed)
    p, n = rng.choice([(2, 2), (3, 1), (2, 3), (3, 2)])
    A = truncated_algebra(make_field(p), n)
    m = local_structure(A).maximal_ideal
    gens = [m.space.combine([rng.randrange(p) for _ in range(m.dim)]) for _ in range(rng.randint(0, 2))]
    I = ideal_generate(A, gens)
    Q, proj = quotient(A, I)
    assert Q.dim == A.dim - I.dim
    assert proj.is_multiplicative()
    assert all(not any(proj(v)) for v in I.basis)


@pytest.mark.parametrize("p,n", [(2, 2), (3, 1), (2, 3)])
def test_truncated_local_structure(p, n):
    A = truncated_algebra(make_field(p), n)
    ls = local_structure(A)
    assert ls.residue_dim == 1
    assert ls.maximal_ideal.space == Subspace.span(A.field, A.dim, A.basis()[1:])


def test_frobenius_image_matches_exponent_one(C22, X4):
    for C in (C22, X4):
        Fr = frobenius_image(C)
        for S in all_subalgebras(C):
            assert S.space.contains_space(Fr.space) == is_exponent_one(S, C)


def test_rebase_keeps_ambient(C22):
    R, _ = rebase(C22, [C22.unit, C22.e("x"), C22.add(C22.e("y"), C22.e("x*y")), C22.e("x*y")])
    assert R.ambient is not None and R.ambient.cover is C22


def test_all_ideals_matches_subspace_filter(C22, X4):
    from yuanlab.linalg import all_subspaces

    for A in (C22, X4, truncated_algebra(make_field(3), 1)):
        brute = []
        for S in all_subspaces(A.field, A.dim):
            if all(S.contains(A.mul_vec(v, A.basis_vector(i))) for v in S.basis for i in range(A.dim)):
                brute.append(S)
        assert sorted(I.space.basis for I in all_ideals(A)) == sorted(S.basis for S in brute)
