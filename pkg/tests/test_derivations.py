import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from yuanlab.algebra import (
    Subalgebra,
    all_ideals,
    base_field_subalgebra,
    ideal_generate,
    local_structure,
    monomial_algebra,
    quotient,
    random_rebase,
    truncated_algebra,
    zero_ideal,
)
from yuanlab.derivations import (
    Derivation,
    ModuleAction,
    der_space,
    is_diff_simple,
    is_differential_ideal,
    kernel_of,
    largest_differential_ideal,
    lift_derivation,
    p_basis_criterion,
    partial,
)
from yuanlab.errors import ConstraintMismatch
from yuanlab.gf import make_field
from yuanlab.linalg import Subspace


def span(A, *vecs):
    return Subspace.span(A.field, A.dim, vecs)


def k_y(C):
    return Subalgebra(C, span(C, C.unit, C.e("y")))


def random_derivation(ds, rng):
    return ds.combine([rng.randrange(ds.source.field.q) for _ in range(ds.dim)])


def test_der_space_dimensions(C22):
    assert der_space(C22).dim == 8
    assert der_space(C22, k_y(C22)).dim == 4
    F4 = truncated_algebra(make_field(2, 2), 0)
    assert der_space(F4).dim == 0


def test_der_space_methods_agree(C22, X4, F3):
    for C in (C22, X4, truncated_algebra(F3, 2)):
        assert der_space(C, method="ambient").span() == der_space(C, method="general").span()
    B = k_y(C22)
    assert der_space(C22, B, method="ambient").span() == der_space(C22, B, method="general").span()


def test_every_basis_derivation_is_leibniz(C22, X4):
    for C in (C22, X4):
        for D in der_space(C).basis:
            assert D.is_leibniz_all_pairs()


def test_largest_differential_ideal_examples(C22, X4):
    assert largest_differential_ideal(C22).is_zero
    assert largest_differential_ideal(X4).space == span(X4, X4.e("x^2"), X4.e("x^3"))
    k = truncated_algebra(make_field(2), 0)
    assert largest_differential_ideal(k).is_zero


def test_is_diff_simple_examples(C22, X4, F3):
    assert is_diff_simple(truncated_algebra(F3, 1)).value
    res = is_diff_simple(X4)
    assert not res.value and res.certificate.space == span(X4, X4.e("x^2"), X4.e("x^3"))
    Q, _ = quotient(C22, ideal_generate(C22, [C22.e("x")]))
    assert is_diff_simple(Q).value
    assert is_diff_simple(C22).crosscheck is True


def test_lift_derivation_examples(C22):
    Q, proj = quotient(C22, zero_ideal(C22))
    delta = partial(C22, 0)
    delta_q = Derivation(Q, ModuleAction.regular_module(Q), tuple(proj(v) for v in delta.images))
    D = lift_derivation(C22, proj, delta_q)
    assert all(proj(D.images[k]) == delta_q(proj.images[k]) for k in range(4))

    Qy, py = quotient(C22, ideal_generate(C22, [C22.e("y")]))
    dx = der_space(Qy).basis
    assert dx
    for delta in dx:
        D = lift_derivation(C22, py, delta)
        assert all(py(D.images[k]) == delta(py.images[k]) for k in range(4))

    zero = Derivation.zero(Qy)
    assert lift_derivation(C22, py, zero).is_zero


def test_bracket_and_p_power_examples(C22):
    dx = partial(C22, 0)
    assert dx.bracket(dx).is_zero
    assert dx.p_power().is_zero
    x_dx = dx.times(C22.e("x"))
    assert x_dx.bracket(dx).images == dx.images  # -dx = dx at p = 2


def test_p_power_needs_regular_module(C22):
    M = ModuleAction.quotient_module(k_y(C22))
    D = der_space(M.algebra, M=M).basis[0]
    with pytest.raises(ConstraintMismatch):
        D.p_power()


def test_kernel_of_examples(C22):
    assert kernel_of(der_space(C22)).space == span(C22, C22.unit)
    assert kernel_of(der_space(C22, k_y(C22))).space == k_y(C22).space
    B = Subalgebra(C22, Subspace.full(C22.field, 4))
    assert kernel_of(der_space(C22, B)).space == B.space


@given(st.integers(0, 2**31))
def test_jacobson_identity_p2(seed):
    rng = random.Random(seed)
    C = truncated_algebra(make_field(2), rng.choice([1, 2, 3]))
    ds = der_space(C)
    D, E = random_derivation(ds, rng), random_derivation(ds, rng)
    # (D + E)^2 = D^2 + E^2 + [D, E] in characteristic 2
    assert (D + E).p_power().images == (D.p_power() + E.p_power() + D.bracket(E)).images


@given(st.integers(0, 2**31))
def test_bracket_and_p_power_stay_derivations(seed):
    rng = random.Random(seed)
    p, n = rng.choice([(2, 2), (3, 1), (3, 2), (2, 3)])
    C = truncated_algebra(make_field(p), n)
    ds = der_space(C)
    D, E = random_derivation(ds, rng), random_derivation(ds, rng)
    for X in (D.bracket(E), D.p_power(), D.times(C.basis_vector(rng.randrange(C.dim)))):
        assert X.is_leibniz_all_pairs() and ds.contains(X)
    assert D.bracket(E).images == E.bracket(D).scale(p - 1).images


@given(st.integers(0, 2**31))
def test_diff_simple_is_basis_independent(seed):
    rng = random.Random(seed)
    base = rng.choice([truncated_algebra(make_field(2), 2), monomial_algebra(make_field(2), [4]),
                       truncated_algebra(make_field(3), 1)])
    R, _ = random_rebase(base, rng)
    assert is_diff_simple(R).value == is_diff_simple(base).value


def _exhaustive_largest(R):
    ders = der_space(R, method="general")
    m = local_structure(R).maximal_ideal
    best = None
    for I in all_ideals(R):
        if m.space.contains_space(I.space) and is_differential_ideal(I, ders):
            if best is None or I.dim > best.dim:
                best = I
    return best


def test_largest_differential_ideal_matches_exhaustive(C22, X4):
    corpus = [C22, X4, truncated_algebra(make_field(2), 3), monomial_algebra(make_field(2), [2, 4])]
    corpus += [quotient(C22, I)[0] for I in all_ideals(C22) if not I.is_unit_ideal]
    for R in corpus:
        if R.dim > 8:
            continue
        want = _exhaustive_largest(R)
        got = largest_differential_ideal(R)
        assert got.space == want.space
        # maximum is unique: every differential ideal inside m lies in it
        ders = der_space(R)
        for I in all_ideals(R):
            if local_structure(R).maximal_ideal.space.contains_space(I.space) and is_differential_ideal(I, ders):
                assert got.space.contains_space(I.space)


def test_p_basis_criterion_agrees(C22, X4):
    assert p_basis_criterion(C22) is True
    assert p_basis_criterion(X4) is None
    Q, _ = quotient(C22, ideal_generate(C22, [C22.e("x*y")]))
    assert p_basis_criterion(Q) is False
    assert is_diff_simple(Q).value is False


def test_non_local_certificate(F2):
    from yuanlab.algebra import from_structure_constants

    A = from_structure_constants(F2, [[(1, 0), (0, 0)], [(0, 0), (0, 1)]], (1, 1))
    res = is_diff_simple(A)
    assert not res.value and not res.local
    assert not res.certificate.is_zero and not res.certificate.is_unit_ideal


def test_derivations_of_field_base(C22):
    assert der_space(C22, base_field_subalgebra(C22)).dim == 8
    assert der_space(C22, base_field_subalgebra(C22)).is_submodule()
    assert der_space(C22).is_restricted_lie()
