import pytest

from yuanlab.algebra import (
    Subalgebra,
    all_subalgebras,
    base_field_subalgebra,
    local_structure,
    minimal_generators,
    truncated_algebra,
    whole,
)
from yuanlab.errors import InternalDisagreement, NotExponentOne
from yuanlab.galois import (
    GaloisCertificate,
    base_is_galois_over_field,
    differential_rank,
    extend_generators,
    fiber_check,
    fiber_dimension,
    is_exponent_one,
    is_galois,
    split_after_base_change,
)
from yuanlab.gf import make_field
from yuanlab.linalg import Subspace
from yuanlab.yuan import enumerate_yuan_points


def sub(C, *vecs):
    return Subalgebra(C, Subspace.span(C.field, C.dim, (C.unit,) + vecs))


def test_exponent_one_examples(C22, X4):
    assert is_exponent_one(whole(C22), C22)
    assert is_exponent_one(base_field_subalgebra(C22), C22)
    assert not is_exponent_one(base_field_subalgebra(X4), X4)


def test_is_galois_examples(C22, X4):
    cert = is_galois(sub(C22, C22.add(C22.e("x"), C22.e("y"))))
    assert cert.rank == 2 and cert.differential_rank == 1
    assert cert.p_basis.elements == (C22.e("x"),)
    assert is_galois(sub(C22, C22.e("x*y"))) is None
    cert = is_galois(sub(X4, X4.e("x^2")))
    assert cert.rank == 2 and cert.p_basis.elements == (X4.e("x"),)
    assert X4.unit in cert.witness


def test_is_galois_requires_exponent_one(X4):
    with pytest.raises(NotExponentOne):
        is_galois(base_field_subalgebra(X4))


def test_differential_rank_examples(C22):
    k = base_field_subalgebra(C22)
    assert differential_rank(is_galois(k)) == 2
    ky = sub(C22, C22.e("y"))
    assert differential_rank(is_galois(ky)) == 1
    assert differential_rank(is_galois(ky), tower_base=k) == 1


def test_certificate_consistency_is_enforced(C22):
    cert = is_galois(sub(C22, C22.e("y")))
    with pytest.raises(InternalDisagreement):
        GaloisCertificate(cert.base, cert.total, 4, 1, cert.p_basis, cert.witness)


def test_split_after_base_change(C22, X4):
    A = sub(X4, X4.e("x^2"))
    T, z = split_after_base_change(A, X4, is_galois(A))
    assert T.algebra.dim == 8 and len(z) == 1
    (zz,) = z.elements
    assert not any(T.algebra.mul_vec(zz, zz)) and any(zz)
    k = base_field_subalgebra(C22)
    T, z = split_after_base_change(k, C22, is_galois(k))
    assert T.algebra.dim == 16 and len(z) == 2
    W = whole(C22)
    T, z = split_after_base_change(W, C22, is_galois(W))
    assert T.algebra.dim == 4 and len(z) == 0


def test_fiber_check_examples(C22, X4):
    A = sub(X4, X4.e("x^2"))
    assert fiber_dimension(A) == 2
    assert fiber_check(A)
    assert fiber_check(base_field_subalgebra(C22))
    with pytest.raises(NotExponentOne):
        fiber_check(base_field_subalgebra(X4))


def test_extend_generators_examples(C22):
    x, y = C22.e("x"), C22.e("y")
    assert extend_generators(sub(C22, y)) == [y, x]
    s = C22.add(x, y)
    assert extend_generators(sub(C22, s)) == [s, x]
    gens = minimal_generators(local_structure(C22).maximal_ideal)
    assert extend_generators(whole(C22), base_generators=gens) == gens


def _certified_pairs():
    F2 = make_field(2)
    C = truncated_algebra(F2, 2)
    pairs = [(C, S) for S in all_subalgebras(C)]
    C3 = truncated_algebra(F2, 3)
    for r in (1, 2):
        pairs += [(C3, pt.B) for pt in enumerate_yuan_points(C3, r)[::16]]
    out = []
    for C, B in pairs:
        cert = is_galois(B, C)
        if cert is not None:
            out.append((C, B, cert))
    return out


def test_certified_pair_invariants():
    pairs = _certified_pairs()
    assert len(pairs) > 20
    for C, B, cert in pairs:
        assert C.dim == cert.rank * B.dim
        assert C.unit in cert.witness
        assert fiber_check(B, C)
        assert base_is_galois_over_field(cert) is not None
        gens = extend_generators(B, C)
        assert len(gens) == len(minimal_generators(local_structure(C).maximal_ideal))
        assert differential_rank(cert, tower_base=base_field_subalgebra(C)) == cert.differential_rank
