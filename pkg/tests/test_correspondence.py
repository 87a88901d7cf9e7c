import pytest

from yuanlab.algebra import Subalgebra, truncated_algebra
from yuanlab.correspondence import check_points, leibniz_rows
from yuanlab.derivations import der_space
from yuanlab.gf import make_field
from yuanlab.linalg import Subspace
from yuanlab.suites import correspondence_check
from yuanlab.yuan import YuanPoint, enumerate_yuan_points, standard_point


@pytest.mark.parametrize("p,n", [(2, 2), (3, 1), (2, 3)])
def test_leibniz_rows_cut_out_der(p, n):
    C = truncated_algebra(make_field(p), n)
    assert C.dim**2 - len(leibniz_rows(C)) == der_space(C).dim


@pytest.mark.parametrize("p,n,r", [(2, 2, 0), (2, 2, 1), (2, 2, 2), (2, 3, 2), (3, 1, 1)])
def test_batched_agrees_with_reference(p, n, r):
    C = truncated_algebra(make_field(p), n)
    pts = enumerate_yuan_points(C, r)
    for pt, res in zip(pts, check_points(C, pts)):
        assert res.ok and res.rank == r
        assert correspondence_check(pt.B, r)[0]


def test_non_galois_subalgebra_is_rejected(C22):
    xy = C22.mul_vec(C22.e("x"), C22.e("y"))
    B = Subalgebra(C22, Subspace.span(C22.field, 4, [C22.unit, xy]))
    (res,) = check_points(C22, [YuanPoint(B, 1)])
    assert not res.ok and res.rank is None
    assert not correspondence_check(B, 1)[0]


def test_wrong_rank_is_rejected(C22):
    pt = standard_point(C22, 1)
    (res,) = check_points(C22, [YuanPoint(pt.B, 2)])
    assert not res.ok and res.rank == 1


def test_extension_fields_are_refused():
    C = truncated_algebra(make_field(2, 2), 2)
    with pytest.raises(ValueError):
        check_points(C, [standard_point(C, 1)])
