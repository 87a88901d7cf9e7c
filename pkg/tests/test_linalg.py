import random

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from yuanlab.gf import make_field
from yuanlab.linalg import (
    Matrix,
    Subspace,
    all_subspaces,
    batched_rank,
    batched_rref,
    canonical_echelon,
    kernel,
    rank,
    rref,
    solve,
)
from yuanlab.yuan import gaussian_binomial

FIELDS = [(2, 1), (3, 1), (5, 1), (2, 2), (3, 2)]


def matrices(max_rows=6, max_cols=8):
    @st.composite
    def build(draw):
        p, e = draw(st.sampled_from(FIELDS))
        F = make_field(p, e)
        r = draw(st.integers(0, max_rows))
        c = draw(st.integers(1, max_cols))
        rows = [tuple(draw(st.integers(0, F.q - 1)) for _ in range(c)) for _ in range(r)]
        return F, rows, c

    return build()


def test_canonical_echelon_examples(F2):
    assert canonical_echelon(Matrix.zero(F2, 2, 3)).dim == 0
    full = canonical_echelon(Matrix.identity(F2, 3))
    assert full.pivots == (0, 1, 2)
    S = canonical_echelon(Matrix.from_rows(F2, [(1, 1, 0), (0, 1, 1)]))
    assert S.basis == ((1, 0, 1), (0, 1, 1))


def test_kernel_examples(F2):
    assert kernel(Matrix.identity(F2, 3)).dim == 0
    K = kernel(Matrix.from_rows(F2, [(1, 1)]))
    assert K.basis == ((1, 1),)


def test_intersect_example(F2):
    a = Subspace.span(F2, 2, [(1, 0), (0, 1)])
    b = Subspace.span(F2, 2, [(1, 1)])
    assert a.intersect(b).basis == ((1, 1),)
    assert a.contains_space(b)


def test_solve(F3):
    m = Matrix.from_rows(F3, [(1, 2), (0, 1)])
    x = solve(m, (2, 1))
    assert m.apply(x) == (2, 1)
    assert solve(Matrix.from_rows(F3, [(1, 1), (2, 2)]), (1, 0)) is None


@given(matrices())
def test_rank_nullity(data):
    F, rows, c = data
    m = Matrix.from_rows(F, rows, c)
    assert m.rank() + kernel(m).dim == c


@given(matrices())
def test_echelon_is_idempotent_and_canonical(data):
    F, rows, c = data
    S = Subspace.span(F, c, rows)
    again = Subspace.span(F, c, S.basis)
    assert again == S
    assert list(S.pivots) == sorted(set(S.pivots))
    for i, (row, piv) in enumerate(zip(S.basis, S.pivots)):
        assert row[piv] == 1 and not any(row[:piv])
        assert all(other[piv] == 0 for j, other in enumerate(S.basis) if j != i)
    shuffled = rows[::-1]
    assert Subspace.span(F, c, shuffled) == S


@given(matrices())
def test_elimination_paths_agree(data):
    F, rows, c = data
    ref = rref(rows, c, F, path="generic")
    if F.e == 1:
        assert rref(rows, c, F, path="prime") == ref
    if F.q == 2:
        assert rref(rows, c, F, path="gf2") == ref


@given(st.integers(0, 2**31))
def test_modular_law_over_f2(seed):
    rng = random.Random(seed)
    F2 = make_field(2)
    n = rng.randint(1, 8)

    def rand_space(k):
        return Subspace.span(F2, n, [tuple(rng.randrange(2) for _ in range(n)) for _ in range(k)])

    A, B, C = rand_space(rng.randint(0, 4)), rand_space(rng.randint(0, 4)), rand_space(rng.randint(0, 4))
    if not C.contains_space(A):
        C = C.sum(A)
    # A <= C  implies  A + (B n C) = (A + B) n C
    assert A.sum(B.intersect(C)) == A.sum(B).intersect(C)
    assert A.sum(B).dim + A.intersect(B).dim == A.dim + B.dim


@pytest.mark.parametrize("p", [2, 3, 5])
def test_batched_rref_matches_rref(p):
    F = make_field(p)
    rng = np.random.default_rng(p)
    M = rng.integers(0, p, size=(200, 4, 6))
    M[::4, 2:] = 0
    red, rk = batched_rref(M, p)
    for i in range(len(M)):
        basis, _ = rref([tuple(int(x) for x in r) for r in M[i]], 6, F)
        assert rk[i] == len(basis)
        assert [tuple(int(x) for x in r) for r in red[i][: rk[i]]] == basis
        assert not red[i][rk[i]:].any()
    assert (batched_rank(M, p) == rk).all()


@pytest.mark.parametrize("p,e,n", [(2, 1, 4), (3, 1, 3), (2, 2, 3)])
def test_all_subspaces_count(p, e, n):
    F = make_field(p, e)
    spaces = list(all_subspaces(F, n))
    assert len(spaces) == sum(gaussian_binomial(n, k, F.q) for k in range(n + 1))
    assert len(set(spaces)) == len(spaces)
    assert all(Subspace.span(F, n, S.basis) == S for S in spaces)


def test_rank_counts(F2):
    assert rank([(1, 0, 1), (1, 0, 1), (0, 0, 0)], 3, F2) == 1
