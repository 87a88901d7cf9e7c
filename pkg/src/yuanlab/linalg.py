"""Exact dense linear algebra over F_q.

Vectors are tuples of integer-encoded field elements.  Row reduction is
deterministic (first nonzero entry in column order is the pivot), so the
reduced row-echelon form of a row space is canonical and doubles as an
equality key for subspaces.

Three elimination paths share one contract:

* q == 2: rows packed into Python ints, one bit per column;
* prime q: plain integer lists reduced mod p;
* general F_q: field-operation calls.

``batched_rref`` additionally reduces a whole stack of small matrices at
once with numpy (prime fields only); the enumeration code leans on it.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import DimensionMismatch
from .gf import FiniteField

Vector = tuple[int, ...]


# -- row reduction ----------------------------------------------------------

def _rref_gf2(rows: Sequence[Sequence[int]], ncols: int) -> tuple[list[Vector], list[int]]:
    packed = []
    for row in rows:
        v = 0
        for j, c in enumerate(row):
            if c:
                v |= 1 << j
        if v:
            packed.append(v)
    basis: list[int] = []
    pivots: list[int] = []
    for col in range(ncols):
        bit = 1 << col
        hit = None
        for i, v in enumerate(packed):
            if v & bit:
                hit = i
                break
        if hit is None:
            continue
        pv = packed.pop(hit)
        packed = [v ^ pv if v & bit else v for v in packed]
        basis = [b ^ pv if b & bit else b for b in basis]
        basis.append(pv)
        pivots.append(col)
        packed = [v for v in packed if v]
        if not packed:
            break
    out = [tuple((b >> j) & 1 for j in range(ncols)) for b in basis]
    return out, pivots


def _rref_prime(rows: Sequence[Sequence[int]], ncols: int, p: int) -> tuple[list[Vector], list[int]]:
    work = [list(r) for r in rows if any(r)]
    basis: list[list[int]] = []
    pivots: list[int] = []
    for col in range(ncols):
        hit = None
        for i, r in enumerate(work):
            if r[col] % p:
                hit = i
                break
        if hit is None:
            continue
        pr = work.pop(hit)
        inv = pow(pr[col], p - 2, p)
        pr = [(c * inv) % p for c in pr]
        for group in (work, basis):
            for i, r in enumerate(group):
                c = r[col] % p
                if c:
                    group[i] = [(a - c * b) % p for a, b in zip(r, pr)]
        basis.append(pr)
        pivots.append(col)
        work = [r for r in work if any(x % p for x in r)]
        if not work:
            break
    return [tuple(r) for r in basis], pivots


def _rref_generic(
    rows: Sequence[Sequence[int]], ncols: int, F: FiniteField
) -> tuple[list[Vector], list[int]]:
    work = [list(r) for r in rows if any(r)]
    basis: list[list[int]] = []
    pivots: list[int] = []
    for col in range(ncols):
        hit = None
        for i, r in enumerate(work):
            if r[col]:
                hit = i
                break
        if hit is None:
            continue
        pr = work.pop(hit)
        inv = F.inv(pr[col])
        pr = [F.mul(c, inv) for c in pr]
        for group in (work, basis):
            for i, r in enumerate(group):
                c = r[col]
                if c:
                    group[i] = [F.sub(a, F.mul(c, b)) for a, b in zip(r, pr)]
        basis.append(pr)
        pivots.append(col)
        work = [r for r in work if any(r)]
        if not work:
            break
    return [tuple(r) for r in basis], pivots


def rref(
    rows: Iterable[Sequence[int]], ncols: int, F: FiniteField, path: str = "auto"
) -> tuple[list[Vector], list[int]]:
    """Reduced row-echelon basis of the row space and its pivot columns.

    ``path`` forces one of ``"gf2"``, ``"prime"``, ``"generic"``; the
    default picks the fastest applicable one.
    """
    rows = list(rows)
    for r in rows:
        if len(r) != ncols:
            raise DimensionMismatch(f"row of length {len(r)}, expected {ncols}")
    if path == "auto":
        path = "gf2" if F.q == 2 else "prime" if F.e == 1 else "generic"
    if path == "gf2":
        return _rref_gf2(rows, ncols)
    if path == "prime":
        return _rref_prime(rows, ncols, F.p)
    return _rref_generic(rows, ncols, F)


def rank(rows: Iterable[Sequence[int]], ncols: int, F: FiniteField) -> int:
    return len(rref(rows, ncols, F)[1])


# -- vectors ----------------------------------------------------------------

def vadd(F: FiniteField, u: Sequence[int], v: Sequence[int]) -> Vector:
    if F.e == 1:
        p = F.p
        return tuple((a + b) % p for a, b in zip(u, v))
    return tuple(F.add(a, b) for a, b in zip(u, v))


def vsub(F: FiniteField, u: Sequence[int], v: Sequence[int]) -> Vector:
    if F.e == 1:
        p = F.p
        return tuple((a - b) % p for a, b in zip(u, v))
    return tuple(F.sub(a, b) for a, b in zip(u, v))


def vscale(F: FiniteField, c: int, u: Sequence[int]) -> Vector:
    if F.e == 1:
        p = F.p
        return tuple((c * a) % p for a in u)
    return tuple(F.mul(c, a) for a in u)


def vcombine(F: FiniteField, coeffs: Sequence[int], vectors: Sequence[Sequence[int]], n: int) -> Vector:
    """sum(coeffs[i] * vectors[i]) as a length-n vector."""
    if F.e == 1:
        p = F.p
        acc = [0] * n
        for c, v in zip(coeffs, vectors):
            if c:
                for j, x in enumerate(v):
                    if x:
                        acc[j] += c * x
        return tuple(a % p for a in acc)
    acc = [0] * n
    for c, v in zip(coeffs, vectors):
        if c:
            for j, x in enumerate(v):
                if x:
                    acc[j] = F.add(acc[j], F.mul(c, x))
    return tuple(acc)


def zero_vector(n: int) -> Vector:
    return (0,) * n


def unit_vector(n: int, i: int) -> Vector:
    return tuple(1 if j == i else 0 for j in range(n))


# -- matrices ---------------------------------------------------------------

@dataclass(frozen=True)
class Matrix:
    """A rows x cols matrix over F_q stored row-major."""

    field: FiniteField
    rows: int
    cols: int
    entries: tuple[int, ...]

    def __post_init__(self):
        if len(self.entries) != self.rows * self.cols:
            raise DimensionMismatch("entries length must equal rows*cols")

    @classmethod
    def from_rows(cls, F: FiniteField, rows: Sequence[Sequence[int]], cols: int | None = None) -> "Matrix":
        rows = [tuple(r) for r in rows]
        if cols is None:
            cols = len(rows[0]) if rows else 0
        for r in rows:
            if len(r) != cols:
                raise DimensionMismatch("ragged matrix rows")
        return cls(F, len(rows), cols, tuple(x for r in rows for x in r))

    @classmethod
    def identity(cls, F: FiniteField, n: int) -> "Matrix":
        return cls.from_rows(F, [unit_vector(n, i) for i in range(n)], n)

    @classmethod
    def zero(cls, F: FiniteField, rows: int, cols: int) -> "Matrix":
        return cls(F, rows, cols, (0,) * (rows * cols))

    def row(self, i: int) -> Vector:
        return self.entries[i * self.cols:(i + 1) * self.cols]

    def row_list(self) -> list[Vector]:
        return [self.row(i) for i in range(self.rows)]

    def transpose(self) -> "Matrix":
        return Matrix.from_rows(
            self.field,
            [tuple(self.entries[i * self.cols + j] for i in range(self.rows)) for j in range(self.cols)],
            self.rows,
        )

    def __matmul__(self, other: "Matrix") -> "Matrix":
        if self.cols != other.rows:
            raise DimensionMismatch(f"{self.rows}x{self.cols} @ {other.rows}x{other.cols}")
        orows = other.row_list()
        out = [vcombine(self.field, self.row(i), orows, other.cols) for i in range(self.rows)]
        return Matrix.from_rows(self.field, out, other.cols)

    def apply(self, v: Sequence[int]) -> Vector:
        """Matrix times column vector."""
        if len(v) != self.cols:
            raise DimensionMismatch("vector length does not match matrix columns")
        cols = self.transpose().row_list()
        return vcombine(self.field, v, cols, self.rows)

    def rank(self) -> int:
        return rank(self.row_list(), self.cols, self.field)


# -- subspaces ----------------------------------------------------------------

@dataclass(frozen=True)
class Subspace:
    """A subspace of F_q^n held by its canonical reduced echelon basis."""

    field: FiniteField
    ambient_dim: int
    basis: tuple[Vector, ...]
    pivots: tuple[int, ...] = field(compare=False)

    @classmethod
    def span(cls, F: FiniteField, n: int, vectors: Iterable[Sequence[int]]) -> "Subspace":
        rows, piv = rref(vectors, n, F)
        return cls(F, n, tuple(rows), tuple(piv))

    @classmethod
    def zero(cls, F: FiniteField, n: int) -> "Subspace":
        return cls(F, n, (), ())

    @classmethod
    def full(cls, F: FiniteField, n: int) -> "Subspace":
        return cls(F, n, tuple(unit_vector(n, i) for i in range(n)), tuple(range(n)))

    @property
    def dim(self) -> int:
        return len(self.basis)

    def reduce(self, v: Sequence[int]) -> Vector:
        """Residual of v after clearing the pivot columns; zero iff v is in the space."""
        F = self.field
        coeffs = [v[c] for c in self.pivots]
        if not any(coeffs):
            return tuple(v)
        return vsub(F, v, vcombine(F, coeffs, self.basis, self.ambient_dim))

    def contains(self, v: Sequence[int]) -> bool:
        return not any(self.reduce(v))

    def coordinates(self, v: Sequence[int]) -> Vector:
        """Coefficients of v in the canonical basis (v must lie in the space)."""
        return tuple(v[c] for c in self.pivots)

    def combine(self, coeffs: Sequence[int]) -> Vector:
        return vcombine(self.field, coeffs, self.basis, self.ambient_dim)

    def contains_space(self, other: "Subspace") -> bool:
        return all(self.contains(b) for b in other.basis)

    def sum(self, other: "Subspace") -> "Subspace":
        self._check(other)
        return Subspace.span(self.field, self.ambient_dim, self.basis + other.basis)

    def intersect(self, other: "Subspace") -> "Subspace":
        self._check(other)
        F, n = self.field, self.ambient_dim
        if not self.basis or not other.basis:
            return Subspace.zero(F, n)
        stacked = list(self.basis) + list(other.basis)
        rel = left_kernel_rows(stacked, n, F)
        k = len(self.basis)
        vecs = [vcombine(F, r[:k], self.basis, n) for r in rel]
        return Subspace.span(F, n, vecs)

    def complement_indices(self) -> tuple[int, ...]:
        """Non-pivot coordinates; their unit vectors span a complement."""
        piv = set(self.pivots)
        return tuple(i for i in range(self.ambient_dim) if i not in piv)

    def _check(self, other: "Subspace") -> None:
        if other.ambient_dim != self.ambient_dim or other.field != self.field:
            raise DimensionMismatch("subspaces live in different ambient spaces")

    def to_json(self) -> dict:
        return {"basis": [list(b) for b in self.basis]}


def all_subspaces(F: FiniteField, n: int, k: int | None = None) -> Iterable[Subspace]:
    """Every subspace of F_q^n (of dimension k if given), one echelon form each."""
    dims = range(n + 1) if k is None else [k]
    for d in dims:
        for piv in itertools.combinations(range(n), d):
            slots = [(i, c) for i in range(d) for c in range(piv[i] + 1, n) if c not in piv]
            for vals in itertools.product(range(F.q), repeat=len(slots)):
                rows = [[0] * n for _ in range(d)]
                for i, c in enumerate(piv):
                    rows[i][c] = 1
                for (i, c), v in zip(slots, vals):
                    rows[i][c] = v
                yield Subspace(F, n, tuple(tuple(r) for r in rows), piv)


def canonical_echelon(m: Matrix) -> Subspace:
    """Row space of m in canonical reduced echelon form."""
    return Subspace.span(m.field, m.cols, m.row_list())


def nullspace_rows(rows: Sequence[Sequence[int]], ncols: int, F: FiniteField) -> list[Vector]:
    """Canonical basis of {x : M x = 0} for M with the given rows."""
    basis, piv = rref(rows, ncols, F)
    free = [j for j in range(ncols) if j not in set(piv)]
    out = []
    for f in free:
        x = [0] * ncols
        x[f] = 1
        for r, c in zip(basis, piv):
            x[c] = F.neg(r[f])
        out.append(tuple(x))
    return list(rref(out, ncols, F)[0])


def left_kernel_rows(rows: Sequence[Sequence[int]], ncols: int, F: FiniteField) -> list[Vector]:
    """Basis of {y : y M = 0} for M with the given rows."""
    nrows = len(rows)
    if nrows == 0:
        return []
    cols = [tuple(r[j] for r in rows) for j in range(ncols)]
    return nullspace_rows(cols, nrows, F)


def kernel(m: Matrix) -> Subspace:
    """Right kernel {x : m x = 0}."""
    return Subspace.span(m.field, m.cols, nullspace_rows(m.row_list(), m.cols, m.field))


def solve(m: Matrix, rhs: Sequence[int]) -> Vector | None:
    """One solution x of m x = rhs, or None when the system is inconsistent."""
    F = m.field
    if len(rhs) != m.rows:
        raise DimensionMismatch("right-hand side length does not match matrix rows")
    aug = [tuple(m.row(i)) + (rhs[i],) for i in range(m.rows)]
    basis, piv = rref(aug, m.cols + 1, F)
    if m.cols in piv:
        return None
    x = [0] * m.cols
    for r, c in zip(basis, piv):
        x[c] = r[m.cols]
    return tuple(x)


def solve_left(rows: Sequence[Sequence[int]], target: Sequence[int], F: FiniteField) -> Vector | None:
    """Coefficients y with y M = target for M given by rows, or None."""
    if not rows:
        return () if not any(target) else None
    n = len(target)
    m = Matrix.from_rows(F, rows, n).transpose()
    return solve(m, target)


def invert_rows(rows: Sequence[Sequence[int]], F: FiniteField) -> list[Vector] | None:
    """Inverse of a square matrix given by rows, or None if singular."""
    n = len(rows)
    aug = [tuple(r) + unit_vector(n, i) for i, r in enumerate(rows)]
    basis, piv = rref(aug, 2 * n, F)
    if piv[:n] != list(range(n)) or len(piv) < n:
        return None
    return [tuple(b[n:]) for b in basis[:n]]


def compose_rows(first: Sequence[Sequence[int]], second: Sequence[Sequence[int]], F: FiniteField) -> list[Vector]:
    """Images-as-rows matrix of ``second o first`` (apply first, then second)."""
    n = len(second[0]) if second else 0
    return [vcombine(F, r, second, n) for r in first]


# -- batched numpy elimination (prime fields) --------------------------------

def inverse_table(p: int) -> np.ndarray:
    tab = np.zeros(p, dtype=np.int64)
    for a in range(1, p):
        tab[a] = pow(a, p - 2, p)
    return tab


def batched_rref(mats: np.ndarray, p: int) -> tuple[np.ndarray, np.ndarray]:
    """Row-reduce a stack of matrices (N, s, m) over F_p.

    Returns the canonical reduced echelon forms (same shape; zero rows at
    the bottom) and the ranks.  Identical pivot rule to :func:`rref`.
    """
    a = np.array(mats, dtype=np.int64) % p
    N, s, m = a.shape
    rank = np.zeros(N, dtype=np.int64)
    if s == 0 or N == 0:
        return a, rank
    inv = inverse_table(p)
    rows = np.arange(s)
    ar = np.arange(N)
    for col in range(m):
        cand = (a[:, :, col] != 0) & (rows[None, :] >= rank[:, None])
        has = cand.any(axis=1)
        if not has.any():
            continue
        piv = np.where(has, np.argmax(cand, axis=1), 0)
        r = np.minimum(rank, s - 1)
        row_p = a[ar, piv]
        row_r = a[ar, r]
        h = has[:, None]
        a[ar, piv] = np.where(h, row_r, row_p)
        pr = np.where(h, (row_p * inv[row_p[:, col]][:, None]) % p, row_r)
        a[ar, r] = pr
        factors = a[:, :, col] * has[:, None]
        factors[ar, r] = 0
        a = (a - factors[:, :, None] * pr[:, None, :]) % p
        rank += has
    return a, rank


def batched_rank(mats: np.ndarray, p: int) -> np.ndarray:
    return batched_rref(mats, p)[1]
