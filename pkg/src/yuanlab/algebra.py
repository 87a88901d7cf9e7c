"""Finite-dimensional commutative unital algebras over F_q.

An algebra is an explicit basis e_0..e_{m-1} with structure constants
``mul[i][j] = e_i * e_j`` (a coordinate vector).  Everything else in the
package reduces ring theory to linear algebra on these coordinates.

Monomial algebras k[x_1..x_n]/(x_i^{N_i} - a_i) additionally remember the
exponent vector of every basis element, which is what the Kaehler
differential code needs to differentiate.  Quotients and re-basings of a
monomial algebra keep a pointer to it (:class:`Ambient`).
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

from .errors import DimensionMismatch, ImproperIdeal, NotFree, NotLocal, TooLarge
from .gf import FiniteField
from .linalg import (
    Subspace,
    all_subspaces,
    Vector,
    invert_rows,
    left_kernel_rows,
    rank,
    rref,
    unit_vector,
    vadd,
    vcombine,
    vscale,
    vsub,
)

MAX_DIM = 4096
EXHAUSTIVE_ASSOC_DIM = 32
ASSOC_SAMPLES = 20000


@dataclass(frozen=True)
class Ambient:
    """A surjection from a monomial algebra onto the algebra that holds it."""

    cover: "FiniteAlgebra"
    images: tuple[Vector, ...]


@dataclass(frozen=True, eq=False, repr=False)
class FiniteAlgebra:
    field: FiniteField
    dim: int
    mul: tuple[tuple[Vector, ...], ...]
    unit: Vector
    labels: tuple[str, ...] | None = None
    exponents: tuple[tuple[int, ...], ...] | None = None
    bounds: tuple[int, ...] | None = None
    ambient: Ambient | None = None
    check: bool = field(default=True, repr=False)

    def __post_init__(self):
        if len(self.mul) != self.dim or any(len(r) != self.dim for r in self.mul):
            raise DimensionMismatch("structure constants must be dim x dim x dim")
        if len(self.unit) != self.dim:
            raise DimensionMismatch("unit has the wrong length")
        sparse = tuple(
            tuple(tuple((k, c) for k, c in enumerate(self.mul[i][j]) if c) for j in range(self.dim))
            for i in range(self.dim)
        )
        object.__setattr__(self, "_sparse", sparse)
        if self.check:
            self._verify()

    def __repr__(self) -> str:
        return f"FiniteAlgebra(F_{self.field.q}, dim={self.dim})"

    # -- validation -----------------------------------------------------------

    def _verify(self) -> None:
        m = self.dim
        for i in range(m):
            for j in range(i + 1, m):
                if self.mul[i][j] != self.mul[j][i]:
                    raise ValueError(f"not commutative at basis pair ({i}, {j})")
        for i in range(m):
            if self.mul_vec(self.unit, self.basis_vector(i)) != self.basis_vector(i):
                raise ValueError(f"unit does not act as identity on e_{i}")
        if m <= EXHAUSTIVE_ASSOC_DIM:
            triples: Iterable = itertools.product(range(m), repeat=3)
        else:
            rng = random.Random(0)
            triples = ((rng.randrange(m), rng.randrange(m), rng.randrange(m)) for _ in range(ASSOC_SAMPLES))
        for i, j, l in triples:
            left = self.mul_vec(self.mul[i][j], self.basis_vector(l))
            right = self.mul_vec(self.basis_vector(i), self.mul[j][l])
            if left != right:
                raise ValueError(f"not associative at basis triple ({i}, {j}, {l})")

    # -- elements ----------------------------------------------------------------

    def zero(self) -> Vector:
        return (0,) * self.dim

    def one(self) -> Vector:
        return self.unit

    def basis_vector(self, i: int) -> Vector:
        return unit_vector(self.dim, i)

    def basis(self) -> list[Vector]:
        return [self.basis_vector(i) for i in range(self.dim)]

    def add(self, u: Sequence[int], v: Sequence[int]) -> Vector:
        return vadd(self.field, u, v)

    def sub(self, u: Sequence[int], v: Sequence[int]) -> Vector:
        return vsub(self.field, u, v)

    def scale(self, c: int, u: Sequence[int]) -> Vector:
        return vscale(self.field, c, u)

    def scalar(self, c: int) -> Vector:
        return vscale(self.field, c, self.unit)

    def mul_vec(self, u: Sequence[int], v: Sequence[int]) -> Vector:
        F = self.field
        sp = self._sparse
        acc = [0] * self.dim
        if F.e == 1:
            for i, a in enumerate(u):
                if a:
                    row = sp[i]
                    for j, b in enumerate(v):
                        if b:
                            ab = a * b
                            for k, c in row[j]:
                                acc[k] += ab * c
            p = F.p
            return tuple(x % p for x in acc)
        for i, a in enumerate(u):
            if a:
                row = sp[i]
                for j, b in enumerate(v):
                    if b:
                        ab = F.mul(a, b)
                        for k, c in row[j]:
                            acc[k] = F.add(acc[k], F.mul(ab, c))
        return tuple(acc)

    def power(self, u: Sequence[int], k: int) -> Vector:
        result, base = self.unit, tuple(u)
        while k:
            if k & 1:
                result = self.mul_vec(result, base)
            base = self.mul_vec(base, base)
            k >>= 1
        return result

    def mult_images(self, u: Sequence[int]) -> list[Vector]:
        """Rows u*e_i: the multiplication-by-u operator in images-as-rows form."""
        return [self.mul_vec(u, self.basis_vector(i)) for i in range(self.dim)]

    def is_unit(self, u: Sequence[int]) -> bool:
        return rank(self.mult_images(u), self.dim, self.field) == self.dim

    def inverse(self, u: Sequence[int]) -> Vector:
        inv = invert_rows(self.mult_images(u), self.field)
        if inv is None:
            raise ZeroDivisionError("element is not a unit")
        # row-vector convention: x * M_u = 1  =>  x = 1 * M_u^{-1}
        return vcombine(self.field, self.unit, inv, self.dim)

    def combine(self, coeffs: Sequence[int], vectors: Sequence[Sequence[int]]) -> Vector:
        return vcombine(self.field, coeffs, vectors, self.dim)

    def e(self, *labels: str) -> Vector:
        """Sum of the basis elements with the given labels."""
        if self.labels is None:
            raise KeyError("algebra has no labels")
        v = self.zero()
        for lab in labels:
            v = self.add(v, self.basis_vector(self.labels.index(lab)))
        return v

    def element(self, terms: dict[str, int]) -> Vector:
        """Element from a {label: coefficient} mapping."""
        v = [0] * self.dim
        for lab, c in terms.items():
            i = self.labels.index(lab)
            v[i] = self.field.add(v[i], c % self.field.q)
        return tuple(v)

    def format(self, v: Sequence[int]) -> str:
        labels = self.labels or tuple(f"e{i}" for i in range(self.dim))
        terms = []
        for c, lab in zip(v, labels):
            if c:
                terms.append(lab if c == 1 and lab != "1" else f"{c}" if lab == "1" else f"{c}*{lab}")
        return " + ".join(terms) if terms else "0"

    # -- monomial structure -------------------------------------------------------

    @property
    def is_monomial(self) -> bool:
        return self.exponents is not None

    @property
    def n_vars(self) -> int:
        return len(self.bounds) if self.bounds is not None else 0

    def variable(self, i: int) -> Vector:
        alpha = tuple(1 if j == i else 0 for j in range(self.n_vars))
        return self.basis_vector(self.exponents.index(alpha))

    def variables(self) -> list[Vector]:
        return [self.variable(i) for i in range(self.n_vars)]

    def monomial_index(self, alpha: Sequence[int]) -> int:
        return self.exponents.index(tuple(alpha))

    @property
    def is_split_truncated(self) -> bool:
        """k[x_1..x_n]/(x_i^p) on its monomial basis."""
        if self.exponents is None or any(b != self.field.p for b in self.bounds):
            return False
        for i in range(self.n_vars):
            x = self.variable(i)
            if any(self.power(x, self.field.p)):
                return False
        return self.unit == self.basis_vector(0)

    # -- serialization ------------------------------------------------------------

    def to_json(self) -> dict:
        return {
            "p": self.field.p,
            "e": self.field.e,
            "dim": self.dim,
            "unit": list(self.unit),
            "mul": [[list(v) for v in row] for row in self.mul],
            "labels": list(self.labels) if self.labels else [f"e{i}" for i in range(self.dim)],
        }

    @classmethod
    def from_json(cls, data: dict) -> "FiniteAlgebra":
        from .gf import make_field

        F = make_field(data["p"], data["e"])
        mul = tuple(tuple(tuple(v) for v in row) for row in data["mul"])
        return cls(F, data["dim"], mul, tuple(data["unit"]), labels=tuple(data["labels"]))


# -- maps ---------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class AlgebraMap:
    """A k-linear map between algebras, stored as the images of the source basis."""

    source: FiniteAlgebra
    target: FiniteAlgebra
    images: tuple[Vector, ...]

    def __call__(self, v: Sequence[int]) -> Vector:
        return vcombine(self.target.field, v, self.images, self.target.dim)

    def is_multiplicative(self) -> bool:
        S, T = self.source, self.target
        if self(S.unit) != T.unit:
            return False
        for i in range(S.dim):
            for j in range(i, S.dim):
                if self(S.mul[i][j]) != T.mul_vec(self.images[i], self.images[j]):
                    return False
        return True

    def rank(self) -> int:
        return rank(self.images, self.target.dim, self.target.field)

    def is_bijective(self) -> bool:
        return self.source.dim == self.target.dim == self.rank()

    def compose(self, after: "AlgebraMap") -> "AlgebraMap":
        """``after o self``."""
        return AlgebraMap(self.source, after.target, tuple(after(v) for v in self.images))

    def inverse(self) -> "AlgebraMap":
        inv = invert_rows(self.images, self.source.field)
        if inv is None or self.source.dim != self.target.dim:
            raise ValueError("map is not invertible")
        return AlgebraMap(self.target, self.source, tuple(inv))

    def kernel(self) -> Subspace:
        rows = left_kernel_rows(self.images, self.target.dim, self.source.field)
        return Subspace.span(self.source.field, self.source.dim, rows)

    def to_json(self) -> dict:
        return {"images": [list(v) for v in self.images]}


# -- substructures ------------------------------------------------------------

@dataclass(frozen=True)
class Subalgebra:
    parent: FiniteAlgebra
    space: Subspace
    generators: tuple[Vector, ...] = field(default=(), compare=False)

    def __post_init__(self):
        A, S = self.parent, self.space
        if not S.contains(A.unit):
            raise ValueError("subalgebra must contain the unit")
        for i, u in enumerate(S.basis):
            for v in S.basis[i:]:
                if not S.contains(A.mul_vec(u, v)):
                    raise ValueError("subspace is not closed under multiplication")

    @property
    def dim(self) -> int:
        return self.space.dim

    @property
    def basis(self) -> tuple[Vector, ...]:
        return self.space.basis

    def contains(self, v: Sequence[int]) -> bool:
        return self.space.contains(v)

    @cached_property
    def algebra(self) -> tuple[FiniteAlgebra, AlgebraMap]:
        """This subalgebra as a standalone algebra, with its inclusion map."""
        A, S = self.parent, self.space
        mul = tuple(
            tuple(S.coordinates(A.mul_vec(u, v)) for v in S.basis) for u in S.basis
        )
        # closed subspaces of a commutative associative algebra need no re-check
        alg = FiniteAlgebra(
            A.field, S.dim, mul, S.coordinates(A.unit), labels=tuple(A.format(b) for b in S.basis), check=False
        )
        return alg, AlgebraMap(alg, A, S.basis)

    def as_algebra(self) -> tuple[FiniteAlgebra, AlgebraMap]:
        return self.algebra

    def to_json(self) -> dict:
        return self.space.to_json()


@dataclass(frozen=True)
class Ideal:
    parent: FiniteAlgebra
    space: Subspace

    def __post_init__(self):
        A, S = self.parent, self.space
        for v in S.basis:
            for i in range(A.dim):
                if not S.contains(A.mul_vec(v, A.basis_vector(i))):
                    raise ValueError("subspace is not an ideal")

    @property
    def dim(self) -> int:
        return self.space.dim

    @property
    def basis(self) -> tuple[Vector, ...]:
        return self.space.basis

    def contains(self, v: Sequence[int]) -> bool:
        return self.space.contains(v)

    @property
    def is_zero(self) -> bool:
        return self.space.dim == 0

    @property
    def is_unit_ideal(self) -> bool:
        return self.space.contains(self.parent.unit)

    def to_json(self) -> dict:
        return self.space.to_json()


def base_field_subalgebra(A: FiniteAlgebra) -> Subalgebra:
    """k * 1."""
    return Subalgebra(A, Subspace.span(A.field, A.dim, [A.unit]))


def whole(A: FiniteAlgebra) -> Subalgebra:
    return Subalgebra(A, Subspace.full(A.field, A.dim))


def zero_ideal(A: FiniteAlgebra) -> Ideal:
    return Ideal(A, Subspace.zero(A.field, A.dim))


def all_ideals(A: FiniteAlgebra) -> list[Ideal]:
    """Exhaustive ideal list, sorted by dimension then echelon basis.

    Every ideal is reached from 0 by adjoining one generator at a time, and
    only generators from a complement of the current ideal are tried.
    """
    F = A.field
    zero = zero_ideal(A)
    seen = {zero.space: zero}
    frontier = [zero]
    while frontier:
        nxt = []
        for I in frontier:
            comp = I.space.complement_indices()
            for coeffs in itertools.product(range(F.q), repeat=len(comp)):
                if not any(coeffs):
                    continue
                v = [0] * A.dim
                for c, i in zip(coeffs, comp):
                    v[i] = c
                J = ideal_generate(A, list(I.basis) + [tuple(v)])
                if J.space not in seen:
                    seen[J.space] = J
                    nxt.append(J)
        frontier = nxt
    return sorted(seen.values(), key=lambda I: (I.dim, I.basis))


def all_subalgebras(A: FiniteAlgebra) -> list[Subalgebra]:
    out = []
    for S in all_subspaces(A.field, A.dim):
        if not S.contains(A.unit):
            continue
        if all(S.contains(A.mul_vec(u, v)) for i, u in enumerate(S.basis) for v in S.basis[i:]):
            out.append(Subalgebra(A, S))
    return out


# -- constructors -------------------------------------------------------------

def _var_names(n: int) -> list[str]:
    return ["x", "y", "z"][:n] if n <= 3 else [f"x{i + 1}" for i in range(n)]


def _monomial_label(alpha: Sequence[int], names: Sequence[str]) -> str:
    parts = []
    for a, nm in zip(alpha, names):
        if a == 1:
            parts.append(nm)
        elif a > 1:
            parts.append(f"{nm}^{a}")
    return "*".join(parts) if parts else "1"


def monomial_algebra(
    F: FiniteField,
    bounds: Sequence[int],
    squares: Sequence[int] | None = None,
    names: Sequence[str] | None = None,
) -> FiniteAlgebra:
    """k[x_1..x_n]/(x_i^{N_i} - a_i) on the monomial basis, a_i in k.

    Basis index of x^alpha is the mixed-radix number sum(alpha_i * N_1...N_{i-1}),
    so for two variables at p = 2 the order is 1, x, y, x*y.
    """
    bounds = tuple(bounds)
    n = len(bounds)
    squares = tuple(squares) if squares is not None else (0,) * n
    if len(squares) != n:
        raise DimensionMismatch("one power relation constant per variable")
    dim = 1
    for b in bounds:
        if b < 1:
            raise ValueError("exponent bounds must be positive")
        dim *= b
    if dim > MAX_DIM:
        raise TooLarge(f"algebra of dimension {dim} exceeds {MAX_DIM}")
    names = list(names) if names is not None else _var_names(n)
    exps = []
    for idx in range(dim):
        alpha, rest = [], idx
        for b in bounds:
            rest, a = divmod(rest, b)
            alpha.append(a)
        exps.append(tuple(alpha))
    index = {a: i for i, a in enumerate(exps)}

    def product(a1, a2):
        coeff = 1
        out = []
        for i, (s, b) in enumerate(zip(map(sum, zip(a1, a2)), bounds)):
            if s >= b:
                coeff = F.mul(coeff, squares[i])
                s -= b
            out.append(s)
        return coeff, tuple(out)

    mul = []
    for a1 in exps:
        row = []
        for a2 in exps:
            c, a3 = product(a1, a2)
            v = [0] * dim
            v[index[a3]] = c
            row.append(tuple(v))
        mul.append(tuple(row))
    labels = tuple(_monomial_label(a, names) for a in exps)
    return FiniteAlgebra(
        F, dim, tuple(mul), unit_vector(dim, 0), labels=labels, exponents=tuple(exps), bounds=bounds
    )


def truncated_algebra(F: FiniteField, n: int, squares: Sequence[int] | None = None) -> FiniteAlgebra:
    """k[x_1..x_n]/(x_i^p - a_i); the default a_i = 0 is the split form."""
    if n < 0:
        raise ValueError("number of variables must be nonnegative")
    if F.p**n > MAX_DIM:
        raise TooLarge(f"p^n = {F.p**n} exceeds {MAX_DIM}")
    return monomial_algebra(F, (F.p,) * n, squares)


def dual_numbers(F: FiniteField) -> FiniteAlgebra:
    """k[eps]/(eps^2)."""
    return monomial_algebra(F, (2,), names=["eps"])


def monogenic_algebra(F: FiniteField, coeffs: Sequence[int], name: str = "t") -> FiniteAlgebra:
    """k[t]/(f) for monic f = t^d + coeffs[d-1] t^{d-1} + ... + coeffs[0]."""
    d = len(coeffs)
    if d < 1:
        raise ValueError("need a polynomial of positive degree")

    def reduce(poly):
        poly = list(poly)
        for top in range(len(poly) - 1, d - 1, -1):
            c = poly[top]
            if c:
                poly[top] = 0
                for i, a in enumerate(coeffs):
                    poly[top - d + i] = F.sub(poly[top - d + i], F.mul(c, a))
        return tuple(poly[:d])

    mul = []
    for i in range(d):
        row = []
        for j in range(d):
            poly = [0] * (2 * d)
            poly[i + j] = 1
            row.append(reduce(poly))
        mul.append(tuple(row))
    labels = tuple(_monomial_label((i,), [name]) for i in range(d))
    return FiniteAlgebra(F, d, tuple(mul), unit_vector(d, 0), labels=labels)


def from_structure_constants(
    F: FiniteField, mul: Sequence[Sequence[Sequence[int]]], unit: Sequence[int], labels=None
) -> FiniteAlgebra:
    m = tuple(tuple(tuple(v) for v in row) for row in mul)
    return FiniteAlgebra(F, len(m), m, tuple(unit), labels=tuple(labels) if labels else None)


def rebase(A: FiniteAlgebra, new_basis: Sequence[Sequence[int]], labels=None) -> tuple[FiniteAlgebra, AlgebraMap]:
    """The same algebra presented on another basis.

    ``new_basis`` lists the new basis vectors in A's coordinates.  Returns
    the new algebra R and the isomorphism R -> A.
    """
    F = A.field
    rows = [tuple(r) for r in new_basis]
    inv = invert_rows(rows, F)
    if inv is None or len(rows) != A.dim:
        raise ValueError("new basis is not a basis")

    def coords(v):
        return vcombine(F, v, inv, A.dim)

    mul = tuple(tuple(coords(A.mul_vec(u, v)) for v in rows) for u in rows)
    ambient = None
    if A.is_monomial:
        ambient = Ambient(A, tuple(inv))
    elif A.ambient is not None:
        ambient = Ambient(A.ambient.cover, tuple(coords(v) for v in A.ambient.images))
    R = FiniteAlgebra(
        F, A.dim, mul, coords(A.unit),
        labels=tuple(labels) if labels else tuple(A.format(r) for r in rows),
        ambient=ambient,
    )
    return R, AlgebraMap(R, A, tuple(rows))


def random_rebase(A: FiniteAlgebra, rng: random.Random) -> tuple[FiniteAlgebra, AlgebraMap]:
    """Rebase A on a uniformly random basis."""
    F = A.field
    while True:
        rows = [tuple(rng.randrange(F.q) for _ in range(A.dim)) for _ in range(A.dim)]
        if rank(rows, A.dim, F) == A.dim:
            return rebase(A, rows)


# -- generation and closure ----------------------------------------------------

def subalgebra_generate(A: FiniteAlgebra, gens: Iterable[Sequence[int]]) -> Subalgebra:
    """Smallest subalgebra containing the unit and gens."""
    gens = [tuple(g) for g in gens]
    S = Subspace.span(A.field, A.dim, [A.unit] + gens)
    while True:
        prods = [A.mul_vec(u, v) for i, u in enumerate(S.basis) for v in S.basis[i:]]
        new = Subspace.span(A.field, A.dim, list(S.basis) + prods)
        if new.dim == S.dim:
            return Subalgebra(A, S, tuple(gens))
        S = new


def ideal_generate(A: FiniteAlgebra, gens: Iterable[Sequence[int]]) -> Ideal:
    """The ideal sum(A g): the span of g*e_i."""
    vecs = [A.mul_vec(g, A.basis_vector(i)) for g in gens for i in range(A.dim)]
    return Ideal(A, Subspace.span(A.field, A.dim, vecs))


def ideal_product(I: Ideal, J: Ideal) -> Ideal:
    A = I.parent
    vecs = [A.mul_vec(u, v) for u in I.basis for v in J.basis]
    return Ideal(A, Subspace.span(A.field, A.dim, vecs))


def extend_ideal(B: Subalgebra, I_vectors: Iterable[Sequence[int]]) -> Ideal:
    """The ideal of B.parent generated by the given vectors (e.g. m_B C)."""
    return ideal_generate(B.parent, I_vectors)


def quotient(A: FiniteAlgebra, I: Ideal) -> tuple[FiniteAlgebra, AlgebraMap]:
    """A/I on the complement basis of I's pivots, with the projection map."""
    if I.parent is not A:
        raise ValueError("ideal belongs to another algebra")
    if I.space.contains(A.unit):
        raise ImproperIdeal("cannot form the quotient by the unit ideal")
    S = I.space
    keep = S.complement_indices()

    def project(v):
        r = S.reduce(v)
        return tuple(r[i] for i in keep)

    images = tuple(project(A.basis_vector(i)) for i in range(A.dim))
    mul = tuple(tuple(project(A.mul[i][j]) for j in keep) for i in keep)
    labels = tuple(A.labels[i] for i in keep) if A.labels else None
    ambient = None
    if A.is_monomial:
        ambient = Ambient(A, images)
    elif A.ambient is not None:
        ambient = Ambient(A.ambient.cover, tuple(project(v) for v in A.ambient.images))
    Q = FiniteAlgebra(A.field, len(keep), mul, project(A.unit), labels=labels, ambient=ambient)
    return Q, AlgebraMap(A, Q, images)


def frobenius_image(A: FiniteAlgebra) -> Subalgebra:
    """A^p: the subalgebra generated by the p-th powers of the basis."""
    p = A.field.p
    return subalgebra_generate(A, [A.power(A.basis_vector(i), p) for i in range(A.dim)])


# -- local structure ------------------------------------------------------------

def nilradical(A: FiniteAlgebra) -> Subspace:
    """All nilpotent elements, computed as the kernel of x -> x^(p^t), p^t >= dim.

    The map is Frobenius-semilinear: its kernel is the coordinatewise
    p^t-th root of the linear kernel of the images of the basis.
    """
    F = A.field
    t, pt = 0, 1
    while pt < max(A.dim, 1):
        pt *= F.p
        t += 1
    rows = [A.power(A.basis_vector(i), pt) for i in range(A.dim)]
    lin = left_kernel_rows(rows, A.dim, F)
    roots = []
    for v in lin:
        w = v
        for _ in range(t):
            w = tuple(F.p_th_root(c) for c in w)
        roots.append(w)
    return Subspace.span(F, A.dim, roots)


def count_local_factors(A: FiniteAlgebra) -> int:
    """dim of {x : x^q = x}; one per local factor of A."""
    F = A.field
    rows = [A.sub(A.power(A.basis_vector(i), F.q), A.basis_vector(i)) for i in range(A.dim)]
    return len(left_kernel_rows(rows, A.dim, F))


@dataclass(frozen=True)
class LocalStructure:
    maximal_ideal: Ideal
    residue_dim: int


def local_structure(A: FiniteAlgebra) -> LocalStructure:
    """Maximal ideal (= nilradical) and residue field degree of a local algebra."""
    cache = A.__dict__.get("_local")
    if cache is not None:
        return cache
    if A.dim == 0:
        raise NotLocal("the zero ring is not local")
    if count_local_factors(A) != 1:
        raise NotLocal("algebra has more than one local factor")
    N = nilradical(A)
    out = LocalStructure(Ideal(A, N), A.dim - N.dim)
    object.__setattr__(A, "_local", out)
    return out


def is_local(A: FiniteAlgebra) -> bool:
    try:
        local_structure(A)
    except NotLocal:
        return False
    return True


def annihilator(A: FiniteAlgebra, f: Sequence[int]) -> Ideal:
    """{g : f g = 0}."""
    rows = A.mult_images(f)
    return Ideal(A, Subspace.span(A.field, A.dim, left_kernel_rows(rows, A.dim, A.field)))


def _module_span(A: FiniteAlgebra, vectors: Iterable[Sequence[int]]) -> list[Vector]:
    return [A.mul_vec(v, A.basis_vector(i)) for v in vectors for i in range(A.dim)]


def minimal_generators(I: Ideal) -> list[Vector]:
    """Lifts of a basis of I/mI (Nakayama), taken greedily from I's canonical basis."""
    A = I.parent
    m = local_structure(A).maximal_ideal
    mI = [A.mul_vec(u, v) for u in m.basis for v in I.basis]
    gens: list[Vector] = []
    S = Subspace.span(A.field, A.dim, mI)
    for v in I.basis:
        if not S.contains(v):
            gens.append(v)
            S = Subspace.span(A.field, A.dim, list(S.basis) + _module_span(A, [v]))
    return gens


def free_basis(B: Subalgebra, C: FiniteAlgebra | None = None, prefer: Sequence[Sequence[int]] = ()) -> list[Vector]:
    """A basis of C as a B-module, or NotFree.

    Candidates are taken from ``prefer`` first, then the standard basis;
    a candidate is kept when it is not in m_B C + (B-span of the chosen).
    """
    C = B.parent if C is None else C
    Balg, incl = B.algebra
    mB = [incl(v) for v in local_structure(Balg).maximal_ideal.basis]
    F = C.field
    S = Subspace.span(F, C.dim, [C.mul_vec(b, C.basis_vector(i)) for b in mB for i in range(C.dim)])
    chosen: list[Vector] = []
    for cand in list(prefer) + C.basis():
        if S.dim == C.dim:
            break
        cand = tuple(cand)
        if not S.contains(cand):
            chosen.append(cand)
            S = Subspace.span(F, C.dim, list(S.basis) + [C.mul_vec(b, cand) for b in B.basis])
    if len(chosen) * B.dim != C.dim:
        raise NotFree(f"C has dimension {C.dim}, but {len(chosen)} generators over a rank-{B.dim} base")
    return chosen


# -- tensor products ------------------------------------------------------------

@dataclass(frozen=True)
class TensorProduct:
    algebra: FiniteAlgebra
    left: AlgebraMap
    right: AlgebraMap


def _decomposer(Balg: FiniteAlgebra, incl: AlgebraMap, basis: Sequence[Vector], C: FiniteAlgebra):
    """v -> [beta_s] with v = sum incl(beta_s) * basis_s, beta_s in Balg."""
    F = C.field
    rows = [C.mul_vec(incl(Balg.basis_vector(j)), u) for u in basis for j in range(Balg.dim)]
    inv = invert_rows(rows, F)
    if inv is None:
        raise NotFree("proposed module basis is not free")
    d = Balg.dim

    def decompose(v):
        coords = vcombine(F, v, inv, len(rows))
        return [tuple(coords[s * d:(s + 1) * d]) for s in range(len(basis))]

    return decompose


def tensor_over(
    B: Subalgebra,
    C1: FiniteAlgebra,
    C2: FiniteAlgebra,
    embed2: AlgebraMap | None = None,
) -> TensorProduct:
    """C1 (x)_B C2 for B a subalgebra of C1 mapped into C2.

    ``embed2`` is an algebra map from B's standalone algebra into C2;
    by default it is the inclusion when C2 is C1 and the unit map when B
    is k * 1.  Both sides must be free B-modules.
    """
    if B.parent is not C1:
        raise ValueError("B must be a subalgebra of C1")
    F = C1.field
    Balg, incl1 = B.algebra
    if embed2 is None:
        if C2 is C1:
            embed2 = incl1
        elif B.dim == 1:
            embed2 = AlgebraMap(Balg, C2, (C2.scale(F.inv(Balg.unit[0]), C2.unit),))
        else:
            raise ValueError("need an embedding of B into C2")
    B2 = Subalgebra(C2, Subspace.span(F, C2.dim, embed2.images))
    U = free_basis(B, C1)
    W = free_basis(B2, C2)
    dec1 = _decomposer(Balg, incl1, U, C1)
    dec2 = _decomposer(Balg, embed2, W, C2)
    a, b, d = len(U), len(W), Balg.dim

    def idx(s, t, j):
        return (s * b + t) * d + j

    dimT = a * b * d
    uu = [[dec1(C1.mul_vec(U[s], U[s2])) for s2 in range(a)] for s in range(a)]
    ww = [[dec2(C2.mul_vec(W[t], W[t2])) for t2 in range(b)] for t in range(b)]

    def pack(coeffs):
        # coeffs: dict (s, t) -> element of Balg
        v = [0] * dimT
        for (s, t), beta in coeffs.items():
            for j, c in enumerate(beta):
                if c:
                    v[idx(s, t, j)] = F.add(v[idx(s, t, j)], c)
        return tuple(v)

    basis_info = [(s, t, j) for s in range(a) for t in range(b) for j in range(d)]
    mul = []
    for (s, t, j) in basis_info:
        row = []
        for (s2, t2, j2) in basis_info:
            bj = Balg.mul_vec(Balg.basis_vector(j), Balg.basis_vector(j2))
            coeffs = {}
            for sig, beta1 in enumerate(uu[s][s2]):
                if not any(beta1):
                    continue
                x = Balg.mul_vec(bj, beta1)
                if not any(x):
                    continue
                for tau, beta2 in enumerate(ww[t][t2]):
                    if any(beta2):
                        y = Balg.mul_vec(x, beta2)
                        if any(y):
                            prev = coeffs.get((sig, tau), Balg.zero())
                            coeffs[(sig, tau)] = Balg.add(prev, y)
            row.append(pack(coeffs))
        mul.append(tuple(row))

    one1, one2 = dec1(C1.unit), dec2(C2.unit)
    unit = pack({(s, t): Balg.mul_vec(one1[s], one2[t]) for s in range(a) for t in range(b)})
    lu = [C1.format(u) for u in U]
    lw = [C2.format(w) for w in W]
    lb = Balg.labels or [f"b{j}" for j in range(d)]
    labels = tuple(f"[{lb[j]}]({lu[s]})x({lw[t]})" for (s, t, j) in basis_info)
    T = FiniteAlgebra(F, dimT, tuple(mul), unit, labels=labels)

    left = tuple(
        pack({(s, t): Balg.mul_vec(beta, one2[t]) for s, beta in enumerate(dec1(C1.basis_vector(i))) for t in range(b)})
        for i in range(C1.dim)
    )
    right = tuple(
        pack({(s, t): Balg.mul_vec(one1[s], beta) for t, beta in enumerate(dec2(C2.basis_vector(i))) for s in range(a)})
        for i in range(C2.dim)
    )
    return TensorProduct(T, AlgebraMap(C1, T, left), AlgebraMap(C2, T, right))


def algebra_generators(A: FiniteAlgebra) -> list[Vector]:
    """A (small) set of algebra generators of A over k."""
    cached = A.__dict__.get("_generators")
    if cached is None:
        cached = _find_generators(A)
        object.__setattr__(A, "_generators", cached)
    return list(cached)


def _find_generators(A: FiniteAlgebra) -> list[Vector]:
    if A.is_monomial:
        return A.variables()
    if A.ambient is not None:
        cover = A.ambient.cover
        return [A.ambient.images[cover.monomial_index(a)] for a in _unit_exponents(cover)]
    gens: list[Vector] = []
    S = subalgebra_generate(A, gens).space
    for v in A.basis():
        if S.dim == A.dim:
            break
        if not S.contains(v):
            gens.append(v)
            S = subalgebra_generate(A, gens).space
    return gens


def _unit_exponents(cover: FiniteAlgebra) -> list[tuple[int, ...]]:
    n = cover.n_vars
    return [tuple(1 if j == i else 0 for j in range(n)) for i in range(n)]
