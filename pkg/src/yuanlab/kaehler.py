"""Kaehler differentials, Fitting ideals, p-bases and the Harper normal form.

Omega_{C/B} is presented on the differentials dX_i of the variables of a
monomial cover P -> C.  Module elements of C^g are stored as g blocks of
C-coordinates.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass
from typing import Sequence

from .algebra import (
    AlgebraMap,
    FiniteAlgebra,
    Ideal,
    Subalgebra,
    frobenius_image,
    local_structure,
    minimal_generators,
    truncated_algebra,
)
from .errors import (
    DimensionMismatch,
    InternalDisagreement,
    NonSplitResidueField,
    NotDiffSimple,
    NotExponentOne,
    NotTruncatedAmbient,
)
from .linalg import Subspace, Vector, left_kernel_rows, rank, solve_left

RANDOM_CANDIDATES = 2000


@dataclass(frozen=True, eq=False)
class ModulePresentation:
    """C^g modulo the C-span of the relation rows."""

    ring: FiniteAlgebra
    n_generators: int
    relations: tuple[tuple[Vector, ...], ...]

    def _flat(self, row: Sequence[Vector]) -> Vector:
        return tuple(c for v in row for c in v)

    def relation_space(self) -> Subspace:
        """The relation submodule N as a k-subspace of C^g."""
        C, g = self.ring, self.n_generators
        vecs = []
        for row in self.relations:
            for i in range(C.dim):
                e = C.basis_vector(i)
                vecs.append(self._flat([C.mul_vec(e, v) for v in row]))
        return Subspace.span(C.field, g * C.dim, vecs)

    def dim_k(self) -> int:
        return self.n_generators * self.ring.dim - self.relation_space().dim

    def element(self, coeffs: Sequence[Vector]) -> Vector:
        """Class of sum coeffs[i] * dX_i, reduced modulo the relations."""
        return self.relation_space().reduce(self._flat(coeffs))

    def to_json(self) -> dict:
        return {
            "n_generators": self.n_generators,
            "relations": [[list(v) for v in row] for row in self.relations],
        }


@dataclass(frozen=True)
class PBasis:
    elements: tuple[Vector, ...]
    verified: bool
    witness: tuple[Vector, ...] = ()

    def __len__(self) -> int:
        return len(self.elements)

    def to_json(self) -> dict:
        return {"elements": [list(x) for x in self.elements], "verified": self.verified}


# -- presentations ------------------------------------------------------------

def _cover(C: FiniteAlgebra) -> tuple[FiniteAlgebra, tuple[Vector, ...]]:
    if C.is_monomial:
        return C, tuple(C.basis())
    if C.ambient is None:
        raise NotTruncatedAmbient("algebra has no monomial presentation")
    return C.ambient.cover, C.ambient.images


def has_cover(C: FiniteAlgebra) -> bool:
    return C.is_monomial or C.ambient is not None


def _gradient(C: FiniteAlgebra, P: FiniteAlgebra, pi: Sequence[Vector], f: Sequence[int]) -> tuple[Vector, ...]:
    """(pi(df/dX_i))_i for f in the cover."""
    F = C.field
    out = []
    for i in range(P.n_vars):
        acc = C.zero()
        for t, ft in enumerate(f):
            alpha = P.exponents[t]
            if ft and alpha[i]:
                c = F.mul(ft, F.from_int(alpha[i]))
                if c:
                    beta = list(alpha)
                    beta[i] -= 1
                    acc = C.add(acc, C.scale(c, pi[P.monomial_index(beta)]))
        out.append(acc)
    return tuple(out)


def differential(C: FiniteAlgebra, x: Sequence[int]) -> tuple[Vector, ...]:
    """Coefficients of dx on the generators dX_i (one lift; unique modulo relations)."""
    P, pi = _cover(C)
    pre = solve_left(list(pi), x, C.field)
    return _gradient(C, P, pi, pre)


def kaehler_presentation(C: FiniteAlgebra, B: Subalgebra | None = None, minimize: bool = True) -> ModulePresentation:
    """Omega_{C/B} on generators dX_1..dX_n of the monomial cover."""
    P, pi = _cover(C)
    F = C.field
    rows: list[tuple[Vector, ...]] = []
    n = P.n_vars
    for i, N in enumerate(P.bounds):
        c = F.from_int(N)
        if c:
            top = [0] * n
            top[i] = N - 1
            v = C.scale(c, pi[P.monomial_index(top)])
            rows.append(tuple(v if j == i else C.zero() for j in range(n)))
    for f in left_kernel_rows(list(pi), C.dim, F):
        rows.append(_gradient(C, P, pi, f))
    if B is not None:
        for b in B.basis:
            rows.append(_gradient(C, P, pi, solve_left(list(pi), b, F)))
    rows = [r for r in rows if any(any(v) for v in r)]
    pres = ModulePresentation(C, n, tuple(rows))
    if minimize and rows:
        pres = _minimize(pres)
    return pres


def _minimize(P: ModulePresentation) -> ModulePresentation:
    """Keep a subset of relations whose classes span N/mN (Nakayama)."""
    C = P.ring
    try:
        m = local_structure(C).maximal_ideal
    except Exception:
        return P
    g, dC = P.n_generators, C.dim
    mN = []
    for row in P.relations:
        for u in m.basis:
            mN.append(P._flat([C.mul_vec(u, v) for v in row]))
    S = Subspace.span(C.field, g * dC, mN)
    keep = []
    for row in P.relations:
        flat = P._flat(row)
        if not S.contains(flat):
            keep.append(row)
            extra = [P._flat([C.mul_vec(C.basis_vector(i), v) for v in row]) for i in range(dC)]
            S = Subspace.span(C.field, g * dC, list(S.basis) + extra)
    return ModulePresentation(C, g, tuple(keep))


# -- Fitting ideals --------------------------------------------------------------

def _det(C: FiniteAlgebra, M: Sequence[Sequence[Vector]]) -> Vector:
    """Determinant over C by permutation expansion."""
    n = len(M)
    F = C.field
    total = C.zero()
    for perm in itertools.permutations(range(n)):
        inversions = sum(1 for a in range(n) for b in range(a + 1, n) if perm[a] > perm[b])
        term = C.unit
        for i, j in enumerate(perm):
            term = C.mul_vec(term, M[i][j])
            if not any(term):
                break
        if any(term):
            total = C.add(total, term if inversions % 2 == 0 else C.scale(F.neg(1), term))
    return total


def fitting_ideals(P: ModulePresentation) -> list[Ideal]:
    """[Fitt_0, ..., Fitt_g]; Fitt_i is generated by the (g-i)-minors."""
    from .algebra import ideal_generate

    C, g = P.ring, P.n_generators
    rel = P.relations
    out = []
    for i in range(g + 1):
        size = g - i
        if size == 0:
            out.append(ideal_generate(C, [C.unit]))
            continue
        minors = []
        for rows in itertools.combinations(range(len(rel)), size):
            for cols in itertools.combinations(range(g), size):
                d = _det(C, [[rel[r][c] for c in cols] for r in rows])
                if any(d):
                    minors.append(d)
        out.append(ideal_generate(C, minors))
    for a, b in zip(out, out[1:]):
        if not b.space.contains_space(a.space):
            raise InternalDisagreement("Fitting ideals are not increasing")
    return out


def _fitting_rank(P: ModulePresentation) -> int | None:
    fitt = fitting_ideals(P)
    for m, I in enumerate(fitt):
        if I.is_unit_ideal:
            if m == 0 or fitt[m - 1].is_zero:
                return m
            return None
    return None  # pragma: no cover - Fitt_g is always the unit ideal


def _nakayama_rank(P: ModulePresentation) -> int | None:
    C, g = P.ring, P.n_generators
    ls = local_structure(C)
    N = P.relation_space()
    mM = [
        tuple(c for j in range(g) for c in (u if j == i else C.zero()))
        for i in range(g)
        for u in ls.maximal_ideal.basis
    ]
    g0_dim = g * C.dim - Subspace.span(C.field, g * C.dim, list(N.basis) + mM).dim
    if g0_dim % ls.residue_dim:
        raise InternalDisagreement("M/mM is not a vector space over the residue field")
    g0 = g0_dim // ls.residue_dim
    return g0 if P.dim_k() == g0 * C.dim else None


def module_free_rank(P: ModulePresentation) -> int | None:
    """Rank if the presented module is free, else None.  Two methods must agree."""
    a = _fitting_rank(P)
    b = _nakayama_rank(P)
    if a != b:
        raise InternalDisagreement(f"Fitting rank {a} but Nakayama rank {b}")
    return a


# -- p-bases ------------------------------------------------------------------------

def _grlex_order(C: FiniteAlgebra) -> list[int]:
    if C.exponents is not None:
        return sorted(range(C.dim), key=lambda i: (sum(C.exponents[i]), C.exponents[i][::-1]))
    return list(range(C.dim))


def candidate_elements(C: FiniteAlgebra, seed: int = 0):
    """Single basis vectors, then e_i + c e_j, then seeded random elements."""
    F = C.field
    order = _grlex_order(C)
    for i in order:
        yield C.basis_vector(i)
    for a, b in itertools.combinations(order, 2):
        for c in range(1, F.q):
            v = [0] * C.dim
            v[a] = 1
            v[b] = c
            yield tuple(v)
    rng = random.Random(seed)
    for _ in range(RANDOM_CANDIDATES):
        yield tuple(rng.randrange(F.q) for _ in range(C.dim))


def monomials(C: FiniteAlgebra, xs: Sequence[Vector]) -> list[Vector]:
    """x^beta for beta in [0, p)^r, in mixed-radix order (first element fastest)."""
    p = C.field.p
    out = [C.unit]
    for x in xs:
        powers = [C.unit]
        for _ in range(p - 1):
            powers.append(C.mul_vec(powers[-1], x))
        out = [C.mul_vec(m, pw) for pw in powers for m in out]
    return out


def is_p_basis(C: FiniteAlgebra, B: Subalgebra, xs: Sequence[Vector]) -> bool:
    """The p^r monomials in xs form a basis of C as a B-module."""
    mons = monomials(C, xs)
    if len(mons) * B.dim != C.dim:
        return False
    rows = [C.mul_vec(b, mnm) for mnm in mons for b in B.basis]
    return rank(rows, C.dim, C.field) == C.dim


def is_exponent_one(B: Subalgebra, C: FiniteAlgebra | None = None) -> bool:
    C = B.parent if C is None else C
    return B.space.contains_space(frobenius_image(C).space)


def find_p_basis(C: FiniteAlgebra, B: Subalgebra, seed: int = 0) -> PBasis | None:
    """A verified p-basis of C over B, or None if Omega_{C/B} is not free."""
    if B.parent is not C:
        raise ValueError("B must be a subalgebra of C")
    if not is_exponent_one(B, C):
        raise NotExponentOne("C^p is not contained in B")
    if B.dim == C.dim:
        return PBasis((), True, (C.unit,))
    p = C.field.p
    if has_cover(C):
        r = module_free_rank(kaehler_presentation(C, B))
        if r is None:
            return None
        chosen = _select_by_differentials(C, B, r, seed)
    else:
        # without a cover the rank is read off the B-module structure
        ratio, rem = divmod(C.dim, B.dim)
        r = 0
        while p**r < ratio:
            r += 1
        if rem or p**r != ratio:
            return None
        chosen = _select_by_growth(C, B, r, seed)
        if chosen is None:
            return None
    if not is_p_basis(C, B, chosen):
        if has_cover(C):
            raise InternalDisagreement("Omega is free but the selected elements are not a p-basis")
        return None
    return PBasis(tuple(chosen), True, tuple(monomials(C, chosen)))


def _select_by_differentials(C: FiniteAlgebra, B: Subalgebra, r: int, seed: int) -> list[Vector]:
    """r elements whose differentials are independent in Omega/m Omega."""
    pres = kaehler_presentation(C, B)
    g = pres.n_generators
    ls = local_structure(C)
    N = pres.relation_space()
    mM = [
        tuple(c for j in range(g) for c in (u if j == i else C.zero()))
        for i in range(g)
        for u in ls.maximal_ideal.basis
    ]
    S = Subspace.span(C.field, g * C.dim, list(N.basis) + mM)
    chosen: list[Vector] = []
    for x in candidate_elements(C, seed):
        if len(chosen) == r:
            break
        dx = pres._flat(differential(C, x))
        if not S.contains(dx):
            # the C-span of dx, so residue-field multiples are also absorbed
            extra = [pres._flat([C.mul_vec(C.basis_vector(i), v) for v in differential(C, x)]) for i in range(C.dim)]
            S = Subspace.span(C.field, g * C.dim, list(S.basis) + extra)
            chosen.append(x)
    if len(chosen) != r:
        raise InternalDisagreement("could not find enough independent differentials")
    return chosen


def _select_by_growth(C: FiniteAlgebra, B: Subalgebra, r: int, seed: int) -> list[Vector] | None:
    """Greedy: keep x when the B-span of the monomials grows by a factor p."""
    chosen: list[Vector] = []
    current = B.dim
    for x in candidate_elements(C, seed):
        if len(chosen) == r:
            break
        mons = monomials(C, chosen + [x])
        rows = [C.mul_vec(b, mnm) for mnm in mons for b in B.basis]
        if rank(rows, C.dim, C.field) == current * C.field.p:
            chosen.append(x)
            current *= C.field.p
    return chosen if len(chosen) == r else None


# -- Harper normal form -------------------------------------------------------------

@dataclass(frozen=True)
class HarperIsomorphism:
    model: FiniteAlgebra
    target: FiniteAlgebra
    generators: tuple[Vector, ...]
    forward: AlgebraMap
    backward: AlgebraMap

    def to_json(self) -> dict:
        return {
            "generators": [list(g) for g in self.generators],
            "forward": [list(v) for v in self.forward.images],
            "backward": [list(v) for v in self.backward.images],
        }


def harper_normal_form(R: FiniteAlgebra) -> HarperIsomorphism:
    """An explicit isomorphism k[X_1..X_n]/(X_i^p) -> R for differentiably simple R."""
    from .derivations import is_diff_simple

    if not is_diff_simple(R):
        raise NotDiffSimple("algebra has a nonzero proper differential ideal")
    ls = local_structure(R)
    if ls.residue_dim != 1:
        raise NonSplitResidueField(f"residue field has degree {ls.residue_dim} over the base field")
    gens = minimal_generators(ls.maximal_ideal)
    p, n = R.field.p, len(gens)
    if R.dim != p**n:
        raise DimensionMismatch(f"dim {R.dim} is not p^{n}")
    for x in gens:
        if any(R.power(x, p)):
            raise DimensionMismatch("a minimal generator has nonzero p-th power")
    model = truncated_algebra(R.field, n)
    images = []
    for alpha in model.exponents:
        v = R.unit
        for x, a in zip(gens, alpha):
            v = R.mul_vec(v, R.power(x, a))
        images.append(v)
    forward = AlgebraMap(model, R, tuple(images))
    if not forward.is_bijective() or not forward.is_multiplicative():
        raise DimensionMismatch("monomials in the generators do not give an isomorphism")
    backward = forward.inverse()
    for i in range(R.dim):
        e = R.basis_vector(i)
        if forward(backward(e)) != e:
            raise InternalDisagreement("round trip failed on the target")  # pragma: no cover
    for i in range(model.dim):
        e = model.basis_vector(i)
        if backward(forward(e)) != e:
            raise InternalDisagreement("round trip failed on the model")  # pragma: no cover
    return HarperIsomorphism(model, R, tuple(gens), forward, backward)
