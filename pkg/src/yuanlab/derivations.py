"""Derivations with values in a module, differential ideals and simplicity.

A derivation is stored as the images D(e_k) of the source basis, written
in the coordinates of the target module.  Modules are given by the action
matrices of the source basis (rows = images of the module basis).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

from .algebra import (
    FiniteAlgebra,
    Ideal,
    Subalgebra,
    algebra_generators,
    count_local_factors,
    frobenius_image,
    local_structure,
)
from .errors import ConstraintMismatch, InternalDisagreement, NotLocal, Unsolvable
from .linalg import (
    Subspace,
    Vector,
    left_kernel_rows,
    nullspace_rows,
    solve_left,
    vadd,
    vcombine,
    vscale,
    vsub,
)


@dataclass(frozen=True, eq=False)
class ModuleAction:
    """A finite module over ``algebra``: action[i] is multiplication by e_i."""

    algebra: FiniteAlgebra
    dim: int
    action: tuple[tuple[Vector, ...], ...]
    regular: bool = False
    basis_index: tuple[int, ...] | None = None

    @classmethod
    def regular_module(cls, A: FiniteAlgebra) -> "ModuleAction":
        return cls(A, A.dim, A.mul, regular=True)

    @classmethod
    def quotient_module(cls, B: Subalgebra) -> "ModuleAction":
        """C/B as a module over B, on the non-pivot coordinates of B."""
        C = B.parent
        Balg, incl = B.algebra
        keep = B.space.complement_indices()
        action = []
        for j in range(Balg.dim):
            b = incl.images[j]
            rows = []
            for t in keep:
                r = B.space.reduce(C.mul_vec(b, C.basis_vector(t)))
                rows.append(tuple(r[i] for i in keep))
            action.append(tuple(rows))
        return cls(Balg, len(keep), tuple(action), basis_index=keep)

    def act(self, a: Sequence[int], m: Sequence[int]) -> Vector:
        F = self.algebra.field
        out = (0,) * self.dim
        for k, c in enumerate(a):
            if c:
                out = vadd(F, out, vscale(F, c, vcombine(F, m, self.action[k], self.dim)))
        return out

    def operator(self, a: Sequence[int]) -> list[Vector]:
        """Rows of the multiplication-by-a operator on the module."""
        return [self.act(a, tuple(1 if i == j else 0 for i in range(self.dim))) for j in range(self.dim)]

    def same_as(self, other: "ModuleAction") -> bool:
        return self.algebra is other.algebra and self.dim == other.dim and self.action == other.action


def _regular_pair(D: "Derivation", E: "Derivation") -> None:
    if D.source is not E.source or not D.module.same_as(E.module):
        raise ConstraintMismatch("derivations have different sources or targets")


@dataclass(frozen=True, eq=False)
class Derivation:
    source: FiniteAlgebra
    module: ModuleAction
    images: tuple[Vector, ...]
    check: bool = field(default=True, repr=False)

    def __post_init__(self):
        if len(self.images) != self.source.dim:
            raise ValueError("one image per basis element is required")
        if self.check and not self.is_leibniz():
            raise ValueError("map does not satisfy the Leibniz rule")

    @classmethod
    def zero(cls, A: FiniteAlgebra, M: ModuleAction | None = None) -> "Derivation":
        M = M or ModuleAction.regular_module(A)
        return cls(A, M, ((0,) * M.dim,) * A.dim, check=False)

    def __call__(self, v: Sequence[int]) -> Vector:
        return vcombine(self.source.field, v, self.images, self.module.dim)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Derivation):
            return NotImplemented
        return self.source is other.source and self.module.same_as(other.module) and self.images == other.images

    def __hash__(self) -> int:
        return hash(self.images)

    def is_zero(self) -> bool:
        return not any(any(v) for v in self.images)

    def is_leibniz(self) -> bool:
        """Leibniz on (generator, basis) pairs plus D(1) = 0; this implies all pairs."""
        A, M = self.source, self.module
        if any(self(A.unit)):
            return False
        for g in algebra_generators(A):
            Dg = self(g)
            for j in range(A.dim):
                lhs = self(A.mul_vec(g, A.basis_vector(j)))
                rhs = vadd(A.field, M.act(g, self.images[j]), M.act(A.basis_vector(j), Dg))
                if lhs != rhs:
                    return False
        return True

    def is_leibniz_all_pairs(self) -> bool:
        A, M = self.source, self.module
        for i in range(A.dim):
            for j in range(i, A.dim):
                lhs = self(A.mul[i][j])
                rhs = vadd(A.field, M.act(A.basis_vector(i), self.images[j]), M.act(A.basis_vector(j), self.images[i]))
                if lhs != rhs:
                    return False
        return not any(self(A.unit))

    # -- linear structure -------------------------------------------------

    def __add__(self, other: "Derivation") -> "Derivation":
        _regular_pair(self, other)
        F = self.source.field
        return Derivation(self.source, self.module, tuple(vadd(F, a, b) for a, b in zip(self.images, other.images)), check=False)

    def __sub__(self, other: "Derivation") -> "Derivation":
        _regular_pair(self, other)
        F = self.source.field
        return Derivation(self.source, self.module, tuple(vsub(F, a, b) for a, b in zip(self.images, other.images)), check=False)

    def scale(self, c: int) -> "Derivation":
        F = self.source.field
        return Derivation(self.source, self.module, tuple(vscale(F, c, a) for a in self.images), check=False)

    def times(self, c: Sequence[int]) -> "Derivation":
        """c * D for c in the source algebra."""
        return Derivation(self.source, self.module, tuple(self.module.act(c, a) for a in self.images), check=False)

    # -- restricted Lie structure (regular module only) ------------------------

    def _require_regular(self) -> None:
        if not self.module.regular or self.module.algebra is not self.source:
            raise ConstraintMismatch("composition needs a derivation of the algebra into itself")

    def compose(self, other: "Derivation") -> tuple[Vector, ...]:
        """Images of self o other (not a derivation in general)."""
        self._require_regular()
        return tuple(self(v) for v in other.images)

    def bracket(self, other: "Derivation") -> "Derivation":
        _regular_pair(self, other)
        self._require_regular()
        F = self.source.field
        ab = self.compose(other)
        ba = other.compose(self)
        return Derivation(self.source, self.module, tuple(vsub(F, x, y) for x, y in zip(ab, ba)))

    def p_power(self) -> "Derivation":
        self._require_regular()
        imgs = self.images
        for _ in range(self.source.field.p - 1):
            imgs = tuple(self(v) for v in imgs)
        return Derivation(self.source, self.module, imgs)

    def kills(self, B: Subalgebra) -> bool:
        return all(not any(self(b)) for b in B.basis)

    def to_json(self) -> dict:
        return {"images": [list(v) for v in self.images]}


@dataclass(frozen=True, eq=False)
class DerivationSpace:
    source: FiniteAlgebra
    module: ModuleAction
    constraint: Subalgebra | None
    basis: tuple[Derivation, ...]

    @property
    def dim(self) -> int:
        return len(self.basis)

    def _flat(self, D: Derivation) -> Vector:
        return tuple(c for v in D.images for c in v)

    def span(self) -> Subspace:
        n = self.source.dim * self.module.dim
        return Subspace.span(self.source.field, n, [self._flat(D) for D in self.basis])

    def contains(self, D: Derivation) -> bool:
        return self.span().contains(self._flat(D))

    def combine(self, coeffs: Sequence[int]) -> Derivation:
        out = Derivation.zero(self.source, self.module)
        for c, D in zip(coeffs, self.basis):
            if c:
                out = out + D.scale(c)
        return out

    def is_submodule(self) -> bool:
        """Closed under multiplication by the source algebra."""
        S = self.span()
        A = self.source
        return all(S.contains(self._flat(D.times(A.basis_vector(i)))) for D in self.basis for i in range(A.dim))

    def is_restricted_lie(self) -> bool:
        S = self.span()
        for i, D in enumerate(self.basis):
            if not S.contains(self._flat(D.p_power())):
                return False
            for E in self.basis[i + 1:]:
                if not S.contains(self._flat(D.bracket(E))):
                    return False
        return True


# -- solving for derivations ----------------------------------------------------

def _general_system(A: FiniteAlgebra, M: ModuleAction, B: Subalgebra | None) -> list[Vector]:
    """Leibniz equations in the unknowns D(e_k)_l, index k*d + l."""
    F = A.field
    d, m = M.dim, A.dim
    n = m * d
    rows: list[list[int]] = []
    for l in range(d):
        r = [0] * n
        for k, c in enumerate(A.unit):
            r[k * d + l] = c
        rows.append(r)
    for g in algebra_generators(A):
        opg = M.operator(g)
        for j in range(m):
            gej = A.mul_vec(g, A.basis_vector(j))
            opj = M.action[j]
            block = [[0] * n for _ in range(d)]
            for k, c in enumerate(gej):
                if c:
                    for l in range(d):
                        block[l][k * d + l] = F.add(block[l][k * d + l], c)
            for lp in range(d):
                for l in range(d):
                    c = opg[lp][l]
                    if c:
                        block[l][j * d + lp] = F.sub(block[l][j * d + lp], c)
            for k, gk in enumerate(g):
                if gk:
                    for lp in range(d):
                        for l in range(d):
                            c = opj[lp][l]
                            if c:
                                block[l][k * d + lp] = F.sub(block[l][k * d + lp], F.mul(gk, c))
            rows.extend(block)
    if B is not None:
        for b in B.basis:
            for l in range(d):
                r = [0] * n
                for k, c in enumerate(b):
                    r[k * d + l] = c
                rows.append(r)
    return [tuple(r) for r in rows]


def _general_solutions(A, M, B) -> list[tuple[Vector, ...]]:
    d = M.dim
    sols = nullspace_rows(_general_system(A, M, B), A.dim * d, A.field)
    return [tuple(tuple(s[k * d:(k + 1) * d]) for k in range(A.dim)) for s in sols]


def _cover_data(A: FiniteAlgebra):
    if A.is_monomial:
        return A, tuple(A.basis())
    return A.ambient.cover, A.ambient.images


def _ambient_solutions(A: FiniteAlgebra, M: ModuleAction, B: Subalgebra | None) -> list[tuple[Vector, ...]]:
    """Solve in the unknowns y_i = D(x_i) using a monomial cover P -> A.

    A derivation of P is free on the y_i subject to N_i x_i^(N_i-1) y_i = 0;
    it descends to A iff it kills ker(P -> A).
    """
    F = A.field
    P, pi = _cover_data(A)
    nv, d = P.n_vars, M.dim
    nunk = nv * d
    ops = [M.operator(pi[t]) for t in range(P.dim)]

    def rows_for(f: Sequence[int]) -> list[list[int]]:
        """d rows over the unknowns giving the coordinates of D'(f)."""
        out = [[0] * nunk for _ in range(d)]
        for t, ft in enumerate(f):
            if not ft:
                continue
            alpha = P.exponents[t]
            for i in range(nv):
                if alpha[i] == 0:
                    continue
                coef = F.mul(ft, F.from_int(alpha[i]))
                if not coef:
                    continue
                beta = list(alpha)
                beta[i] -= 1
                op = ops[P.monomial_index(beta)]
                for lp in range(d):
                    for l in range(d):
                        c = op[lp][l]
                        if c:
                            out[l][i * d + lp] = F.add(out[l][i * d + lp], F.mul(coef, c))
        return out

    eqs: list[list[int]] = []
    for i, N in enumerate(P.bounds):
        if F.from_int(N):
            top = [0] * nv
            top[i] = N - 1
            # D'(x_i^N) computed by the monomial rule, as if the exponent were allowed
            op = ops[P.monomial_index(top)]
            for l in range(d):
                r = [0] * nunk
                for lp in range(d):
                    r[i * d + lp] = F.mul(F.from_int(N), op[lp][l])
                eqs.append(r)
    ker = left_kernel_rows(pi, A.dim, F)
    for f in ker:
        eqs.extend(rows_for(f))
    if B is not None:
        for b in B.basis:
            pre = solve_left(pi, b, F)
            eqs.extend(rows_for(pre))
    sols = nullspace_rows([tuple(r) for r in eqs], nunk, F) if eqs else [
        tuple(1 if j == i else 0 for j in range(nunk)) for i in range(nunk)
    ]
    pre_basis = [solve_left(pi, A.basis_vector(k), F) for k in range(A.dim)]
    maps = [rows_for(pre) for pre in pre_basis]
    out = []
    for y in sols:
        imgs = tuple(
            tuple(sum_row(F, row, y) for row in maps[k]) for k in range(A.dim)
        )
        out.append(imgs)
    return out


def sum_row(F, row: Sequence[int], y: Sequence[int]) -> int:
    acc = 0
    for a, b in zip(row, y):
        if a and b:
            acc = F.add(acc, F.mul(a, b))
    return acc


def der_space(
    C: FiniteAlgebra,
    B: Subalgebra | None = None,
    M: ModuleAction | None = None,
    method: str = "auto",
) -> DerivationSpace:
    """Basis of Der_B(C, M); M defaults to C itself.

    ``method`` is "ambient" (monomial presentation), "general" (Leibniz
    system over the whole basis) or "auto".
    """
    M = M or ModuleAction.regular_module(C)
    if M.algebra is not C:
        raise ConstraintMismatch("module is over a different algebra")
    if B is not None and B.parent is not C:
        raise ConstraintMismatch("constraint subalgebra lives in another algebra")
    if method == "auto":
        method = "ambient" if (C.is_monomial or C.ambient is not None) else "general"
    if method == "ambient":
        if not (C.is_monomial or C.ambient is not None):
            raise ValueError("algebra has no monomial presentation")
        sols = _ambient_solutions(C, M, B)
    elif method == "general":
        sols = _general_solutions(C, M, B)
    else:
        raise ValueError(f"unknown method {method!r}")
    basis = tuple(Derivation(C, M, imgs) for imgs in sols)
    return DerivationSpace(C, M, B, basis)


def kernel_of(ds: DerivationSpace) -> Subalgebra:
    """{x : D(x) = 0 for all D in ds}."""
    A = ds.source
    if not ds.basis:
        return Subalgebra(A, Subspace.full(A.field, A.dim))
    rows = [tuple(c for D in ds.basis for c in D.images[k]) for k in range(A.dim)]
    K = Subspace.span(A.field, A.dim, left_kernel_rows(rows, len(rows[0]), A.field))
    return Subalgebra(A, K)


# -- differential ideals ---------------------------------------------------------

def _preimage_within(V: Subspace, maps: list[list[Vector]], W: Subspace) -> Subspace:
    """{v in V : L(v) in W for every L}, maps given as images of the ambient basis."""
    F, n = V.field, V.ambient_dim
    if V.dim == 0:
        return V
    rows = []
    for v in V.basis:
        r: list[int] = []
        for L in maps:
            r.extend(W.reduce(vcombine(F, v, L, len(L[0]) if L else n)))
        rows.append(tuple(r))
    if not rows[0]:
        return V
    rel = left_kernel_rows(rows, len(rows[0]), F)
    return Subspace.span(F, n, [vcombine(F, c, V.basis, n) for c in rel])


def largest_differential_ideal(R: FiniteAlgebra, ders: DerivationSpace | None = None) -> Ideal:
    """Greatest ideal inside m stable under every derivation of R."""
    m = local_structure(R).maximal_ideal
    ders = ders or der_space(R)
    mult_maps = [list(R.mul[i]) for i in range(R.dim)]
    der_maps = [list(D.images) for D in ders.basis]
    V = m.space
    while True:
        V1 = _preimage_within(V, mult_maps, V)
        V2 = _preimage_within(V1, der_maps, V1) if der_maps else V1
        if V2.dim == V.dim:
            return Ideal(R, V2)
        V = V2


def is_differential_ideal(I: Ideal, ders: DerivationSpace) -> bool:
    return all(I.space.contains(D(v)) for D in ders.basis for v in I.basis)


def find_idempotent(R: FiniteAlgebra) -> Vector | None:
    """A nontrivial idempotent, or None if R has one local factor."""
    F = R.field
    rows = [R.sub(R.power(R.basis_vector(i), F.q), R.basis_vector(i)) for i in range(R.dim)]
    fixed = left_kernel_rows(rows, R.dim, F)
    ones = Subspace.span(F, R.dim, [R.unit])
    for x in fixed:
        if ones.contains(x):
            continue
        for lam in range(F.q):
            y = R.power(R.sub(x, R.scalar(lam)), F.q - 1)
            if any(y) and y != R.unit:
                return y
    return None


@dataclass(frozen=True)
class DiffSimpleResult:
    value: bool
    certificate: Ideal | None
    local: bool
    crosscheck: bool | None = None

    def __bool__(self) -> bool:
        return self.value


def is_diff_simple(R: FiniteAlgebra, crosscheck: bool = True) -> DiffSimpleResult:
    """Whether R has no differential ideals besides 0 and R.

    The certificate is a nonzero proper differential ideal when the answer
    is no.  For local R of exponent one with residue field k the answer is
    compared with the p-basis criterion.
    """
    if count_local_factors(R) != 1:
        e = find_idempotent(R)
        cert = Ideal(R, Subspace.span(R.field, R.dim, R.mult_images(e)))
        return DiffSimpleResult(False, cert, local=False)
    V = largest_differential_ideal(R)
    value = V.dim == 0
    other = None
    if crosscheck:
        other = p_basis_criterion(R)
        if other is not None and other != value:
            raise InternalDisagreement(
                f"differential-ideal test says {value}, p-basis criterion says {other}"
            )
    return DiffSimpleResult(value, None if value else V, local=True, crosscheck=other)


def p_basis_criterion(R: FiniteAlgebra) -> bool | None:
    """Has R a p-basis over k?  None when R is not of exponent one over k."""
    from .algebra import base_field_subalgebra
    from .kaehler import find_p_basis

    ls = local_structure(R)
    if ls.residue_dim != 1 or frobenius_image(R).dim != 1:
        return None
    return find_p_basis(R, base_field_subalgebra(R)) is not None


def lift_derivation(C: FiniteAlgebra, projection, delta: Derivation) -> Derivation:
    """D in Der(C) with pi o D = delta o pi.

    ``projection`` is the AlgebraMap C -> C/I returned by quotient.
    """
    F = C.field
    Q = projection.target
    if delta.source is not Q:
        raise ConstraintMismatch("delta must be a derivation of the quotient")
    ders = der_space(C)
    # unknown coefficients c_t: sum_t c_t pi(D_t(e_k)) = delta(pi(e_k)) for all k
    rows = [tuple(c for k in range(C.dim) for c in projection(D.images[k])) for D in ders.basis]
    target = tuple(c for k in range(C.dim) for c in delta(projection.images[k]))
    if not rows:
        if any(target):
            raise Unsolvable("no derivations to lift to")
        return Derivation.zero(C)
    coeffs = solve_left(rows, target, F)
    if coeffs is None:
        raise Unsolvable("delta does not lift to a derivation of C")
    D = ders.combine(coeffs)
    for k in range(C.dim):
        if projection(D.images[k]) != delta(projection.images[k]):
            raise Unsolvable("lift failed verification")  # pragma: no cover
    return D


def partial(C: FiniteAlgebra, i: int) -> Derivation:
    """The partial derivative d/dx_i of a monomial algebra."""
    F = C.field
    imgs = []
    for alpha in C.exponents:
        v = [0] * C.dim
        if alpha[i]:
            beta = list(alpha)
            beta[i] -= 1
            v[C.monomial_index(beta)] = F.from_int(alpha[i])
        imgs.append(tuple(v))
    return Derivation(C, ModuleAction.regular_module(C), tuple(imgs))


def require_local(R: FiniteAlgebra) -> None:
    if count_local_factors(R) != 1:
        raise NotLocal("algebra is not local")
