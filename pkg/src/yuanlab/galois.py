"""Exponent-one Galois extensions over local bases.

Over a local artinian base, projective means free, so the Galois test is a
Nakayama count followed by an explicit p-basis.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .algebra import (
    FiniteAlgebra,
    Subalgebra,
    base_field_subalgebra,
    ideal_generate,
    ideal_product,
    local_structure,
    quotient,
    tensor_over,
    TensorProduct,
)
from .derivations import is_diff_simple
from .errors import InternalDisagreement, NotExponentOne, NotLocal, NotLocalBase
from .kaehler import (
    PBasis,
    find_p_basis,
    has_cover,
    is_exponent_one,
    is_p_basis,
    kaehler_presentation,
    module_free_rank,
)
from .linalg import Subspace, Vector

__all__ = [
    "GaloisCertificate",
    "is_exponent_one",
    "is_galois",
    "differential_rank",
    "split_after_base_change",
    "fiber_check",
    "extend_generators",
    "fiber_dimension",
]


@dataclass(frozen=True)
class GaloisCertificate:
    base: Subalgebra
    total: FiniteAlgebra
    rank: int
    differential_rank: int
    p_basis: PBasis
    witness: tuple[Vector, ...]

    def __post_init__(self):
        p = self.total.field.p
        if self.rank != p**self.differential_rank or len(self.p_basis) != self.differential_rank:
            raise InternalDisagreement("certificate fields are inconsistent")
        if len(self.witness) != self.rank or self.rank * self.base.dim != self.total.dim:
            raise InternalDisagreement("witness size does not match the rank")

    def to_json(self) -> dict:
        return {
            "base_basis": [list(b) for b in self.base.basis],
            "rank": self.rank,
            "differential_rank": self.differential_rank,
            "p_basis": [list(x) for x in self.p_basis.elements],
            "witness": [list(w) for w in self.witness],
        }


def _base_local(B: Subalgebra):
    Balg, incl = B.algebra
    try:
        ls = local_structure(Balg)
    except NotLocal as exc:
        raise NotLocalBase(str(exc)) from None
    return ls, [incl(v) for v in ls.maximal_ideal.basis]


def fiber_dimension(B: Subalgebra, C: FiniteAlgebra | None = None) -> int:
    """dim_k C / m_B C."""
    C = B.parent if C is None else C
    _, mB = _base_local(B)
    return C.dim - ideal_generate(C, mB).dim


def is_galois(B: Subalgebra, C: FiniteAlgebra | None = None) -> GaloisCertificate | None:
    """Certificate that C is Galois of exponent one over B, or None."""
    C = B.parent if C is None else C
    if B.parent is not C:
        raise ValueError("B must be a subalgebra of C")
    if not is_exponent_one(B, C):
        raise NotExponentOne("C^p is not contained in B")
    ls, _ = _base_local(B)
    fdim = fiber_dimension(B, C)
    if fdim % ls.residue_dim:
        raise NotLocalBase("fiber is not a vector space over the residue field of B")
    g0 = fdim // ls.residue_dim
    if C.dim != g0 * B.dim:
        return None  # not free
    p, r = C.field.p, 0
    while p**r < g0:
        r += 1
    if p**r != g0:
        return None
    pb = find_p_basis(C, B)
    if pb is None:
        return None
    if len(pb) != r:
        raise InternalDisagreement(f"rank {g0} but a p-basis of size {len(pb)}")
    return GaloisCertificate(B, C, g0, r, pb, pb.witness)


def differential_rank(cert: GaloisCertificate, tower_base: Subalgebra | None = None) -> int:
    """r = |p-basis|, cross-checked against the rank of Omega and tower additivity.

    ``tower_base`` is a subalgebra A of C contained in cert.base; then
    rank(C/A) = rank(C/B) + rank(B/A) is verified.
    """
    C, B = cert.total, cert.base
    r = len(cert.p_basis)
    if has_cover(C):
        omega = module_free_rank(kaehler_presentation(C, B))
        if omega != r:
            raise InternalDisagreement(f"p-basis has {r} elements but Omega has rank {omega}")
    if tower_base is not None:
        if not B.space.contains_space(tower_base.space):
            raise ValueError("tower base must lie inside the certified base")
        total = is_galois(tower_base, C)
        Balg, _ = B.algebra
        inner = Subalgebra(Balg, Subspace.span(C.field, Balg.dim, [B.space.coordinates(a) for a in tower_base.basis]))
        lower = is_galois(inner, Balg)
        if total is None or lower is None:
            raise InternalDisagreement("a tower of Galois extensions failed to be Galois")
        if total.differential_rank != r + lower.differential_rank:
            raise InternalDisagreement(
                f"ranks are not additive: {total.differential_rank} != {r} + {lower.differential_rank}"
            )
    return r


def split_after_base_change(
    A: Subalgebra, C: FiniteAlgebra, cert: GaloisCertificate
) -> tuple[TensorProduct, PBasis]:
    """C (x)_A C over its right factor, with the splitting p-basis x_i (x) 1 - 1 (x) x_i."""
    T = tensor_over(A, C, C)
    TA = T.algebra
    zs = tuple(TA.sub(T.left(x), T.right(x)) for x in cert.p_basis.elements)
    p = C.field.p
    for z in zs:
        if any(TA.power(z, p)):
            raise InternalDisagreement("z^p is not zero")
    right = Subalgebra(TA, Subspace.span(C.field, TA.dim, T.right.images))
    if not is_p_basis(TA, right, zs):
        raise InternalDisagreement("z is not a p-basis over the right factor")
    from .kaehler import monomials

    return T, PBasis(zs, True, tuple(monomials(TA, zs)))


def fiber_check(A: Subalgebra, C: FiniteAlgebra | None = None) -> bool:
    """Is C / m_A C differentiably simple?"""
    C = A.parent if C is None else C
    if not is_exponent_one(A, C):
        raise NotExponentOne("fiber check needs an exponent-one pair")
    _, mA = _base_local(A)
    Q, _ = quotient(C, ideal_generate(C, mA))
    return is_diff_simple(Q).value


def extend_generators(
    B: Subalgebra, C: FiniteAlgebra | None = None, base_generators: Sequence[Vector] | None = None
) -> list[Vector]:
    """Complete minimal generators of m_B to minimal generators of m_C."""
    from .algebra import minimal_generators

    C = B.parent if C is None else C
    Balg, incl = B.algebra
    if base_generators is None:
        base_generators = [incl(v) for v in minimal_generators(local_structure(Balg).maximal_ideal)]
    mC = local_structure(C).maximal_ideal
    mC2 = ideal_product(mC, mC)
    S = Subspace.span(C.field, C.dim, list(mC2.basis) + list(base_generators))
    if S.dim - mC2.dim != len(base_generators):
        raise InternalDisagreement("base generators are dependent modulo m_C^2")
    out = list(base_generators)
    for v in mC.basis:
        if not S.contains(v):
            out.append(v)
            S = Subspace.span(C.field, C.dim, list(S.basis) + [v])
    if len(out) != mC.dim - mC2.dim:
        raise InternalDisagreement("generator count disagrees with dim m/m^2")  # pragma: no cover
    return out


def base_is_galois_over_field(cert: GaloisCertificate) -> GaloisCertificate | None:
    """Is the base itself Galois over k?"""
    Balg, _ = cert.base.algebra
    return is_galois(base_field_subalgebra(Balg), Balg)
