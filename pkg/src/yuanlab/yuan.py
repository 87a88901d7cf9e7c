"""Rational points of Yuan schemes, tangent spaces, automorphisms and orbits.

C is always the split algebra k[x_1..x_n]/(x_i^p) over k = F_q.  A point
of rank r is a subalgebra B with dim B = p^(n-r) over which C is Galois of
differential rank r.

Most searches have two implementations: a straightforward one built on
the generic algebra layer, and a vectorized numpy one for prime q.  The
tests run both and compare them.
"""

from __future__ import annotations

import itertools
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterator, Sequence

import numpy as np

from .algebra import (
    FiniteAlgebra,
    Subalgebra,
    base_field_subalgebra,
    dual_numbers,
    ideal_product,
    local_structure,
    minimal_generators,
    subalgebra_generate,
    tensor_over,
    truncated_algebra,
)
from .derivations import ModuleAction, der_space
from .errors import BadParameters, InternalDisagreement, TooLarge
from .galois import GaloisCertificate, is_galois
from .gf import is_prime, make_field
from .kaehler import _det, is_p_basis, monomials
from .linalg import Subspace, Vector, batched_rank, batched_rref, left_kernel_rows

DEFAULT_MAX_CANDIDATES = 10**7
CHUNK = 1 << 16


def max_candidates() -> int:
    raw = os.environ.get("YUANLAB_MAX_CANDIDATES")
    return int(raw) if raw else DEFAULT_MAX_CANDIDATES


def _guard(count: int, what: str) -> None:
    limit = max_candidates()
    if count > limit:
        raise TooLarge(f"{what}: {count} candidates exceed the limit {limit}")


# -- small formulas -------------------------------------------------------------

def gaussian_binomial(n: int, k: int, q: int) -> int:
    """Number of k-dimensional subspaces of F_q^n."""
    if k < 0 or k > n:
        return 0
    num = den = 1
    for i in range(k):
        num *= q ** (n - i) - 1
        den *= q ** (i + 1) - 1
    return num // den


def yuan_dimension(p: int, n: int, r: int) -> int:
    return (p**n - p ** (n - r)) * (n - r)


def gl_order(m: int, q: int) -> int:
    out = 1
    for i in range(m):
        out *= q**m - q**i
    return out


def check_params(p: int, n: int, r: int, q: int) -> int:
    if not is_prime(p):
        raise BadParameters(f"{p} is not prime")
    if n < 1 or not 0 <= r <= n:
        raise BadParameters(f"need n >= 1 and 0 <= r <= n, got n={n}, r={r}")
    e, rest = 0, q
    while rest > 1 and rest % p == 0:
        rest //= p
        e += 1
    if rest != 1 or e == 0:
        raise BadParameters(f"q = {q} is not a power of p = {p}")
    return e


def _ring_sizes(R: FiniteAlgebra | None, q: int) -> tuple[int, int, int, int]:
    """(|R|, residue field size, |m_R|, |{c : c^p = 0}|)."""
    if R is None:
        return q, q, 1, 1
    F = R.field
    ls = local_structure(R)
    # c -> c^p is semilinear, so its kernel has as many points as the linear kernel
    rows = [R.power(R.basis_vector(i), F.p) for i in range(R.dim)]
    killed = len(left_kernel_rows(rows, R.dim, F))
    return F.q**R.dim, F.q**ls.residue_dim, F.q ** (R.dim - ls.residue_dim), F.q**killed


def aut_count_formula(p: int, n: int, r: int, q: int, flavor: str = "Bm", R: FiniteAlgebra | None = None) -> int:
    """Closed-form |Aut_{C,flavor}(R)|; R defaults to F_q.

    flavor is one of "Bm", "B", "m", "none".  Over a local test ring R,
    |GL_m(R)| = |GL_m(residue field)| * |m_R|^(m^2).
    """
    check_params(p, n, r, q)
    if flavor not in ("Bm", "B", "m", "none"):
        raise BadParameters(f"unknown flavor {flavor!r}")
    size, res, msize, nil = _ring_sizes(R, q)

    def gl(m):
        return gl_order(m, res) * msize ** (m * m)

    if flavor in ("Bm", "B"):
        t = (p**n - 1) * r + (p ** (n - r) - 1) * (n - r) - r * r - (n - r) ** 2
        count = gl(r) * gl(n - r) * size**t
    else:
        count = gl(n) * size ** (n * (p**n - 1) - n * n)
    if flavor in ("B", "none"):
        count *= nil**n
    return count


# -- numpy helpers ----------------------------------------------------------------

def structure_tensor(C: FiniteAlgebra) -> np.ndarray:
    return np.array(C.mul, dtype=np.int64)


def _mult_matrix(C: FiniteAlgebra, c: Sequence[int]) -> np.ndarray:
    """Rows e_a * c."""
    return np.array(C.mult_images(c), dtype=np.int64)


def _digits(idx: np.ndarray, q: int, f: int) -> np.ndarray:
    if f == 0:
        return np.zeros((len(idx), 0), dtype=np.int64)
    return (idx[:, None] // (q ** np.arange(f, dtype=np.int64))[None, :]) % q


def _batch_mul(X: np.ndarray, Y: np.ndarray, T2: np.ndarray, p: int) -> np.ndarray:
    """Row-wise products in C for stacks X, Y of shape (N, D); T2 = T.reshape(D*D, D)."""
    N, D = X.shape
    outer = (X[:, :, None] * Y[:, None, :]).reshape(N, D * D).astype(np.float64)
    return np.rint(outer @ T2).astype(np.int64) % p


def _in_row_space(vecs: np.ndarray, red: np.ndarray, p: int) -> np.ndarray:
    """vecs (N, k, m) against full-rank reduced echelon stacks red (N, s, m)."""
    piv = np.argmax(red != 0, axis=2)
    coeffs = np.take_along_axis(vecs, np.broadcast_to(piv[:, None, :], vecs.shape[:2] + piv.shape[1:]), axis=2)
    residual = (vecs - coeffs @ red) % p
    return ~residual.any(axis=(1, 2))


# -- points ---------------------------------------------------------------------------

@dataclass(frozen=True)
class YuanPoint:
    B: Subalgebra
    r: int

    @cached_property
    def certificate(self) -> GaloisCertificate:
        cert = is_galois(self.B)
        if cert is None or cert.differential_rank != self.r:
            raise InternalDisagreement("enumerated point is not Galois of the stated rank")
        return cert

    @property
    def key(self) -> tuple[int, ...]:
        return tuple(c for row in self.B.basis for c in row)

    def label(self) -> str:
        C = self.B.parent
        return "span{" + ", ".join(C.format(b) for b in self.B.basis) + "}"

    def to_json(self) -> dict:
        return {"basis": [list(b) for b in self.B.basis], "r": self.r, "label": self.label()}


def _require_split(C: FiniteAlgebra) -> int:
    if not C.is_split_truncated:
        raise BadParameters("C must be the split truncated algebra on its monomial basis")
    return C.n_vars


def _pivot_patterns(D: int, s: int) -> list[tuple[int, ...]]:
    return list(itertools.combinations(range(1, D), s))


def _free_positions(P: Sequence[int], D: int) -> list[tuple[int, int]]:
    pset = set(P)
    return [(k, c) for k, pk in enumerate(P) for c in range(pk + 1, D) if c not in pset]


def candidate_count(p: int, n: int, r: int, q: int) -> int:
    return gaussian_binomial(p**n - 1, p ** (n - r) - 1, q)


def _point_from_rows(C: FiniteAlgebra, rows: Sequence[Sequence[int]], r: int) -> YuanPoint:
    basis = tuple(tuple(int(c) for c in row) for row in rows)
    pivots = tuple(next(i for i, c in enumerate(row) if c) for row in basis)
    return YuanPoint(Subalgebra(C, Subspace(C.field, C.dim, basis, pivots)), r)


def _patterns_numpy(C: FiniteAlgebra, r: int, patterns: Sequence[tuple[int, ...]]) -> list[tuple]:
    p = C.field.p
    q, D = C.field.q, C.dim
    s = p ** (C.n_vars - r) - 1
    T = structure_tensor(C)
    T2 = T.reshape(D * D, D).astype(np.float64)
    Tr = T.reshape(D, D * D).astype(np.float64)
    mC = local_structure(C).maximal_ideal
    mC2 = np.array(ideal_product(mC, mC).basis, dtype=np.int64).reshape(-1, D)
    pairs = [(i, j) for i in range(s) for j in range(i, s)]
    found: list[tuple] = []
    for P in patterns:
        free = _free_positions(P, D)
        f = len(free)
        ks = np.array([k for k, _ in free], dtype=np.int64)
        cs = np.array([c for _, c in free], dtype=np.int64)
        Parr = np.array(P, dtype=np.int64)
        total = q**f
        for start in range(0, total, CHUNK):
            idx = np.arange(start, min(total, start + CHUNK), dtype=np.int64)
            N = len(idx)
            W = np.zeros((N, s, D), dtype=np.int64)
            if s:
                W[:, np.arange(s), Parr] = 1
            if f:
                W[:, ks, cs] = _digits(idx, q, f)
            ok = np.ones(N, dtype=bool)
            for i, j in pairs:
                v = _batch_mul(W[:, i], W[:, j], T2, p)
                v[:, 0] = 0
                v = (v - np.einsum("nk,nkd->nd", v[:, Parr], W)) % p
                ok &= ~v.any(axis=1)
            if not ok.any():
                continue
            Wc = W[ok]
            M = Wc.shape[0]
            if s:
                mbc = (np.rint(Wc.reshape(M * s, D).astype(np.float64) @ Tr).astype(np.int64) % p).reshape(M, s * D, D)
            else:
                mbc = np.zeros((M, 0, D), dtype=np.int64)
            rank1 = batched_rank(mbc, p)
            both = np.concatenate([mbc, np.broadcast_to(mC2, (M,) + mC2.shape)], axis=1)
            rank2 = batched_rank(both, p)
            gal = (D - rank1 == p**r) & ((D - 1) - rank2 == r)
            e0 = np.zeros((1, D), dtype=np.int64)
            e0[0, 0] = 1
            for w in Wc[gal]:
                found.append(tuple(tuple(int(c) for c in row) for row in np.vstack([e0, w])))
    return found


def _patterns_python(C: FiniteAlgebra, r: int, patterns: Sequence[tuple[int, ...]]) -> list[tuple]:
    F, D = C.field, C.dim
    found: list[tuple] = []
    for P in patterns:
        free = _free_positions(P, D)
        for vals in itertools.product(range(F.q), repeat=len(free)):
            rows = [[0] * D for _ in P]
            for k, pk in enumerate(P):
                rows[k][pk] = 1
            for (k, c), v in zip(free, vals):
                rows[k][c] = v
            W = [tuple(row) for row in rows]
            basis = (C.unit,) + tuple(W)
            space = Subspace(F, D, basis, (0,) + tuple(P))
            if not all(space.contains(C.mul_vec(u, v)) for i, u in enumerate(W) for v in W[i:]):
                continue
            cert = is_galois(Subalgebra(C, space))
            if cert is not None and cert.differential_rank == r:
                found.append(basis)
    return found


def _worker(args) -> list[tuple]:
    p, e, n, r, patterns, method = args
    C = truncated_algebra(make_field(p, e), n)
    fn = _patterns_numpy if method == "numpy" else _patterns_python
    return fn(C, r, patterns)


def enumerate_yuan_points(C: FiniteAlgebra, r: int, jobs: int = 1, method: str = "auto") -> list[YuanPoint]:
    """All subalgebras B of C over which C is Galois of differential rank r.

    Candidates are the subspaces k*1 + W with W in reduced echelon form
    inside the span of the nonconstant monomials, walked pivot pattern by
    pattern.  Closure under multiplication is tested first, then the
    Galois condition.  Output is sorted by the canonical basis.
    """
    n = _require_split(C)
    F = C.field
    if not 0 <= r <= n:
        raise BadParameters(f"r must lie in [0, {n}]")
    D, d = C.dim, F.p ** (n - r)
    _guard(gaussian_binomial(D - 1, d - 1, F.q), "Yuan enumeration")
    if method == "auto":
        method = "numpy" if F.e == 1 else "python"
    if method not in ("numpy", "python"):
        raise ValueError(f"unknown method {method!r}")
    if method == "numpy" and F.e != 1:
        raise ValueError("the numpy path needs a prime field")
    patterns = _pivot_patterns(D, d - 1)
    if jobs > 1 and len(patterns) > 1:
        groups = [patterns[i::jobs] for i in range(jobs)]
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            parts = list(ex.map(_worker, [(F.p, F.e, n, r, g, method) for g in groups]))
        rows = [b for part in parts for b in part]
    else:
        fn = _patterns_numpy if method == "numpy" else _patterns_python
        rows = fn(C, r, patterns)
    rows = sorted(set(rows))
    return [_point_from_rows(C, b, r) for b in rows]


def standard_point(C: FiniteAlgebra, r: int) -> YuanPoint:
    """B = k[x_{r+1}, ..., x_n]."""
    n = _require_split(C)
    B = subalgebra_generate(C, [C.variable(i) for i in range(r, n)])
    return YuanPoint(B, r)


# -- tangent spaces -----------------------------------------------------------------

@dataclass(frozen=True)
class TangentResult:
    derivation_dim: int
    lift_count: int | None
    lift_dim: int | None
    formula_dim: int

    @property
    def status(self) -> str:
        ok = self.derivation_dim == self.formula_dim
        if self.lift_count is not None:
            ok = ok and self.lift_dim == self.derivation_dim
        return "OK" if ok else "FAILED"

    def to_json(self) -> dict:
        return {
            "derivation_dim": self.derivation_dim,
            "lift_count": self.lift_count,
            "lift_dim": self.lift_dim,
            "formula_dim": self.formula_dim,
            "status": self.status,
        }


def tangent_dim_derivations(B: Subalgebra) -> int:
    """dim_k Der_k(B, C/B)."""
    Balg, _ = B.algebra
    return der_space(Balg, M=ModuleAction.quotient_module(B)).dim


def _point_generators(point: YuanPoint) -> list[Vector]:
    Balg, incl = point.B.algebra
    return [incl(v) for v in minimal_generators(local_structure(Balg).maximal_ideal)]


def _lift_count_numpy(C: FiniteAlgebra, point: YuanPoint) -> int:
    p, q, D = C.field.p, C.field.q, C.dim
    B = point.B
    d = B.dim
    gens = _point_generators(point)
    s = len(gens)
    comp = np.array(B.space.complement_indices(), dtype=np.int64)
    nc = len(comp)
    f = s * nc
    _guard(q**f, "first-order lifts")
    xs = point.certificate.p_basis.elements
    T = structure_tensor(C)
    T2 = T.reshape(D * D, D).astype(np.float64)
    G = np.array(monomials(C, gens), dtype=np.int64)  # (d, D), mixed radix in the generators
    X = [_mult_matrix(C, m) for m in monomials(C, xs)]
    Mg = [_mult_matrix(C, tuple(int(c) for c in g)) for g in G]
    exps = list(itertools.product(range(p), repeat=s))
    exps = [e[::-1] for e in exps]  # first generator varies fastest
    index = {e: i for i, e in enumerate(exps)}
    N = q**f
    digits = _digits(np.arange(N, dtype=np.int64), q, f)
    H = np.zeros((N, s, D), dtype=np.int64)
    for i in range(s):
        H[:, i, comp] = digits[:, i * nc:(i + 1) * nc]
    V = np.zeros((N, d, D), dtype=np.int64)
    for b, beta in enumerate(exps):
        for i in range(s):
            if beta[i]:
                prev = list(beta)
                prev[i] -= 1
                V[:, b] += beta[i] * (H[:, i] @ Mg[index[tuple(prev)]])
    V %= p
    # The span of U + eps V and eps U is block triangular with U constant, so
    # its reduced echelon form is [[R, W], [0, R]] where R = rref(U) and W is
    # E^-1 V cleared on the pivot columns of R.  Rank is 2d for every lift.
    R, Einv, piv = _rref_with_transform(G, p)
    W = np.einsum("ij,njk->nik", Einv, V) % p
    W = (W - W[:, :, piv] @ R) % p
    # closure: products of the top rows; eps-rows multiply into eps*B.
    ok = np.ones(N, dtype=bool)
    for a in range(d):
        for b in range(a, d):
            ga = np.broadcast_to(G[a], (N, D))
            gb = np.broadcast_to(G[b], (N, D))
            w0 = _batch_mul(G[a:a + 1], G[b:b + 1], T2, p)[0]
            w1 = (_batch_mul(ga, V[:, b], T2, p) + _batch_mul(V[:, a], gb, T2, p)) % p
            c = w0[piv]
            if ((w0 - c @ R) % p).any():
                raise InternalDisagreement("B is not closed under multiplication")
            w1 = (w1 - c @ W) % p
            w1 = (w1 - w1[:, piv] @ R) % p
            ok &= ~w1.any(axis=1)
    # Galois: the rows x^alpha (U + eps V), eps x^alpha U give a block
    # triangular matrix [[A, *], [0, A]], of rank 2D exactly when rank A = D.
    A = np.concatenate([G @ Mx % p for Mx in X], axis=0)
    if _rank_mod_p(A, p) != D:
        ok[:] = False
    canon = W[ok].reshape(int(ok.sum()), -1)
    if not len(canon):
        return 0
    if canon.shape[1] * np.log2(p) < 62:
        keys = canon @ (p ** np.arange(canon.shape[1], dtype=np.int64))
        return int(len(np.unique(keys)))
    return int(len(np.unique(canon, axis=0)))


def _rank_mod_p(M: np.ndarray, p: int) -> int:
    return int(batched_rank(M[None], p)[0])


def _rref_with_transform(G: np.ndarray, p: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """R = E G in reduced echelon form for full-rank G; returns R, E, pivot columns."""
    d, D = G.shape
    red, rk = batched_rref(np.concatenate([G, np.eye(d, dtype=np.int64)], axis=1)[None], p)
    if rk[0] != d or red[0, d - 1, :D].sum() == 0:
        raise InternalDisagreement("point basis is not independent")
    R, E = red[0, :, :D], red[0, :, D:]
    return R, E, np.argmax(R != 0, axis=1)


def _lift_count_python(C: FiniteAlgebra, point: YuanPoint) -> int:
    F, D = C.field, C.dim
    B = point.B
    d = B.dim
    gens = _point_generators(point)
    comp = B.space.complement_indices()
    _guard(F.q ** (len(gens) * len(comp)), "first-order lifts")
    xs = point.certificate.p_basis.elements
    eps_ring = dual_numbers(F)
    TP = tensor_over(base_field_subalgebra(C), C, eps_ring)
    Ce = TP.algebra
    eps = TP.right(eps_ring.e("eps"))
    xs_e = [TP.left(x) for x in xs]
    seen = set()
    for vals in itertools.product(range(F.q), repeat=len(gens) * len(comp)):
        lifted = []
        for i, g in enumerate(gens):
            h = [0] * D
            for t, c in enumerate(comp):
                h[c] = vals[i * len(comp) + t]
            lifted.append(Ce.add(TP.left(g), Ce.mul_vec(eps, TP.left(tuple(h)))))
        mons = monomials(Ce, lifted)
        span = Subspace.span(F, Ce.dim, mons + [Ce.mul_vec(eps, m) for m in mons])
        if span.dim != 2 * d:
            continue
        try:
            Bp = Subalgebra(Ce, span)
        except ValueError:
            continue
        if not is_p_basis(Ce, Bp, xs_e):
            continue
        seen.add(span.basis)
    return len(seen)


def tangent_lift_count(C: FiniteAlgebra, point: YuanPoint, method: str = "auto") -> int:
    """Number of F_q[eps]-points of the Yuan scheme reducing to the given point."""
    if method == "auto":
        method = "numpy" if C.field.e == 1 else "python"
    if method == "numpy":
        return _lift_count_numpy(C, point)
    return _lift_count_python(C, point)


def _log(count: int, q: int) -> int | None:
    e, v = 0, 1
    while v < count:
        v *= q
        e += 1
    return e if v == count else None


def tangent_dimension(C: FiniteAlgebra, point: YuanPoint, lifts: bool = True, method: str = "auto") -> TangentResult:
    n = _require_split(C)
    a = tangent_dim_derivations(point.B)
    count = dim_b = None
    if lifts:
        count = tangent_lift_count(C, point, method)
        dim_b = _log(count, C.field.q)
    return TangentResult(a, count, dim_b, yuan_dimension(C.field.p, n, point.r))


# -- automorphisms ----------------------------------------------------------------------

@dataclass(frozen=True)
class AutPoint:
    images: tuple[Vector, ...]
    coefficients: tuple[tuple[Vector, ...], ...]
    preserves_B: bool | None
    preserves_m: bool

    def to_json(self) -> dict:
        return {
            "images": [list(f) for f in self.images],
            "coefficients": [[list(c) for c in row] for row in self.coefficients],
            "preserves_B": self.preserves_B,
            "preserves_m": self.preserves_m,
        }


def _in_B_shape(C: FiniteAlgebra, r: int, a: int) -> bool:
    return all(C.exponents[a][j] == 0 for j in range(r))


@dataclass(frozen=True, eq=False)
class AutGroup:
    """Enumerated automorphisms; numpy-backed groups keep only the coefficient array."""

    C: FiniteAlgebra
    R: FiniteAlgebra | None
    r: int | None
    constraints: frozenset
    coeffs: np.ndarray | None = None
    points: tuple[AutPoint, ...] = ()
    rejected: int = 0

    def __len__(self) -> int:
        return len(self.coeffs) if self.coeffs is not None else len(self.points)

    @property
    def order(self) -> int:
        return len(self)

    def __iter__(self) -> Iterator[AutPoint]:
        if self.coeffs is None:
            yield from self.points
            return
        C = self.C
        for row in self.coeffs:
            f = tuple(tuple(int(c) for c in fi) for fi in row)
            pm = all(fi[0] == 0 for fi in f)
            pb = None
            if self.r is not None:
                pb = all(_in_B_shape(C, self.r, a) for fi in f[self.r:] for a, c in enumerate(fi) if c)
            yield AutPoint(f, tuple(tuple((c,) for c in fi) for fi in f), pb, pm)

    def image_matrices(self, start: int = 0, stop: int | None = None) -> np.ndarray:
        """tau(x^a) for every monomial a, shape (N, D, D); numpy groups only."""
        return _tau_images(self.C, self.coeffs[start:stop])


def _mult_ops(C: FiniteAlgebra, F_: np.ndarray) -> np.ndarray:
    """Multiplication-by-f matrices for a stack of elements (N, D) -> (N, D, D)."""
    T = structure_tensor(C)
    D = C.dim
    Tb = T.transpose(1, 0, 2).reshape(D, D * D).astype(np.float64)
    return np.rint(F_.astype(np.float64) @ Tb).reshape(len(F_), D, D)


def _tau_images(C: FiniteAlgebra, coeffs: np.ndarray, ops: list[np.ndarray] | None = None) -> np.ndarray:
    p, D, n = C.field.p, C.dim, C.n_vars
    N = len(coeffs)
    if ops is None:
        ops = [_mult_ops(C, coeffs[:, i, :]) for i in range(n)]
    img = np.zeros((N, D, D), dtype=np.float64)
    img[:, 0, 0] = 1
    for a in range(1, D):
        j = next(j for j in range(n) if C.exponents[a][j])
        prev = a - p**j
        img[:, a] = np.fmod((img[:, prev, None, :] @ ops[j])[:, 0], p)
    return img.astype(np.int64)


def _multiplicative_mask(C: FiniteAlgebra, coeffs: np.ndarray) -> np.ndarray:
    """tau(x_i * x^a) == f_i * tau(x^a) for all i, a; this forces multiplicativity everywhere."""
    p, D, n = C.field.p, C.dim, C.n_vars
    ops = [_mult_ops(C, coeffs[:, i, :]) for i in range(n)]
    img = _tau_images(C, coeffs, ops).astype(np.float64)
    ok = np.ones(len(coeffs), dtype=bool)
    for i in range(n):
        prod = np.fmod(img @ ops[i], p).astype(np.int64)
        expect = np.zeros_like(prod)
        for a in range(D):
            if C.exponents[a][i] + 1 < p:
                expect[:, a] = img[:, a + p**i]
        ok &= (prod == expect).all(axis=(1, 2))
    return ok


def _relations_mask(C: FiniteAlgebra, coeffs: np.ndarray) -> np.ndarray:
    """f_i^p == 0 for every i: the substitution x_i -> f_i respects the defining relations."""
    p, D = C.field.p, C.dim
    T2 = structure_tensor(C).reshape(D * D, D).astype(np.float64)
    ok = np.ones(len(coeffs), dtype=bool)
    for i in range(C.n_vars):
        f = coeffs[:, i, :]
        v = f
        for _ in range(p - 1):
            v = _batch_mul(v, f, T2, p)
        ok &= ~v.any(axis=1)
    return ok


def _aut_positions(C: FiniteAlgebra, r: int | None, constraints: frozenset, constant_ok: bool) -> list[list[int]]:
    n = C.n_vars
    out = []
    for i in range(n):
        allowed = []
        for a in range(C.dim):
            if a == 0 and ("m" in constraints or not constant_ok):
                continue
            if "B" in constraints and i >= r and not _in_B_shape(C, r, a):
                continue
            allowed.append(a)
        out.append(allowed)
    return out


def _enumerate_aut_numpy(C: FiniteAlgebra, r: int | None, constraints: frozenset) -> AutGroup:
    p, D, n = C.field.p, C.dim, C.n_vars
    positions = _aut_positions(C, r, constraints, constant_ok=False)
    flat = [(i, a) for i, al in enumerate(positions) for a in al]
    f = len(flat)
    _guard(p**f, "automorphism enumeration")
    ii = np.array([i for i, _ in flat], dtype=np.int64)
    aa = np.array([a for _, a in flat], dtype=np.int64)
    lin = [p**j for j in range(n)]
    kept, rejected = [], 0
    for start in range(0, p**f, CHUNK * 4):
        idx = np.arange(start, min(p**f, start + CHUNK * 4), dtype=np.int64)
        coeffs = np.zeros((len(idx), n, D), dtype=np.int64)
        coeffs[:, ii, aa] = _digits(idx, p, f)
        L = coeffs[:, :, lin]
        inv = batched_rank(L, p) == n
        cand = coeffs[inv]
        if len(cand):
            mult = _relations_mask(C, cand)
            rejected += int((~mult).sum())
            kept.append(cand[mult].astype(np.uint8))
    arr = np.concatenate(kept) if kept else np.zeros((0, n, D), dtype=np.uint8)
    return AutGroup(C, None, r, constraints, coeffs=arr, rejected=rejected)


def _enumerate_aut_python(C: FiniteAlgebra, R: FiniteAlgebra, r: int | None, constraints: frozenset) -> AutGroup:
    F = C.field
    n, D = C.n_vars, C.dim
    TP = tensor_over(base_field_subalgebra(C), C, R)
    T = TP.algebra
    ring_elems = [tuple(v) for v in itertools.product(range(F.q), repeat=R.dim)]
    ring_elems = [tuple(reversed(v)) for v in ring_elems]
    nil = [c for c in ring_elems if not any(R.power(c, F.p))]
    positions = _aut_positions(C, r, constraints, constant_ok=True)
    choices = []
    for i, allowed in enumerate(positions):
        for a in allowed:
            choices.append((i, a, nil if a == 0 else ring_elems))
    total = 1
    for _, _, ch in choices:
        total *= len(ch)
    _guard(total, "automorphism enumeration")
    lin_index = [C.monomial_index(tuple(1 if j == k else 0 for k in range(n))) for j in range(n)]
    left_mon = [TP.left(C.basis_vector(a)) for a in range(D)]
    points = []
    rejected = 0
    for combo in itertools.product(*[ch for _, _, ch in choices]):
        coef = [[R.zero() for _ in range(D)] for _ in range(n)]
        for (i, a, _), c in zip(choices, combo):
            coef[i][a] = c
        det = _det(R, [[coef[i][lin_index[j]] for j in range(n)] for i in range(n)])
        if not R.is_unit(det):
            continue
        fs = []
        for i in range(n):
            v = T.zero()
            for a in range(D):
                if any(coef[i][a]):
                    v = T.add(v, T.mul_vec(TP.right(coef[i][a]), left_mon[a]))
            fs.append(v)
        if not _check_generic(C, R, TP, fs):
            rejected += 1
            continue
        pm = all(not any(coef[i][0]) for i in range(n))
        pb = None
        if r is not None:
            pb = all(_in_B_shape(C, r, a) for i in range(r, n) for a in range(D) if any(coef[i][a]))
        points.append(AutPoint(tuple(fs), tuple(tuple(row) for row in coef), pb, pm))
    return AutGroup(C, R, r, constraints, points=tuple(points), rejected=rejected)


def tau_on_tensor(C: FiniteAlgebra, R: FiniteAlgebra, TP, fs: Sequence[Vector]) -> list[Vector]:
    """Images of the tensor basis x^a (x) r_t under the R-linear map x_i -> f_i."""
    T = TP.algebra
    n, D = C.n_vars, C.dim
    mon = [T.unit]
    for a in range(1, D):
        j = next(j for j in range(n) if C.exponents[a][j])
        mon.append(T.mul_vec(mon[a - C.field.p**j], fs[j]))
    out = []
    for a in range(D):
        for t in range(R.dim):
            out.append(T.mul_vec(mon[a], TP.right(R.basis_vector(t))))
    return out


def _check_generic(C, R, TP, fs) -> bool:
    T = TP.algebra
    imgs = tau_on_tensor(C, R, TP, fs)

    def tau(v):
        return T.combine(v, imgs)

    for i in range(C.n_vars):
        xi = TP.left(C.variable(i))
        for b in range(T.dim):
            if tau(T.mul_vec(xi, T.basis_vector(b))) != T.mul_vec(fs[i], imgs[b]):
                return False
    return True


def enumerate_aut(
    C: FiniteAlgebra,
    r: int | None = None,
    R: FiniteAlgebra | None = None,
    constraints: Sequence[str] = (),
    method: str = "auto",
) -> AutGroup:
    """Automorphisms x_i -> f_i of C (x) R over R, subject to the shape constraints.

    "m": no constant terms.  "B": f_i lies in B (x) R for i > r, where B is
    k[x_{r+1}..x_n].  Bijectivity is decided by the linear part and every
    survivor is checked to be multiplicative.
    """
    _require_split(C)
    cons = frozenset(constraints)
    if not cons <= {"B", "m"}:
        raise BadParameters(f"unknown constraints {sorted(cons)}")
    if "B" in cons and r is None:
        raise BadParameters("the B constraint needs r")
    if method == "auto":
        method = "numpy" if R is None and C.field.e == 1 else "python"
    if method == "numpy":
        if R is not None or C.field.e != 1:
            raise ValueError("the numpy path covers R = F_p only")
        return _enumerate_aut_numpy(C, r, cons)
    if R is None:
        R = truncated_algebra(C.field, 0)
    return _enumerate_aut_python(C, R, r, cons)


# -- orbits ---------------------------------------------------------------------------------

@dataclass(frozen=True)
class OrbitResult:
    orbit: tuple[tuple[Vector, ...], ...]
    stabilizer_order: int
    group_order: int

    @property
    def index(self) -> int:
        return self.group_order // self.stabilizer_order

    def to_json(self) -> dict:
        return {
            "orbit_size": len(self.orbit),
            "stabilizer_order": self.stabilizer_order,
            "group_order": self.group_order,
            "index": self.index,
        }


def orbit(C: FiniteAlgebra, seed: YuanPoint | Subalgebra, group: AutGroup) -> OrbitResult:
    """Orbit of a subalgebra under an enumerated group over R = F_q."""
    B = seed.B if isinstance(seed, YuanPoint) else seed
    p, D = C.field.p, C.dim
    base = B.basis
    seen: set = set()
    stab = 0
    if group.coeffs is not None:
        Bm = np.array(base, dtype=np.float64)
        target = np.array(base, dtype=np.int64).reshape(-1)
        # rows packed as base-p integers when they fit in int64
        packable = p ** len(target) < 2**62
        weights = p ** np.arange(len(target), dtype=np.int64) if packable else None
        codes: list[np.ndarray] = []
        for start in range(0, len(group), CHUNK):
            img = group.image_matrices(start, start + CHUNK).astype(np.float64)
            moved = np.fmod(np.einsum("ja,nad->njd", Bm, img), p).astype(np.int64)
            red, _ = batched_rref(moved, p)
            flat = red.reshape(len(red), -1)
            stab += int((flat == target).all(axis=1).sum())
            if packable:
                codes.append(np.unique(flat @ weights))
            else:
                for row in np.unique(flat, axis=0):
                    seen.add(tuple(int(c) for c in row))
        if packable:
            for code in np.unique(np.concatenate(codes)).tolist():
                seen.add(tuple((code // p**k) % p for k in range(len(target))))
        d = len(base)
        orb = tuple(sorted(tuple(tuple(row[i * D:(i + 1) * D]) for i in range(d)) for row in seen))
    else:
        if group.R is not None and group.R.dim != 1:
            raise ValueError("orbits are computed over R = F_q")
        TP = tensor_over(base_field_subalgebra(C), C, group.R)
        T = TP.algebra
        for aut in group:
            imgs = tau_on_tensor(C, group.R, TP, aut.images)
            moved = [T.combine(TP.left(b), imgs) for b in base]
            span = Subspace.span(C.field, C.dim, moved)
            seen.add(span.basis)
            if span.basis == base:
                stab += 1
        orb = tuple(sorted(seen))
    res = OrbitResult(orb, stab, len(group))
    if stab == 0 or len(orb) * stab != len(group):
        raise InternalDisagreement("orbit-stabilizer count failed")
    return res


# -- count tables -------------------------------------------------------------------------

CSV_COLUMNS = ("p", "n", "r", "q", "e", "count", "orbit_predicted", "tangent_dim", "formula_dim", "status", "ratio")


@dataclass(frozen=True)
class CountReport:
    p: int
    n: int
    r: int
    q: int
    e: int
    count: int | None
    orbit_predicted: int | None
    tangent_dim: int | None
    formula_dim: int
    status: str
    ratio: float | None = field(default=None)

    def to_json(self) -> dict:
        return {c: getattr(self, c) for c in CSV_COLUMNS}

    def csv_row(self) -> list[str]:
        return ["" if getattr(self, c) is None else str(getattr(self, c)) for c in CSV_COLUMNS]


def count_report(
    p: int,
    n: int,
    r: int,
    q: int,
    e: int,
    jobs: int = 1,
    tangent: bool = True,
    points: Sequence[YuanPoint] | None = None,
) -> CountReport:
    """Count row for F_{q^e}; pass ``points`` to reuse an enumeration already done."""
    f = check_params(p, n, r, q)
    Q = q**e
    fdim = yuan_dimension(p, n, r)
    predicted = aut_count_formula(p, n, r, Q, "m") // aut_count_formula(p, n, r, Q, "Bm")
    if points is None:
        try:
            C = truncated_algebra(make_field(p, f * e), n)
            points = enumerate_yuan_points(C, r, jobs=jobs)
        except TooLarge:
            return CountReport(p, n, r, q, e, None, predicted, None, fdim, "SKIPPED")
    count = len(points)
    tdim = None
    if tangent:
        dims = {tangent_dim_derivations(pt.B) for pt in points}
        tdim = dims.pop() if len(dims) == 1 else None
    ok = count == predicted and (not tangent or tdim == fdim)
    if (p, n, r) == (2, 2, 1):
        ok = ok and count == Q * Q + Q
    return CountReport(p, n, r, q, e, count, predicted, tdim, fdim, "OK" if ok else "FAILED", count / Q**fdim)


def point_count_table(p: int, n: int, r: int, q: int, e_max: int, jobs: int = 1, tangent: bool = True) -> list[CountReport]:
    return [count_report(p, n, r, q, e, jobs=jobs, tangent=tangent) for e in range(1, e_max + 1)]
