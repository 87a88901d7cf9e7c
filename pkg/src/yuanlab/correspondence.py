"""Batched check that Der_B(C) behaves as the tangent data of a Yuan point.

For every point B of a list, verifies over a prime field that
ker Der_B(C) = B and that Der_B(C) is a C-submodule, closed under brackets
and p-th powers, and free of rank r.  All points of one (p, n, r) share
shapes, so the work is stacked and row-reduced in one numpy pass.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .algebra import FiniteAlgebra, local_structure
from .errors import InternalDisagreement
from .linalg import batched_rank, batched_rref
from .yuan import YuanPoint, structure_tensor


@dataclass(frozen=True)
class CorrespondenceResult:
    label: str
    ok: bool
    kernel_ok: bool
    module_ok: bool
    lie_ok: bool
    rank: int | None

    def to_json(self) -> dict:
        return {k: getattr(self, k) for k in ("label", "ok", "kernel_ok", "module_ok", "lie_ok", "rank")}


def leibniz_rows(C: FiniteAlgebra) -> np.ndarray:
    """Equations on X (X[j] = D(e_j)) flattened as k*D + m, reduced to a basis."""
    T = structure_tensor(C)
    D, p = C.dim, C.field.p
    eye = np.eye(D, dtype=np.int64)
    # D(e_i e_j) - e_i D(e_j) - e_j D(e_i), component l
    coef = (
        np.einsum("ijk,ml->ijlkm", T, eye)
        - np.einsum("kj,iml->ijlkm", eye, T)
        - np.einsum("ki,jml->ijlkm", eye, T)
    ).reshape(D**3, D * D)
    red, rk = batched_rref(coef[None] % p, p)
    return red[0, : rk[0]]


def _nullspace(R: np.ndarray, rk: int, p: int) -> tuple[np.ndarray, np.ndarray]:
    """Basis of {v : R v = 0} that is the identity on the returned free columns."""
    R = R[:rk]
    ncols = R.shape[1]
    piv = np.argmax(R != 0, axis=1) if rk else np.zeros(0, dtype=np.int64)
    free = np.setdiff1d(np.arange(ncols), piv)
    out = np.zeros((len(free), ncols), dtype=np.int64)
    out[np.arange(len(free)), free] = 1
    out[:, piv] = (-R[:, free].T) % p
    return out, free


def _coords(v: np.ndarray, basis: np.ndarray, free: np.ndarray, p: int) -> tuple[np.ndarray, np.ndarray]:
    """Coordinates of rows v (N, k, m) in a basis (N, s, m) that is the identity on columns free (N, s).

    Returns the coordinates and a per-point flag saying every row lies in the span.
    """
    c = np.take_along_axis(v, np.broadcast_to(free[:, None, :], v.shape[:2] + free.shape[1:]), axis=2)
    residual = (v - c @ basis) % p
    return c, ~residual.reshape(len(v), -1).any(axis=1)


def check_points(C: FiniteAlgebra, points: Sequence[YuanPoint]) -> list[CorrespondenceResult]:
    F = C.field
    if F.e != 1:
        raise ValueError("the batched check needs a prime field")
    if not points:
        return []
    p, D = F.p, C.dim
    T = structure_tensor(C)
    N = len(points)
    Bs = np.array([pt.B.basis for pt in points], dtype=np.int64)  # (N, d, D)
    d = Bs.shape[1]

    # Der(C), shared by every point; Y is the identity on the columns fY
    L = leibniz_rows(C)
    Y, fY = _nullspace(L, len(L), p)
    g = len(Y)
    Ym = Y.reshape(g, D, D)

    # Der_B(C) in Y coordinates: combinations killing every basis vector of B
    K = np.einsum("ndk,tkl->ndlt", Bs, Ym).reshape(N, d * D, g) % p
    red, rk = batched_rref(K, p)
    if len(set(rk.tolist())) != 1:
        raise InternalDisagreement("points of one family have different derivation dimensions")
    null = [_nullspace(red[i], int(rk[i]), p) for i in range(N)]
    A = np.stack([a for a, _ in null])  # (N, s, g)
    fA = np.stack([f for _, f in null])
    s = A.shape[1]
    X = (A @ Y) % p
    Xm = X.reshape(N, s, D, D)
    fYN = np.broadcast_to(fY, (N, g))

    def in_der_B(v: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        c, ok_y = _coords(v, np.broadcast_to(Y, (N, g, D * D)), fYN, p)
        _, ok_a = _coords(c, A, fA, p)
        return c, ok_y & ok_a

    # kernel of all derivations is exactly B
    H = Xm.transpose(0, 1, 3, 2).reshape(N, s * D, D)
    kills_B = ~(np.einsum("ndk,nskm->ndsm", Bs, Xm) % p).any(axis=(1, 2, 3))
    kernel_ok = kills_B & (D - batched_rank(H, p) == d)

    # c * X for every basis vector c: images X[j] * c = X[j] @ M_c, M_c[a] = e_a * c
    Mc = T.transpose(1, 0, 2)  # Mc[c, a, l] = (e_a e_c)_l
    prods = np.einsum("nsjm,cml->nscjl", Xm, Mc) % p
    _, module_ok = in_der_B(prods.reshape(N, s * D, D * D))

    # brackets [X, Y] = Y X - X Y and p-th powers, as matrices on rows
    iu, ju = np.triu_indices(s, 1)
    XY = np.einsum("nsjk,ntkl->nstjl", Xm, Xm) % p
    br = (XY[:, ju, iu] - XY[:, iu, ju]) % p
    pw = Xm.copy()
    for _ in range(p - 1):
        pw = np.einsum("nsjk,nskl->nsjl", pw, Xm) % p
    _, lie_ok = in_der_B(np.concatenate([br.reshape(N, -1, D * D), pw.reshape(N, s, D * D)], axis=1))

    # free rank: mu = s - dim(m M); free iff mu * dim C = s
    m = np.array(local_structure(C).maximal_ideal.basis, dtype=np.int64)
    mM = np.einsum("nsjm,cml->nscjl", Xm, np.einsum("ca,akl->ckl", m, Mc) % p) % p
    cm, _ = in_der_B(mM.reshape(N, -1, D * D))
    mu = s - batched_rank(cm, p)

    out = []
    for i, pt in enumerate(points):
        rank = int(mu[i]) if mu[i] * D == s else None
        ok = bool(kernel_ok[i] and module_ok[i] and lie_ok[i] and rank == pt.r)
        out.append(CorrespondenceResult(pt.label(), ok, bool(kernel_ok[i]), bool(module_ok[i]), bool(lie_ok[i]), rank))
    return out
