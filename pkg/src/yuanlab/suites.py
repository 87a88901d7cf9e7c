"""Invariant suites driven by ``yuanlab check``.

Each suite returns a list of :class:`CaseResult`.  A case fails either as a
property failure (a law does not hold) or as a consistency failure (two
independent computations disagree, i.e. an ``InternalDisagreement``).
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from typing import Callable

from .algebra import (
    FiniteAlgebra,
    Ideal,
    Subalgebra,
    all_ideals,
    all_subalgebras,
    annihilator,
    base_field_subalgebra,
    ideal_generate,
    ideal_product,
    local_structure,
    minimal_generators,
    monomial_algebra,
    quotient,
    random_rebase,
    truncated_algebra,
)
from .correspondence import check_points
from .derivations import (
    DerivationSpace,
    der_space,
    is_diff_simple,
    is_differential_ideal,
    kernel_of,
    lift_derivation,
)
from .errors import InternalDisagreement, YuanlabError
from .galois import differential_rank, extend_generators, fiber_check, is_galois, split_after_base_change
from .gf import make_field
from .kaehler import harper_normal_form, kaehler_presentation, module_free_rank
from .linalg import Subspace
from .yuan import (
    aut_count_formula,
    enumerate_aut,
    enumerate_yuan_points,
    orbit,
    point_count_table,
    tangent_dimension,
)

SUITES = ("diffsimple", "harper", "annihilator", "quotients", "galois", "yuan", "aut")


@dataclass(frozen=True)
class CaseResult:
    suite: str
    name: str
    status: str  # PASS, FAIL or INCONSISTENT
    detail: str = ""
    instance: dict | None = field(default=None, compare=False)

    @property
    def passed(self) -> bool:
        return self.status == "PASS"

    def size(self) -> int:
        inst = self.instance or {}
        return int(inst.get("dim", 0))


def _run(out: list, suite: str, name: str, instance: Callable[[], dict], fn: Callable[[], tuple[bool, str]]) -> None:
    try:
        ok, detail = fn()
        status = "PASS" if ok else "FAIL"
    except InternalDisagreement as exc:
        status, detail = "INCONSISTENT", str(exc)
    except YuanlabError as exc:
        status, detail = "FAIL", f"{type(exc).__name__}: {exc}"
    inst = None if status == "PASS" else instance()
    out.append(CaseResult(suite, name, status, detail, inst))


def _alg_instance(A: FiniteAlgebra, **extra) -> dict:
    return {"dim": A.dim, "algebra": A.to_json(), **extra}


def _exhaustive_diff_simple(R: FiniteAlgebra) -> bool:
    """Brute-force oracle: no nonzero proper ideal is stable under Der(R)."""
    ders = der_space(R, method="general")
    for I in all_ideals(R):
        if I.is_zero or I.is_unit_ideal:
            continue
        if is_differential_ideal(I, ders):
            return False
    return True


def _diffsimple_corpus() -> list[tuple[str, FiniteAlgebra]]:
    F2, F3 = make_field(2), make_field(3)
    C = truncated_algebra(F2, 2)
    corpus = []
    for S in all_subalgebras(C):
        corpus.append((f"F2[x,y]/(x^2,y^2) subalgebra {[C.format(b) for b in S.basis]}", S.algebra[0]))
    for I in all_ideals(C):
        if not I.is_unit_ideal:
            corpus.append((f"F2[x,y]/(x^2,y^2) mod {[C.format(b) for b in I.basis]}", quotient(C, I)[0]))
    corpus.append(("F3[x]/(x^3)", truncated_algebra(F3, 1)))
    corpus.append(("F2[x]/(x^4)", monomial_algebra(F2, [4])))
    corpus.append(("F3[x,y]/(x^3,y^3)", truncated_algebra(F3, 2)))
    corpus.append(("F4[x]/(x^2)", truncated_algebra(make_field(2, 2), 1)))
    return corpus


def suite_diffsimple(seed: int = 0) -> list[CaseResult]:
    out: list[CaseResult] = []
    for name, R in _diffsimple_corpus():
        def check(R=R):
            res = is_diff_simple(R, crosscheck=True)
            if R.dim <= 8:
                oracle = _exhaustive_diff_simple(R)
                if oracle != res.value:
                    raise InternalDisagreement(f"fixed point says {res.value}, exhaustive ideal scan says {oracle}")
            if not res.value and res.local:
                cert = res.certificate
                if cert.is_zero or cert.is_unit_ideal or not is_differential_ideal(cert, der_space(R)):
                    return False, "certificate is not a nonzero proper differential ideal"
            return True, f"value={res.value} crosscheck={res.crosscheck}"

        _run(out, "diffsimple", name, lambda R=R: _alg_instance(R), check)

    def negative():
        R = monomial_algebra(make_field(2), [4])
        res = is_diff_simple(R)
        want = Subspace.span(R.field, R.dim, [R.e("x^2"), R.e("x^3")])
        return (not res.value and res.certificate.space == want), "certificate (x^2)"

    _run(out, "diffsimple", "F2[x]/(x^4) certificate", lambda: {"dim": 4}, negative)
    return out


def suite_harper(seed: int = 0, count: int = 100) -> list[CaseResult]:
    rng = random.Random(seed)
    out: list[CaseResult] = []
    for i in range(count):
        p, n = rng.choice((2, 3)), rng.choice((1, 2))
        R, _ = random_rebase(truncated_algebra(make_field(p), n), rng)

        def check(R=R, n=n):
            iso = harper_normal_form(R)
            if iso.model.dim != R.dim or len(iso.generators) != n:
                return False, "wrong model size"
            for j in range(R.dim):
                e = R.basis_vector(j)
                if iso.forward(iso.backward(e)) != e:
                    return False, "forward o backward is not the identity"
            for j in range(iso.model.dim):
                e = iso.model.basis_vector(j)
                if iso.backward(iso.forward(e)) != e:
                    return False, "backward o forward is not the identity"
            if not iso.forward.is_multiplicative() or not iso.backward.is_multiplicative():
                return False, "not multiplicative"
            return True, f"p={R.field.p} n={n}"

        _run(out, "harper", f"twist {i}", lambda R=R: _alg_instance(R, seed=seed), check)
    return out


def _m_minus_m2(R: FiniteAlgebra):
    m = local_structure(R).maximal_ideal
    m2 = ideal_product(m, m)
    for coeffs in itertools.product(range(R.field.q), repeat=m.dim):
        f = m.space.combine(coeffs)
        if not m2.contains(f):
            yield f


def suite_annihilator(seed: int = 0) -> list[CaseResult]:
    out: list[CaseResult] = []
    cases = [(2, 1), (2, 2), (3, 1)]
    for p, n in cases:
        R = truncated_algebra(make_field(p), n)

        def check(R=R, p=p):
            total = 0
            for f in _m_minus_m2(R):
                total += 1
                want = ideal_generate(R, [R.power(f, p - 1)])
                if annihilator(R, f).space != want.space:
                    return False, f"ann({R.format(f)}) != f^(p-1)R"
            return True, f"{total} elements"

        _run(out, "annihilator", f"p={p} n={n}", lambda R=R: _alg_instance(R), check)
    return out


def _part_of_minimal_generators(R: FiniteAlgebra, I: Ideal) -> bool:
    """I is generated by elements that extend to a minimal generating set of m."""
    m = local_structure(R).maximal_ideal
    m2 = ideal_product(m, m)
    mI = ideal_product(m, I)
    independent = I.space.sum(m2.space).dim - m2.dim
    return I.dim - mI.dim == independent


def suite_quotients(seed: int = 0, lifts: int = 50) -> list[CaseResult]:
    out: list[CaseResult] = []
    for p, n in [(2, 1), (2, 2), (3, 1)]:
        C = truncated_algebra(make_field(p), n)
        for I in all_ideals(C):
            if I.is_unit_ideal:
                continue

            def check(C=C, I=I):
                Q, _ = quotient(C, I)
                lhs = is_diff_simple(Q).value
                rhs = _part_of_minimal_generators(C, I)
                return lhs == rhs, f"diff simple={lhs} generated by minimal generators={rhs}"

            label = "(" + ", ".join(C.format(b) for b in I.basis) + ")"
            _run(out, "quotients", f"p={p} n={n} I={label}", lambda C=C, I=I: _alg_instance(C, ideal=I.to_json()), check)

    rng = random.Random(seed)
    for i in range(lifts):
        p, n = rng.choice((2, 3)), rng.choice((1, 2))
        C = truncated_algebra(make_field(p), n)
        m = local_structure(C).maximal_ideal
        gens = [m.space.combine([rng.randrange(p) for _ in range(m.dim)]) for _ in range(rng.randint(0, 2))]
        I = ideal_generate(C, gens)

        def check(C=C, I=I, rng_state=rng.random()):
            Q, proj = quotient(C, I)
            ds = der_space(Q)
            local = random.Random(rng_state)
            delta = ds.combine([local.randrange(p) for _ in range(ds.dim)])
            D = lift_derivation(C, proj, delta)
            ok = all(proj(D.images[k]) == delta(proj.images[k]) for k in range(C.dim))
            return ok and D.is_leibniz_all_pairs(), f"dim Der(C/I)={ds.dim}"

        _run(out, "quotients", f"lift {i}", lambda C=C, I=I: _alg_instance(C, ideal=I.to_json()), check)
    return out


def _galois_pairs() -> list[tuple[str, Subalgebra]]:
    F2 = make_field(2)
    C = truncated_algebra(F2, 2)
    pairs = [(f"(2,2) B={[C.format(b) for b in S.basis]}", S) for S in all_subalgebras(C)]
    for n, r in [(3, 1), (3, 2)]:
        C3 = truncated_algebra(F2, 3)
        pts = enumerate_yuan_points(C3, r)
        pairs += [(f"(2,3,{r}) point {i}", pt.B) for i, pt in enumerate(pts[:: max(1, len(pts) // 8)])]
    return pairs


def suite_galois(seed: int = 0) -> list[CaseResult]:
    out: list[CaseResult] = []
    for name, B in _galois_pairs():
        C = B.parent

        def check(B=B, C=C):
            cert = is_galois(B, C)
            if cert is None:
                fib = fiber_check(B, C)
                return True, f"not Galois (fiber diff simple={fib})"
            if not fiber_check(B, C):
                return False, "Galois but the fiber is not differentiably simple"
            r = differential_rank(cert, tower_base=base_field_subalgebra(C))
            gens = extend_generators(B, C)
            if len(gens) != len(minimal_generators(local_structure(C).maximal_ideal)):
                return False, "extended generating set has the wrong size"
            return True, f"rank={cert.rank} r={r}"

        _run(out, "galois", name, lambda B=B: _alg_instance(B.parent, base=B.to_json()), check)

    def specific():
        C = truncated_algebra(make_field(2), 2)
        B = Subalgebra(C, Subspace.span(C.field, 4, [C.unit, C.add(C.e("x"), C.e("y"))]))
        cert = is_galois(B)
        return cert is not None and cert.rank == 2 and cert.differential_rank == 1, "span{1, x+y}"

    _run(out, "galois", "span{1, x+y}", lambda: {"dim": 4}, specific)

    def non_field_base():
        C = monomial_algebra(make_field(2), [4])
        A = Subalgebra(C, Subspace.span(C.field, 4, [C.unit, C.e("x^2")]))
        cert = is_galois(A)
        if cert is None or cert.differential_rank != 1:
            return False, "not certified"
        if not fiber_check(A):
            return False, "fiber is not differentiably simple"
        T, z = split_after_base_change(A, C, cert)
        return len(z) == 1 and z.verified, f"split over C (x)_A C of dim {T.algebra.dim}"

    _run(out, "galois", "span{1, x^2} in F2[x]/(x^4)", lambda: {"dim": 4}, non_field_base)
    return out


def module_rank(ds: DerivationSpace) -> int | None:
    """Free rank of a derivation space as a module over its local source, or None."""
    C = ds.source
    m = local_structure(C).maximal_ideal
    mM = Subspace.span(
        C.field,
        C.dim * ds.module.dim,
        [ds._flat(D.times(a)) for D in ds.basis for a in m.basis],
    )
    mu = ds.dim - mM.dim
    return mu if mu * C.dim == ds.dim else None


def correspondence_check(B: Subalgebra, r: int) -> tuple[bool, str]:
    C = B.parent
    ds = der_space(C, B)
    if kernel_of(ds).space != B.space:
        return False, "kernel of Der_B(C) is not B"
    if not ds.is_submodule():
        return False, "Der_B(C) is not a C-module"
    if not ds.is_restricted_lie():
        return False, "Der_B(C) is not a restricted Lie algebra"
    rk = module_rank(ds)
    omega = module_free_rank(kaehler_presentation(C, B))
    if omega != rk:
        raise InternalDisagreement(f"Der_B(C) has free rank {rk} but Omega_(C/B) has {omega}")
    return rk == r, f"free rank {rk}"


def suite_yuan(seed: int = 0) -> list[CaseResult]:
    out: list[CaseResult] = []
    expect = {(2, 2, 1, 1): 6, (2, 2, 1, 2): 20, (2, 2, 2, 1): 1, (2, 2, 0, 1): 1}
    for (p, n, r, e), want in expect.items():
        def check(p=p, n=n, r=r, e=e, want=want):
            rep = point_count_table(p, n, r, p, e)[-1]
            return rep.count == want and rep.status == "OK", f"count={rep.count} status={rep.status}"

        _run(out, "yuan", f"count ({p},{n},{r}) over F_{p**e}", lambda p=p, n=n, r=r, e=e: {"dim": p**n, "p": p, "n": n, "r": r, "e": e}, check)

    for p, n, r in [(2, 2, 1), (2, 3, 2)]:
        C = truncated_algebra(make_field(p), n)
        for i, pt in enumerate(enumerate_yuan_points(C, r)):
            def check(C=C, pt=pt):
                t = tangent_dimension(C, pt)
                if t.status != "OK":
                    return False, str(t.to_json())
                return correspondence_check(pt.B, pt.r)

            _run(out, "yuan", f"({p},{n},{r}) point {i}", lambda C=C, pt=pt: _alg_instance(C, point=pt.to_json()), check)

    for p, n, r in [(2, 3, 1), (3, 2, 1)]:
        def batched(p=p, n=n, r=r):
            C = truncated_algebra(make_field(p), n)
            res = check_points(C, enumerate_yuan_points(C, r))
            bad = [x.label for x in res if not x.ok]
            return not bad, f"{len(res) - len(bad)}/{len(res)} points" + (f", first bad {bad[0]}" if bad else "")

        _run(out, "yuan", f"({p},{n},{r}) correspondence, all points", lambda p=p, n=n, r=r: {"dim": p**n, "p": p, "n": n, "r": r}, batched)
    return out


def suite_aut(seed: int = 0) -> list[CaseResult]:
    out: list[CaseResult] = []
    F2 = make_field(2)
    C = truncated_algebra(F2, 2)
    eps = truncated_algebra(F2, 1)
    cases = [
        ("Bm over F2", dict(r=1, constraints=("B", "m")), "Bm", None),
        ("m over F2", dict(r=1, constraints=("m",)), "m", None),
        ("B over F2[eps]", dict(r=1, R=eps, constraints=("B",)), "B", eps),
        ("Bm over F2[eps]", dict(r=1, R=eps, constraints=("B", "m")), "Bm", eps),
    ]
    for name, kwargs, flavor, R in cases:
        def check(kwargs=kwargs, flavor=flavor, R=R):
            got = len(enumerate_aut(C, **kwargs))
            want = aut_count_formula(2, 2, 1, 2, flavor, R)
            return got == want, f"enumerated {got}, formula {want}"

        _run(out, "aut", name, lambda: {"dim": 4}, check)

    def orbit_check():
        G = enumerate_aut(C, 1, constraints=("m",))
        pts = enumerate_yuan_points(C, 1)
        res = orbit(C, pts[0], G)
        same = sorted(res.orbit) == sorted(pt.B.basis for pt in pts)
        return same and res.index == len(pts), f"index {res.index}, points {len(pts)}"

    _run(out, "aut", "orbit (2,2,1)", lambda: {"dim": 4}, orbit_check)
    return out


RUNNERS: dict[str, Callable[..., list[CaseResult]]] = {
    "diffsimple": suite_diffsimple,
    "harper": suite_harper,
    "annihilator": suite_annihilator,
    "quotients": suite_quotients,
    "galois": suite_galois,
    "yuan": suite_yuan,
    "aut": suite_aut,
}


def run_suite(name: str, seed: int = 0) -> list[CaseResult]:
    if name == "all":
        return [c for s in SUITES for c in RUNNERS[s](seed)]
    if name not in RUNNERS:
        raise KeyError(name)
    return RUNNERS[name](seed)


def minimal_failure(results: list[CaseResult]) -> CaseResult | None:
    bad = [c for c in results if not c.passed]
    return min(bad, key=lambda c: (c.size(), c.suite, c.name)) if bad else None
