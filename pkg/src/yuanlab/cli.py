"""Command-line driver: ``yuanlab <command> [options]``.

Exit codes: 0 success, 1 property failure, 2 internal consistency failure,
3 resource bound exceeded.  Reports are JSON (sorted keys) or CSV.
"""

from __future__ import annotations

import csv
import io
import json
import sys
from pathlib import Path

import click

from . import __version__
from .algebra import truncated_algebra
from .errors import BadParameters, InternalDisagreement, TooLarge
from .gf import make_field
from .suites import SUITES, minimal_failure, run_suite
from .yuan import (
    CSV_COLUMNS,
    check_params,
    aut_count_formula,
    candidate_count,
    count_report,
    enumerate_aut,
    enumerate_yuan_points,
    max_candidates,
    orbit,
    point_count_table,
    tangent_dimension,
    yuan_dimension,
)

EXIT_OK, EXIT_PROPERTY, EXIT_CONSISTENCY, EXIT_TOO_LARGE = 0, 1, 2, 3

FLAVORS = {"Bm": ("B", "m"), "B": ("B",), "m": ("m",), "none": ()}


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        click.echo(text, nl=False)


def _json(payload) -> str:
    return json.dumps(payload, sort_keys=True, indent=2) + "\n"


def _csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _fail(code: int, msg: str) -> None:
    click.echo(msg, err=True)
    sys.exit(code)


def _setup(p: int, n: int, r: int, q: int | None, e: int):
    """Validate parameters and build C over F_{q^e}."""
    q = p if q is None else q
    try:
        f = check_params(p, n, r, q)
    except BadParameters as exc:
        raise click.BadParameter(str(exc)) from None
    if e < 1:
        raise click.BadParameter("e must be positive")
    return q, truncated_algebra(make_field(p, f * e), n)


def _config(**kw) -> dict:
    return {k: v for k, v in kw.items() if k != "out"}


def params(fn):
    for opt in reversed(
        [
            click.option("--p", "p", type=int, required=True, help="Characteristic."),
            click.option("--n", "n", type=int, required=True, help="Number of variables."),
            click.option("--r", "r", type=int, required=True, help="Differential rank."),
            click.option("--q", "q", type=int, default=None, help="Base field size (default p)."),
            click.option("--e", "e", type=int, default=1, show_default=True, help="Work over F_{q^e}."),
            click.option("--format", "fmt", type=click.Choice(["json", "csv"]), default="json", show_default=True),
            click.option("--out", type=click.Path(dir_okay=False), default=None, help="Write the report here."),
        ]
    ):
        fn = opt(fn)
    return fn


@click.group()
@click.version_option(__version__, prog_name="yuanlab")
def main():
    """Exponent-one Galois extensions of truncated algebras over finite fields."""


@main.command("enumerate")
@params
@click.option("--jobs", type=int, default=1, show_default=True)
def enumerate_cmd(p, n, r, q, e, fmt, out, jobs):
    """List every Yuan point over F_{q^e} with its count report."""
    q, C = _setup(p, n, r, q, e)
    try:
        points = enumerate_yuan_points(C, r, jobs=jobs)
        report = count_report(p, n, r, q, e, tangent=True, points=points)
    except TooLarge as exc:
        _fail(EXIT_TOO_LARGE, f"too large: {exc}")
    except InternalDisagreement as exc:
        _fail(EXIT_CONSISTENCY, f"internal disagreement: {exc}")
    if fmt == "json":
        text = _json(
            {
                "config": _config(command="enumerate", p=p, n=n, r=r, q=q, e=e, jobs=jobs),
                "points": [pt.to_json() for pt in points],
                "report": report.to_json(),
            }
        )
    else:
        rows = [[p, n, r, q, e, i, pt.label(), " ".join("".join(map(str, b)) for b in pt.B.basis)] for i, pt in enumerate(points)]
        text = _csv(["p", "n", "r", "q", "e", "index", "label", "basis"], rows)
    _emit(text, out)
    click.echo(f"{report.count} points, status {report.status}", err=True)
    sys.exit(EXIT_OK if report.status == "OK" else EXIT_CONSISTENCY)


@main.command()
@params
@click.option("--lifts/--no-lifts", default=True, show_default=True, help="Also count first-order lifts.")
def tangent(p, n, r, q, e, fmt, out, lifts):
    """Tangent dimension at every point, by derivations and by lifts."""
    q, C = _setup(p, n, r, q, e)
    try:
        points = enumerate_yuan_points(C, r)
        results = [tangent_dimension(C, pt, lifts=lifts) for pt in points]
    except TooLarge as exc:
        _fail(EXIT_TOO_LARGE, f"too large: {exc}")
    except InternalDisagreement as exc:
        _fail(EXIT_CONSISTENCY, f"internal disagreement: {exc}")
    if fmt == "json":
        text = _json(
            {
                "config": _config(command="tangent", p=p, n=n, r=r, q=q, e=e, lifts=lifts),
                "points": [{"label": pt.label(), **t.to_json()} for pt, t in zip(points, results)],
            }
        )
    else:
        cols = ["derivation_dim", "lift_count", "lift_dim", "formula_dim", "status"]
        rows = [[i, pt.label()] + ["" if t.to_json()[c] is None else t.to_json()[c] for c in cols] for i, (pt, t) in enumerate(zip(points, results))]
        text = _csv(["index", "label"] + cols, rows)
    _emit(text, out)
    dims = sorted({t.derivation_dim for t in results})
    ok = all(t.status == "OK" for t in results)
    click.echo(f"{len(points)} points, tangent dims {dims}, formula {yuan_dimension(p, n, r)}", err=True)
    sys.exit(EXIT_OK if ok else EXIT_CONSISTENCY)


@main.command()
@params
@click.option("--flavor", type=click.Choice(list(FLAVORS)), default="Bm", show_default=True)
@click.option("--ring", type=click.Choice(["field", "dual"]), default="field", show_default=True,
              help="Points over F_q or over F_q[eps]/(eps^2).")
def aut(p, n, r, q, e, fmt, out, flavor, ring):
    """Count automorphisms by brute force and compare with the closed form."""
    q, C = _setup(p, n, r, q, e)
    R = truncated_algebra(C.field, 1) if ring == "dual" else None
    try:
        G = enumerate_aut(C, r, R=R, constraints=FLAVORS[flavor])
    except TooLarge as exc:
        _fail(EXIT_TOO_LARGE, f"too large: {exc}")
    formula = aut_count_formula(p, n, r, q**e, flavor, R)
    status = "OK" if len(G) == formula else "FAILED"
    row = {"count": len(G), "formula": formula, "flavor": flavor, "ring": ring, "status": status}
    if fmt == "json":
        text = _json({"config": _config(command="aut", p=p, n=n, r=r, q=q, e=e), **row})
    else:
        cols = ["p", "n", "r", "q", "e", "flavor", "ring", "count", "formula", "status"]
        vals = {"p": p, "n": n, "r": r, "q": q, "e": e, **row}
        text = _csv(cols, [[vals[c] for c in cols]])
    _emit(text, out)
    click.echo(str(len(G)), err=True)
    sys.exit(EXIT_OK if status == "OK" else EXIT_CONSISTENCY)


@main.command("orbit")
@params
def orbit_cmd(p, n, r, q, e, fmt, out):
    """Orbit of the first point under Aut with the m constraint."""
    q, C = _setup(p, n, r, q, e)
    try:
        points = enumerate_yuan_points(C, r)
        G = enumerate_aut(C, r, constraints=("m",))
        res = orbit(C, points[0], G)
    except TooLarge as exc:
        _fail(EXIT_TOO_LARGE, f"too large: {exc}")
    except InternalDisagreement as exc:
        _fail(EXIT_CONSISTENCY, f"internal disagreement: {exc}")
    transitive = sorted(res.orbit) == sorted(pt.B.basis for pt in points)
    row = {**res.to_json(), "count": len(points), "transitive": transitive}
    if fmt == "json":
        text = _json({"config": _config(command="orbit", p=p, n=n, r=r, q=q, e=e), **row})
    else:
        cols = ["group_order", "stabilizer_order", "index", "orbit_size", "count", "transitive"]
        text = _csv(cols, [[row[c] for c in cols]])
    _emit(text, out)
    # transitivity is recorded, not required
    click.echo(f"index {res.index}, enumerated {len(points)}, transitive {transitive}", err=True)
    sys.exit(EXIT_OK)


@main.command()
@params
@click.option("--e-max", type=int, default=2, show_default=True)
@click.option("--jobs", type=int, default=1, show_default=True)
@click.option("--tangent/--no-tangent", default=True, show_default=True)
def counts(p, n, r, q, e, fmt, out, e_max, jobs, tangent):
    """Point counts over F_{q^e} for e = 1..e-max; rows over the bound are SKIPPED."""
    q, _ = _setup(p, n, r, q, 1)
    try:
        reports = point_count_table(p, n, r, q, e_max, jobs=jobs, tangent=tangent)
    except InternalDisagreement as exc:
        _fail(EXIT_CONSISTENCY, f"internal disagreement: {exc}")
    if fmt == "json":
        text = _json({"config": _config(command="counts", p=p, n=n, r=r, q=q, e_max=e_max, jobs=jobs), "rows": [x.to_json() for x in reports]})
    else:
        text = _csv(CSV_COLUMNS, [x.csv_row() for x in reports])
    _emit(text, out)
    sys.exit(EXIT_CONSISTENCY if any(x.status == "FAILED" for x in reports) else EXIT_OK)


@main.command()
@click.option("--suite", type=click.Choice(list(SUITES) + ["all"]), default="all", show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", type=click.Path(dir_okay=False), default=None, help="Where to dump a failing instance.")
def check(suite, seed, out):
    """Run an invariant suite and print a pass/fail table."""
    results = run_suite(suite, seed)
    width = max(len(c.name) for c in results)
    for c in results:
        click.echo(f"{c.suite:<12} {c.name:<{width}}  {c.status:<12} {c.detail}")
    passed = sum(c.passed for c in results)
    click.echo(f"{passed}/{len(results)} passed")
    bad = minimal_failure(results)
    if bad is None:
        sys.exit(EXIT_OK)
    dump = _json({"suite": bad.suite, "case": bad.name, "status": bad.status, "detail": bad.detail, "seed": seed, "instance": bad.instance})
    click.echo(dump, err=True, nl=False)
    if out:
        Path(out).write_text(dump)
    inconsistent = any(c.status == "INCONSISTENT" for c in results)
    sys.exit(EXIT_CONSISTENCY if inconsistent else EXIT_PROPERTY)


@main.command()
@click.option("--p", "p", type=int, default=None)
@click.option("--n", "n", type=int, default=None)
@click.option("--r", "r", type=int, default=None)
@click.option("--q", "q", type=int, default=None)
def info(p, n, r, q):
    """Version, the candidate guard and, given parameters, predicted sizes."""
    data = {"version": __version__, "max_candidates": max_candidates(), "suites": list(SUITES)}
    if None not in (p, n, r):
        q = p if q is None else q
        try:
            check_params(p, n, r, q)
        except BadParameters as exc:
            raise click.BadParameter(str(exc)) from None
        data.update(
            {
                "params": {"p": p, "n": n, "r": r, "q": q},
                "dimension": yuan_dimension(p, n, r),
                "candidates": candidate_count(p, n, r, q),
                "aut_Bm": aut_count_formula(p, n, r, q, "Bm"),
                "aut_m": aut_count_formula(p, n, r, q, "m"),
            }
        )
        data["predicted_points"] = data["aut_m"] // data["aut_Bm"]
    click.echo(_json(data), nl=False)


if __name__ == "__main__":  # pragma: no cover
    main()
