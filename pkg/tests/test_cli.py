import json

from click.testing import CliRunner

from yuanlab import __version__
from yuanlab.cli import main


def run(*args):
    return CliRunner().invoke(main, [str(a) for a in args])


def test_version():
    res = run("--version")
    assert res.exit_code == 0 and __version__ in res.output


def test_enumerate_json():
    res = run("enumerate", "--p", 2, "--n", 2, "--r", 1, "--q", 2, "--format", "json")
    assert res.exit_code == 0
    data = json.loads(res.stdout)
    assert len(data["points"]) == 6
    assert data["report"]["status"] == "OK"
    assert data["config"]["command"] == "enumerate"


def test_enumerate_top_rank():
    res = run("enumerate", "--p", 2, "--n", 2, "--r", 2, "--q", 2)
    assert res.exit_code == 0
    assert len(json.loads(res.stdout)["points"]) == 1


def test_enumerate_csv():
    res = run("enumerate", "--p", 2, "--n", 2, "--r", 1, "--format", "csv")
    lines = res.stdout.strip().splitlines()
    assert lines[0] == "p,n,r,q,e,index,label,basis"
    assert len(lines) == 7


def test_output_is_reproducible(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for f in (a, b):
        assert run("enumerate", "--p", 2, "--n", 3, "--r", 2, "--jobs", 2, "--out", f).exit_code == 0
    assert a.read_bytes() == b.read_bytes()


def test_too_large_exits_3():
    res = run("enumerate", "--p", 3, "--n", 3, "--r", 1)
    assert res.exit_code == 3


def test_bad_parameters_are_rejected():
    assert run("enumerate", "--p", 4, "--n", 2, "--r", 1).exit_code == 2
    assert run("enumerate", "--p", 2, "--n", 2, "--r", 5).exit_code == 2


def test_aut():
    res = run("aut", "--p", 2, "--n", 2, "--r", 1, "--q", 2, "--flavor", "Bm")
    assert res.exit_code == 0
    data = json.loads(res.stdout)
    assert data["count"] == data["formula"] == 4
    dual = json.loads(run("aut", "--p", 2, "--n", 2, "--r", 1, "--flavor", "B", "--ring", "dual").stdout)
    assert dual["count"] == 256


def test_tangent_small():
    res = run("tangent", "--p", 2, "--n", 2, "--r", 1, "--format", "csv")
    assert res.exit_code == 0
    rows = res.stdout.strip().splitlines()[1:]
    assert len(rows) == 6 and all(",2,4,2,2,OK" in r for r in rows)


def test_orbit_small():
    data = json.loads(run("orbit", "--p", 2, "--n", 2, "--r", 1).stdout)
    assert data["index"] == data["count"] == 6 and data["transitive"]


def test_counts_csv():
    res = run("counts", "--p", 2, "--n", 2, "--r", 1, "--e-max", 2, "--format", "csv")
    assert res.exit_code == 0
    lines = res.stdout.strip().splitlines()
    assert len(lines) == 3
    assert lines[1].split(",")[5] == "6" and lines[2].split(",")[5] == "20"


def test_counts_skip_over_guard(monkeypatch):
    monkeypatch.setenv("YUANLAB_MAX_CANDIDATES", "10")
    res = run("counts", "--p", 2, "--n", 3, "--r", 1, "--e-max", 1)
    assert res.exit_code == 0
    assert json.loads(res.stdout)["rows"][0]["status"] == "SKIPPED"


def test_check_harper():
    res = run("check", "--suite", "harper", "--seed", 7)
    assert res.exit_code == 0
    assert "100/100 passed" in res.output


def test_check_annihilator():
    res = run("check", "--suite", "annihilator")
    assert res.exit_code == 0 and "FAIL" not in res.output


def test_check_failure_dumps_instance(monkeypatch, tmp_path):
    from yuanlab import suites

    def broken(seed=0):
        out = []
        suites._run(out, "fake", "big", lambda: {"dim": 9}, lambda: (False, "no"))
        suites._run(out, "fake", "small", lambda: {"dim": 2}, lambda: (False, "no"))
        return out

    monkeypatch.setitem(suites.RUNNERS, "annihilator", broken)
    dump = tmp_path / "fail.json"
    res = run("check", "--suite", "annihilator", "--out", dump)
    assert res.exit_code == 1
    data = json.loads(dump.read_text())
    assert data["case"] == "small" and data["instance"]["dim"] == 2


def test_check_inconsistency_exits_2(monkeypatch):
    from yuanlab import suites
    from yuanlab.errors import InternalDisagreement

    def broken(seed=0):
        def boom():
            raise InternalDisagreement("paths disagree")

        out = []
        suites._run(out, "fake", "x", lambda: {"dim": 1}, boom)
        return out

    monkeypatch.setitem(suites.RUNNERS, "galois", broken)
    assert run("check", "--suite", "galois").exit_code == 2


def test_info():
    data = json.loads(run("info", "--p", 2, "--n", 3, "--r", 1).stdout)
    assert data["predicted_points"] == 448
    assert data["candidates"] == 11811
