import pytest

from yuanlab.suites import SUITES, CaseResult, minimal_failure, module_rank, run_suite
from yuanlab.derivations import der_space


@pytest.mark.parametrize("name", [s for s in SUITES if s != "yuan"])
def test_suite_passes(name):
    results = run_suite(name, seed=3)
    assert results
    assert [c.name for c in results if not c.passed] == []


def test_harper_suite_size():
    assert len(run_suite("harper", seed=7)) == 100


def test_seeds_are_reproducible():
    a = [(c.name, c.detail) for c in run_suite("quotients", seed=11)]
    b = [(c.name, c.detail) for c in run_suite("quotients", seed=11)]
    assert a == b


def test_unknown_suite():
    with pytest.raises(KeyError):
        run_suite("nope")


def test_minimal_failure():
    ok = CaseResult("s", "a", "PASS")
    big = CaseResult("s", "b", "FAIL", instance={"dim": 8})
    small = CaseResult("s", "c", "INCONSISTENT", instance={"dim": 4})
    assert minimal_failure([ok]) is None
    assert minimal_failure([ok, big, small]) is small


def test_module_rank(C22):
    assert module_rank(der_space(C22)) == 2
