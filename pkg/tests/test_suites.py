import pytest

from avcalc import suites
from avcalc.systems import bundled_system, bundled_system_names


class TestCheckResult:
    def test_pass_line(self):
        r = suites.CheckResult("demo", 1e-12, 1e-9)
        assert r.passed
        assert r.line().startswith("PASS")

    def test_fail_line(self):
        r = suites.CheckResult("demo", 1e-3, 1e-9)
        assert not r.passed
        assert r.line().startswith("FAIL")

    def test_nan_defect_fails(self):
        assert not suites.CheckResult("demo", float("nan"), 1e-9).passed


class TestIndividualSuites:
    def test_newton(self):
        results = suites.newton_suite()
        assert all(r.passed for r in results)

    def test_uniform_field_regression(self):
        results = suites.uniform_field_regression(backend="numpy")
        assert all(r.passed for r in results)

    def test_atlas_suite_circle(self):
        results = suites.atlas_suite(bundled_system("circle"))
        assert results and all(r.passed for r in results)

    def test_consistency_suite(self):
        results = suites.consistency_suite(bundled_system("free"))
        assert results and all(r.passed for r in results)

    def test_suites_skip_when_inputs_missing(self):
        system = bundled_system("free")
        system.curve = None
        assert suites.action_equality_suite(system) == []
        assert suites.variation_suite(system) == []


def test_bundled_names_stable():
    assert bundled_system_names() == [
        "free", "uniform", "charged", "relativistic", "boosted", "circle",
    ]
    with pytest.raises(KeyError):
        bundled_system("nonesuch")
