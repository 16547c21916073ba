import pytest

from tedlearn.verify import (
    DEMOS,
    DemoReport,
    dp_overestimation_demo,
    gesl_metric_consistency_demo,
    gesl_worsening_demo,
    negativity_degeneracy_demo,
    run_demos,
    self_identity_demo,
    symmetry_demo,
)


def test_dp_overestimation_values():
    r = dp_overestimation_demo()
    assert r.passed
    assert r.quantities["dp_single"] == 1.0
    assert r.quantities["oracle_single"] == pytest.approx(0.6)
    assert r.quantities["oracle_nested"] == pytest.approx(0.6)


def test_negativity_needs_51_cycles_for_bound_minus_10():
    r = negativity_degeneracy_demo(-10.0)
    assert r.passed
    assert r.quantities["cycles"] == 51
    assert r.quantities["total_cost"] < -10


def test_negativity_bound_already_met():
    r = negativity_degeneracy_demo(1.0)
    assert r.passed and r.quantities["cycles"] == 0


@pytest.mark.parametrize("bound", [-0.5, -3.3, -25.0])
def test_negativity_any_bound(bound):
    assert negativity_degeneracy_demo(bound).passed


def test_self_identity_and_symmetry():
    s = self_identity_demo()
    assert s.passed and s.quantities["d(x(x),x(x))"] == pytest.approx(0.4)
    r = symmetry_demo()
    assert r.passed and r.quantities["d(x,y)"] == pytest.approx(0.3)


def test_worsening_demo_passes():
    r = gesl_worsening_demo(0.1)
    assert r.passed, r.to_text()


@pytest.mark.parametrize("beta", [0.0, 0.3])
def test_worsening_demo_rejects_beta_out_of_range(beta):
    with pytest.raises(ValueError):
        gesl_worsening_demo(beta)


def test_metric_consistency_demo_reports_equal_losses():
    r = gesl_metric_consistency_demo(0.1)
    assert r.passed, r.to_text()
    assert r.quantities["E_pseudo"] == pytest.approx(r.quantities["E_true"], abs=1e-9)


def test_report_text_is_machine_readable():
    r = DemoReport("x", {"a": "b"}, {"v": 1 / 3})
    r.check("holds", True)
    r.check("fails", False)
    text = r.to_text()
    assert "passed: false" in text
    assert "v: 0.333333333333" in text
    assert "- false: fails" in text


def test_run_demos_by_name():
    assert [r.name for r in run_demos("symmetry")] == ["symmetry"]
    with pytest.raises(KeyError):
        run_demos("nope")
    assert set(DEMOS) >= {"dp_overestimation", "negativity_degeneracy", "self_identity", "symmetry"}
