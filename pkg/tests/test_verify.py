"""Verification suite wiring: statuses, applicability, overall outcome."""
from oscdecay.verify import run_suite


def by_name(report):
    return {c.name: c for c in report.checks}


def test_quick_suite_on_xy():
    report = run_suite("x*y", suite="quick", seed=0)
    assert report.ok, report.table()
    checks = by_name(report)
    assert checks["l2_decay_slope"].status == "pass"
    assert checks["van_der_corput"].status == "pass"
    assert checks["conjugate_closure"].status == "n/a"  # no nontrivial roots


def test_quick_suite_split_phase_single_failure():
    report = run_suite("x^3 + y^2", suite="quick", seed=0)
    assert not report.ok
    failing = [c for c in report.checks if c.status == "fail"]
    assert len(failing) == 1 and failing[0].name == "analysis_reports"


def test_full_suite_includes_damped_and_atom_checks():
    report = run_suite(
        "x^3*y + x*y^3", suite="full", lambda_max=3000.0, lambda_count=12, seed=0
    )
    checks = by_name(report)
    assert "damped_decay_slope" in checks and "h1e_atoms" in checks
    assert checks["damped_decay_slope"].status == "pass"
    assert checks["critical_l1"].status == "pass"
    assert checks["h1e_atoms"].status == "n/a"  # conjugate pair, not single-root
    assert report.ok, report.table()
