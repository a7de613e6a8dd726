# Copyright (c) 2025 CoReason, Inc.
#
# This software is proprietary and dual-licensed.
# Licensed under the Prosperity Public License 3.0 (the "License").
# A copy of the license is available at https://prosperitylicense.com/versions/3.0.0
# For details, see the LICENSE file.
# Commercial use beyond a 30-day trial requires a separate license.
#
# Source Code: https://github.com/CoReason-AI/rpmono

from typing import Tuple

import pytest
from rpmono import selftest
from rpmono.selftest import (
    CRITERIA,
    SelfTestReport,
    _Context,
    _Criterion,
    _monotonicity_verdict,
    calibration_criterion,
    desk_monotonicity_criterion,
    gram_criterion,
    infinite_temperature_criterion,
    lemma_suite_criterion,
    rpm_enumeration_criterion,
    rpm_worm_criterion,
    run_selftest,
    spin_algebra_criterion,
    threshold_criterion,
    two_site_criterion,
)


def test_criteria_names_are_unique() -> None:
    names = [c.name for c in CRITERIA]
    assert len(names) == len(set(names))
    assert {c.name for c in CRITERIA if c.slow} == {"desk_monotonicity", "rpm_enumeration", "rpm_worm"}


def test_fast_criteria_pass() -> None:
    ctx = _Context(seed=0)
    for criterion in (spin_algebra_criterion, threshold_criterion, two_site_criterion, gram_criterion):
        passed, detail = criterion(ctx)
        assert passed, detail


def test_calibration_criterion() -> None:
    passed, detail = calibration_criterion(_Context(seed=0))
    assert passed, detail


def test_lemma_suite_uses_collected_tables() -> None:
    ctx = _Context(seed=1)
    passed, detail = infinite_temperature_criterion(ctx)
    assert passed, detail
    assert len(ctx.quantum_tables) == 2
    passed, detail = lemma_suite_criterion(ctx)
    assert passed, detail


def test_report_passed_flag() -> None:
    assert SelfTestReport().passed
    payload = SelfTestReport(quick=True).model_dump(mode="json")
    assert payload["passed"] is True
    assert payload["quick"] is True


def test_two_site_tables_join_the_lemma_suite() -> None:
    ctx = _Context(seed=2)
    passed, detail = two_site_criterion(ctx)
    assert passed, detail
    assert [t.metadata["beta"] for t in ctx.quantum_tables] == [0.5, 1.0, 2.0]
    passed, detail = lemma_suite_criterion(ctx)
    assert passed, detail
    assert detail.startswith("3 tables")


def test_monotonicity_verdict_counts_records() -> None:
    passed, detail = _monotonicity_verdict({"axis_dominance": 48, "odd_monotonicity": 0}, [])
    assert passed
    assert detail == "axis_dominance: 48 records, odd_monotonicity: 0 records; 0 failed"
    passed, detail = _monotonicity_verdict({"axis_dominance": 0, "odd_monotonicity": 0}, [])
    assert not passed
    passed, detail = _monotonicity_verdict({"axis_dominance": 48, "odd_monotonicity": 0}, ["u=0 beta=1 x", "y"])
    assert not passed
    assert detail.endswith("2 failed (u=0 beta=1 x; y)")


def test_quick_selftest_passes() -> None:
    report = run_selftest(quick=True, seed=0)
    assert report.passed, [r for r in report.results if not r.passed]
    assert report.quick
    assert {r.name for r in report.results} == {c.name for c in CRITERIA if not c.slow}


def test_selftest_reports_raising_criterion(monkeypatch: pytest.MonkeyPatch) -> None:
    def broken(ctx: _Context) -> Tuple[bool, str]:
        raise RuntimeError("no engine")

    monkeypatch.setattr(
        selftest,
        "CRITERIA",
        [_Criterion("broken", broken, slow=False), _Criterion("calibration", calibration_criterion, slow=False)],
    )
    report = run_selftest()
    assert not report.passed
    assert report.results[0].detail == "RuntimeError: no engine"
    assert report.results[1].passed


@pytest.mark.slow  # type: ignore
def test_desk_monotonicity_criterion() -> None:
    passed, detail = desk_monotonicity_criterion(_Context(seed=0))
    assert passed, detail
    assert "odd_monotonicity: 0 records" in detail


@pytest.mark.slow  # type: ignore
def test_rpm_criteria_share_the_enumerated_table() -> None:
    ctx = _Context(seed=0)
    passed, detail = rpm_enumeration_criterion(ctx)
    assert passed, detail
    assert len(ctx.rpm_tables) == 1
    _, detail = rpm_worm_criterion(ctx)
    assert detail.startswith("max |delta|")
    # looser than the criterion's 3 sigma gate
    assert float(detail.rsplit(" ", 1)[1]) < 4.5, detail
