# Copyright (c) 2025 CoReason, Inc.
#
# This software is proprietary and dual-licensed.
# Licensed under the Prosperity Public License 3.0 (the "License").
# A copy of the license is available at https://prosperitylicense.com/versions/3.0.0
# For details, see the LICENSE file.
# Commercial use beyond a 30-day trial requires a separate license.
#
# Source Code: https://github.com/CoReason-AI/rpmono

import math

import pytest
from rpmono.lattice import build_torus
from rpmono.models import (
    CheckRecord,
    CheckReport,
    IRReport,
    LocalStats,
    Provenance,
    ThresholdConvention,
    ThresholdResult,
    TwoPointTable,
)


def test_two_point_table_validation() -> None:
    g = build_torus(1, 4)
    with pytest.raises(ValueError, match="4 vertices"):
        TwoPointTable(geometry=g, provenance=Provenance.DENSE, values=[0.1, 0.2])
    with pytest.raises(ValueError, match="finite"):
        TwoPointTable(geometry=g, provenance=Provenance.DENSE, values=[math.inf, 0.1, 0.1, 0.1])
    with pytest.raises(ValueError, match="every value needs a stderr"):
        TwoPointTable(geometry=g, provenance=Provenance.DENSE, values=[0.1] * 4, stderr=[0.0])
    with pytest.raises(ValueError, match="non-negative"):
        TwoPointTable(geometry=g, provenance=Provenance.DENSE, values=[0.1] * 4, stderr=[0.0, -1.0, 0.0, 0.0])
    with pytest.raises(ValueError, match="p_connect"):
        TwoPointTable(geometry=g, provenance=Provenance.DENSE, values=[0.1] * 4, p_connect=[0.1])


def test_table_accessors() -> None:
    g = build_torus(2, 4)
    t = TwoPointTable.constant(g, 0.5).with_values({(1, 2): 0.25})
    assert t.value((1, 2)) == 0.25
    assert t.value((5, -2)) == 0.25
    assert t.error((1, 2)) == 0.0
    assert not t.has_stderr
    assert t.as_array().shape == (16,)
    assert t.provenance == Provenance.SYNTHETIC


def test_check_record_margin() -> None:
    ok = CheckRecord(inequality="a", location={}, lhs=0.3, rhs=0.2, slack=0.15)
    assert abs(ok.margin + 0.1) < 1e-15
    assert ok.passed
    bad = CheckRecord(inequality="a", location={}, lhs=0.3, rhs=0.2, slack=0.05)
    assert not bad.passed
    assert bad.model_dump()["passed"] is False


def test_check_report_merge_sorts() -> None:
    first = CheckReport.of([CheckRecord(inequality="b", location={"x": 1}, lhs=0.0, rhs=1.0, slack=0.0)])
    second = CheckReport.of(
        [CheckRecord(inequality="a", location={"x": 2}, lhs=1.0, rhs=0.0, slack=0.0)], details={"k": 1}
    )
    merged = CheckReport.merge([first, second])
    assert [r.inequality for r in merged.records] == ["a", "b"]
    assert merged.n_records == 2
    assert merged.n_failed == 1
    assert not merged.all_passed
    assert merged.details == {"k": 1}
    assert len(merged.by_inequality("a")) == 1


def test_threshold_and_infrared_models() -> None:
    result = ThresholdResult(
        min_spin=8.0, margin=1.0, coefficient=64.0, convention=ThresholdConvention.VERTEX_SQ, reference=8.0
    )
    assert result.reproduces_reference is True
    unquoted = ThresholdResult(min_spin=8.0, margin=1.0, coefficient=64.0, convention=ThresholdConvention.EDGE_SQ)
    assert unquoted.reproduces_reference is None
    report = IRReport(d=3, J=1.0, S=1.0, u=0.0, c1_bound=0.5)
    assert abs(report.M - 2.0 / 3.0) < 1e-15
    with pytest.raises(ValueError):
        IRReport(d=3, J=1.0, S=1.0, u=0.5, c1_bound=0.5)


def test_local_stats() -> None:
    empty = LocalStats.empty(3)
    assert empty.u == (0, 0, 0)
    assert empty.unpaired == 0
    assert LocalStats(u=(1, 1), v=(0, 0), K=0, n=2, t=0).unpaired == 2


def test_table_error_columns() -> None:
    g = build_torus(1, 4)
    t = TwoPointTable(
        geometry=g, provenance=Provenance.MONTE_CARLO, values=[1.0, 0.5, 0.4, 0.5], stderr=[0.0, 0.1, 0.2, 0.1]
    )
    assert t.has_stderr
    assert t.error((2,)) == 0.2
    assert t.error((-1,)) == 0.1
    assert list(t.stderr_array()) == [0.0, 0.1, 0.2, 0.1]
    with pytest.raises(ValueError, match="Full matrix"):
        TwoPointTable(geometry=g, provenance=Provenance.DENSE, values=[0.1] * 4, full_matrix=[[0.1] * 4] * 3)
