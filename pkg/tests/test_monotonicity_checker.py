# Copyright (c) 2025 CoReason, Inc.
#
# This software is proprietary and dual-licensed.
# Licensed under the Prosperity Public License 3.0 (the "License").
# A copy of the license is available at https://prosperitylicense.com/versions/3.0.0
# For details, see the LICENSE file.
# Commercial use beyond a 30-day trial requires a separate license.
#
# Source Code: https://github.com/CoReason-AI/rpmono

import pytest
from rpmono.lattice import Reflection, TorusGeometry, VertexSet, build_torus
from rpmono.models import CheckConfig, TwoPointTable
from rpmono.monotonicity_checker import (
    cesaro_sum,
    check_amplification,
    check_axis_dominance,
    check_odd_monotonicity,
    check_partition_lemma,
    check_symmetry,
    combined_axis_function,
    nearest_neighbour_ratio,
    positivity_report,
    random_partition_checks,
    run_checks,
)

CFG = CheckConfig()


@pytest.fixture  # type: ignore
def square() -> TorusGeometry:
    return build_torus(2, 4)


def _planted(g: TorusGeometry) -> TwoPointTable:
    """Constant 0.1 with G(o, (1,1)) = G(o, (3,3)) = 0.2."""
    return TwoPointTable.constant(g, 0.1).with_values({(1, 1): 0.2, (3, 3): 0.2})


def _ring_decay(L: int = 8) -> TwoPointTable:
    g = build_torus(1, L)
    return TwoPointTable.from_function(g, lambda x: 0.5 ** g.axis_distance(x)[0])


def test_constant_table_has_zero_margins(square: TorusGeometry) -> None:
    report = run_checks(TwoPointTable.constant(square, 0.1), CFG, random_q=10)
    assert report.all_passed
    assert report.n_records > 0
    for record in report.by_inequality("axis_dominance") + report.by_inequality("symmetry"):
        assert abs(record.margin) < 1e-15


def test_planted_diagonal_violates_axis_dominance(square: TorusGeometry) -> None:
    report = run_checks(_planted(square), CFG)
    failed = {(tuple(r.location["z"]), r.location["axis"]) for r in report.failures()}
    assert failed == {((1, 1), 0), ((1, 1), 1), ((3, 3), 0), ((3, 3), 1)}
    assert all(r.inequality == "axis_dominance.odd" for r in report.failures())
    for r in report.failures():
        assert abs(r.margin + 0.1) < 1e-12


def test_planted_asymmetry(square: TorusGeometry) -> None:
    t = TwoPointTable.constant(square, 0.1).with_values({(3, 0): 0.2})
    report = check_symmetry(t, CFG)
    assert report.n_failed == 1
    failure = report.failures()[0]
    assert tuple(failure.location["x"]) == (1, 0)
    assert abs(failure.lhs - 0.1) < 1e-12


def test_even_axis_dominance_on_decaying_ring() -> None:
    report = check_axis_dominance(_ring_decay(), CFG)
    even = report.by_inequality("axis_dominance.even")
    assert len(even) == 3
    assert report.all_passed


def test_odd_monotonicity_records() -> None:
    t = _ring_decay()
    plain = check_odd_monotonicity(t, CFG)
    assert plain.n_records == 1
    assert plain.all_passed
    vertex = check_odd_monotonicity(t, CheckConfig(vertex_rp=True))
    assert vertex.n_records == 3
    assert vertex.all_passed
    broken = check_odd_monotonicity(t.with_values({(3,): 0.6, (5,): 0.6}), CFG)
    assert broken.n_failed == 1


def test_odd_monotonicity_needs_vertex_reflections_on_small_tori(square: TorusGeometry) -> None:
    """With L = 4 the only odd step is n = 1."""
    t = TwoPointTable.constant(square, 0.1)
    assert check_odd_monotonicity(t, CFG).n_records == 0
    assert check_odd_monotonicity(t, CheckConfig(vertex_rp=True)).n_records > 0


def test_partition_lemma_reduces_to_axis_dominance(square: TorusGeometry) -> None:
    """Q = {o, z} with the plane between x_1 = 0 and 1 gives G(o, z) <= G(o, e_1)."""
    Q = VertexSet.from_vertices(square, [(0, 0), (1, 1)])
    report = check_partition_lemma(_planted(square), CFG, Q, Reflection.through(1, 0.5))
    assert report.n_records == 1
    record = report.records[0]
    assert abs(record.lhs - 0.2) < 1e-15
    assert abs(record.rhs - 0.1) < 1e-15
    assert not record.passed


def test_random_partitions_on_constant_table(square: TorusGeometry) -> None:
    report = random_partition_checks(TwoPointTable.constant(square, 0.3), CFG, count=25, seed=4)
    assert report.n_records == 25
    assert report.all_passed
    again = random_partition_checks(TwoPointTable.constant(square, 0.3), CFG, count=25, seed=4)
    assert [r.location for r in again.records] == [r.location for r in report.records]


def test_amplification(square: TorusGeometry) -> None:
    t = TwoPointTable.constant(square, 0.1)
    tight = check_amplification(t, CFG, M=0.1)
    assert tight.all_passed
    assert all(abs(r.margin) < 1e-14 for r in tight.records)
    assert all(all(c % 2 == 1 for c in r.location["z"]) for r in tight.records)
    broken = check_amplification(t.with_values({(1, 1): 0.0}), CFG, M=0.1)
    assert broken.n_failed > 0


def test_positivity_report_bounds(square: TorusGeometry) -> None:
    """M = 1 and C~ = 0.95 in d = 2: the eps -> 0 bounds are 0.2 and 0.8."""
    t = TwoPointTable.constant(square, 0.95)
    report = positivity_report(t, CheckConfig(vertex_rp=True), M=1.0, eps=0.25)
    details = report.details["positivity"]
    assert abs(details["C_tilde"] - 0.95) < 1e-14
    assert abs(details["bound_ii_eps0"] - 0.2) < 1e-12
    assert abs(details["bound_iii_eps0"] - 0.8) < 1e-12
    assert not details["vacuous"]["bound_iii_eps0"]
    assert details["nearest_neighbour_ratio"] == 1.0
    assert report.all_passed
    assert report.by_inequality("witness.x")


def test_cesaro_sum_and_axis_function(square: TorusGeometry) -> None:
    t = TwoPointTable.constant(square, 0.25).with_values({(1, 1): 0.5, (1, 0): 0.0})
    mean, err = cesaro_sum(t)
    assert abs(mean - (0.25 * 14 + 0.5) / 16) < 1e-15
    assert err == 0.0
    assert abs(combined_axis_function(t, 0, (1, 1)) - 0.25) < 1e-15


def test_nearest_neighbour_ratio() -> None:
    t = _ring_decay()
    ratio = nearest_neighbour_ratio(t)
    assert ratio is not None
    assert abs(ratio - 0.5) < 1e-15


def test_statistical_slack_absorbs_small_violation(square: TorusGeometry) -> None:
    base = _planted(square)
    noisy = base.model_copy(update={"stderr": [0.05] * square.n_vertices})
    assert not check_axis_dominance(base, CFG).all_passed
    assert check_axis_dominance(noisy, CFG).all_passed
