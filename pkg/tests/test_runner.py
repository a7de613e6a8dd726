# Copyright (c) 2025 CoReason, Inc.
#
# This software is proprietary and dual-licensed.
# Licensed under the Prosperity Public License 3.0 (the "License").
# A copy of the license is available at https://prosperitylicense.com/versions/3.0.0
# For details, see the LICENSE file.
# Commercial use beyond a 30-day trial requires a separate license.
#
# Source Code: https://github.com/CoReason-AI/rpmono

import json
from pathlib import Path

import pytest
from rpmono.exceptions import CapacityExceededError
from rpmono.lattice import build_torus
from rpmono.models import CheckRecord, CheckReport, Provenance, TwoPointTable
from rpmono.runner import (
    EXIT_INEQUALITY,
    EXIT_OK,
    check_exit_code,
    infrared_reports,
    run_check,
    run_infrared,
    run_quantum,
    run_rpm,
)
from rpmono.settings import resolve_config
from rpmono.tables import read_table, side_file, write_table


def test_run_quantum_dense(tmp_path: Path) -> None:
    cfg = resolve_config(
        overrides={"out_dir": str(tmp_path), "quantum.d": "1", "quantum.L": "4", "quantum.u": "-1", "quantum.beta": "1"}
    )
    result = run_quantum(cfg)
    assert result.exit_code == EXIT_OK
    assert result.path.name == "quantum_d1_L4_S0p5_um1_beta1_dense.csv"
    table = read_table(result.path)
    assert table.provenance == Provenance.DENSE
    assert table.metadata["S"] == 0.5
    run = json.loads(side_file(result.path).read_text())["run"]
    assert run["command"] == "quantum"
    assert run["geometry"] == "d=1 L=4"
    assert run["seed"] is None


def test_run_quantum_needs_L(tmp_path: Path) -> None:
    with pytest.raises(ValueError, match="quantum.L is required"):
        run_quantum(resolve_config(overrides={"out_dir": str(tmp_path)}))


def test_run_quantum_capacity(tmp_path: Path) -> None:
    cfg = resolve_config(overrides={"out_dir": str(tmp_path), "quantum.d": "3", "quantum.L": "4"})
    with pytest.raises(CapacityExceededError):
        run_quantum(cfg)


def test_check_of_quantum_table_passes(tmp_path: Path) -> None:
    cfg = resolve_config(overrides={"out_dir": str(tmp_path), "quantum.d": "1", "quantum.L": "4", "quantum.u": "0"})
    table_path = run_quantum(cfg).path
    result = run_check(table_path, cfg)
    assert result.exit_code == EXIT_OK
    payload = json.loads(result.path.read_text())
    assert result.path.name == table_path.stem + ".check.json"
    assert payload["summary"]["n_failed"] == 0
    assert any(r["inequality"] == "amplification" for r in payload["records"])


def test_check_of_planted_table_fails(tmp_path: Path) -> None:
    t = TwoPointTable.constant(build_torus(2, 4), 0.1).with_values({(1, 1): 0.2, (3, 3): 0.2})
    path = write_table(t, tmp_path / "planted.csv")
    result = run_check(path, resolve_config(overrides={"out_dir": str(tmp_path)}))
    assert result.exit_code == EXIT_INEQUALITY
    assert json.loads(result.path.read_text())["summary"]["n_failed"] == 4


def test_run_rpm_enumeration(tmp_path: Path) -> None:
    cfg = resolve_config(
        overrides={"out_dir": str(tmp_path), "rpm.d": "1", "rpm.L": "4", "rpm.N": "2", "rpm.m_max": "2"}
    )
    result = run_rpm(cfg)
    assert result.path.name == "rpm_d1_L4_N2_beta0p5_crossing_on_crossing_enumerate.csv"
    table = read_table(result.path)
    assert table.provenance == Provenance.ENUMERATION
    assert table.p_connect is not None
    assert table.metadata["m_max"] == 2


def test_run_rpm_worm(tmp_path: Path) -> None:
    cfg = resolve_config(
        overrides={
            "out_dir": str(tmp_path),
            "seed": "3",
            "rpm.d": "1",
            "rpm.L": "4",
            "rpm.N": "1",
            "rpm.preset": "loop_on",
            "rpm.engine": "worm",
            "rpm.sweeps": "300",
            "rpm.burn_in": "50",
        }
    )
    table = read_table(run_rpm(cfg).path)
    assert table.provenance == Provenance.MONTE_CARLO
    assert table.stderr is not None
    assert table.metadata["seed"] == 3


def test_infrared_rows(tmp_path: Path) -> None:
    cfg = resolve_config(overrides={"out_dir": str(tmp_path), "infrared.d": "3", "infrared.L": "8"})
    assert [r.L for r in infrared_reports(cfg)] == [8]
    both = resolve_config(
        overrides={"out_dir": str(tmp_path), "infrared.d": "3", "infrared.L": "8", "infrared.extrapolate": True}
    )
    reports = infrared_reports(both)
    assert [r.extrapolated for r in reports] == [False, True]
    assert abs(reports[1].J - 1.15672) < 2e-3
    result = run_infrared(both)
    assert result.path.name == "infrared_d3_L8_S1_u0_vertex_sq.csv"
    assert len(result.path.read_text().splitlines()) == 3


def test_check_exit_code() -> None:
    failing = CheckReport.of([CheckRecord(inequality="a", location={}, lhs=1.0, rhs=0.0, slack=0.0)])
    assert check_exit_code(failing) == EXIT_INEQUALITY
    assert check_exit_code(failing.model_copy(update={"noise_consistent": True})) == EXIT_OK
    assert check_exit_code(CheckReport()) == EXIT_OK


def test_run_quantum_stochastic(tmp_path: Path) -> None:
    cfg = resolve_config(
        overrides={
            "out_dir": str(tmp_path),
            "seed": "7",
            "quantum.d": "1",
            "quantum.L": "4",
            "quantum.engine": "stochastic",
            "quantum.R": "4",
        }
    )
    result = run_quantum(cfg)
    assert result.path.name.endswith("_stochastic.csv")
    table = read_table(result.path)
    assert table.provenance == Provenance.STOCHASTIC
    assert table.stderr is not None
    assert json.loads(side_file(result.path).read_text())["run"]["seed"] == 7
