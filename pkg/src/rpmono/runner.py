# Copyright (c) 2025 CoReason, Inc.
#
# This software is proprietary and dual-licensed.
# Licensed under the Prosperity Public License 3.0 (the "License").
# A copy of the license is available at https://prosperitylicense.com/versions/3.0.0
# For details, see the LICENSE file.
# Commercial use beyond a 30-day trial requires a separate license.
#
# Source Code: https://github.com/CoReason-AI/rpmono

"""
Batch runs: resolve a RunConfig, drive one engine, write the table or report together
with its run metadata, and hand an exit code back to the CLI.
"""

import time
from pathlib import Path
from typing import List, NamedTuple, Optional

from rpmono import __version__
from rpmono.enumeration import Enumerator
from rpmono.infrared_bounds import infrared_report
from rpmono.lattice import EdgeConvention, TorusGeometry, build_torus
from rpmono.models import CheckConfig, CheckReport, IRReport, QuantumEngine, RPMEngine, RunMetadata, TwoPointTable
from rpmono.monotonicity_checker import run_checks
from rpmono.presets import get_preset
from rpmono.quantum_gibbs import GibbsEngine, GibbsParams
from rpmono.random_path import RPMParams
from rpmono.settings import RunConfig
from rpmono.tables import read_table, write_ir_report, write_report, write_table
from rpmono.utils.logger import logger
from rpmono.worm import worm_estimate

EXIT_OK = 0
EXIT_INEQUALITY = 1
EXIT_USAGE = 2
EXIT_CAPACITY = 3


class RunResult(NamedTuple):
    path: Path
    exit_code: int


def _geometry(d: int, L: Optional[int], section: str, convention: EdgeConvention) -> TorusGeometry:
    if L is None:
        raise ValueError(f"{section}.L is required")
    return build_torus(d, L, convention)


def _fmt_name(value: float) -> str:
    return f"{value:g}".replace("-", "m").replace(".", "p")


def _metadata(
    cfg: RunConfig,
    command: str,
    engine: str,
    start: float,
    seed: Optional[int],
    geometry: Optional[TorusGeometry] = None,
) -> RunMetadata:
    return RunMetadata(
        command=command,
        version=__version__,
        engine=engine,
        seed=seed,
        runtime_s=time.perf_counter() - start,
        geometry=None if geometry is None else f"d={geometry.d} L={geometry.label}",
        non_paper_geometry=False if geometry is None else geometry.non_paper_geometry,
        config=cfg.model_dump(mode="json"),
    )


def quantum_table(cfg: RunConfig) -> TwoPointTable:
    q = cfg.quantum
    g = _geometry(q.d, q.L, "quantum", q.convention)
    p = GibbsParams(geometry=g, S=q.S, u=q.u, beta=q.beta)
    engine = GibbsEngine(dense_cap=q.dense_cap, stochastic_cap=q.stochastic_cap, threads=cfg.threads)
    if q.engine == QuantumEngine.DENSE:
        return engine.dense_correlations(p)
    seed = cfg.seed if q.seed is None else q.seed
    return engine.stochastic_correlations(p, R=q.R, degree=q.degree, seed=seed)


def run_quantum(cfg: RunConfig) -> RunResult:
    """Quantum two-point table: CSV plus side-file under out_dir."""
    start = time.perf_counter()
    q = cfg.quantum
    table = quantum_table(cfg)
    seed = None if q.engine == QuantumEngine.DENSE else (cfg.seed if q.seed is None else q.seed)
    name = (
        f"quantum_d{q.d}_L{table.geometry.label}_S{_fmt_name(q.S)}_u{_fmt_name(q.u)}"
        f"_beta{_fmt_name(q.beta)}_{q.engine.value}.csv"
    )
    run = _metadata(cfg, "quantum", q.engine.value, start, seed, table.geometry)
    path = write_table(table, cfg.out_dir / name, run)
    logger.info(f"Wrote {path}")
    return RunResult(path=path, exit_code=EXIT_OK)


def rpm_table(cfg: RunConfig) -> TwoPointTable:
    r = cfg.rpm
    g = _geometry(r.d, r.L, "rpm", r.convention)
    p = RPMParams(geometry=g, N=r.N, beta=r.beta, weight=get_preset(r.preset, r.N), m_max=r.m_max)
    if r.engine == RPMEngine.ENUMERATE:
        return Enumerator().enumerate_two_point(p, r.resolved_kind)

    seed = cfg.seed if r.seed is None else r.seed
    return worm_estimate(
        p, r.resolved_kind, sweeps=r.sweeps, burn_in=r.burn_in, seed=seed, n_batches=r.batches, chains=r.chains
    )


def run_rpm(cfg: RunConfig) -> RunResult:
    """Random path model two-point table: CSV plus side-file under out_dir."""
    start = time.perf_counter()
    r = cfg.rpm
    table = rpm_table(cfg)
    seed = None if r.engine == RPMEngine.ENUMERATE else (cfg.seed if r.seed is None else r.seed)
    name = (
        f"rpm_d{r.d}_L{table.geometry.label}_N{r.N}_beta{_fmt_name(r.beta)}"
        f"_{r.preset}_{r.resolved_kind.value}_{r.engine.value}.csv"
    )
    run = _metadata(cfg, "rpm", r.engine.value, start, seed, table.geometry)
    path = write_table(table, cfg.out_dir / name, run)
    logger.info(f"Wrote {path}")
    return RunResult(path=path, exit_code=EXIT_OK)


def infrared_reports(cfg: RunConfig) -> List[IRReport]:
    """One row per requested size: L when given, the extrapolated limit when asked for (or when L is absent)."""
    ir = cfg.infrared
    sizes: List[Optional[int]] = []
    if ir.L is not None:
        sizes.append(ir.L)
    if ir.extrapolate or ir.L is None:
        sizes.append(None)
    return [
        infrared_report(
            ir.d, ir.S, ir.u, L=L, tol=ir.tol, convention=ir.convention, eps=ir.eps, min_spin=ir.min_spin
        )
        for L in sizes
    ]


def run_infrared(cfg: RunConfig) -> RunResult:
    start = time.perf_counter()
    ir = cfg.infrared
    reports = infrared_reports(cfg)
    for report in reports:
        size = "limit" if report.L is None else f"L={report.L}"
        logger.info(f"Infrared d={report.d} {size}: J={report.J:.6f} c1={report.c1_bound:.6f}")
    label = "limit" if ir.L is None else str(ir.L)
    name = f"infrared_d{ir.d}_L{label}_S{_fmt_name(ir.S)}_u{_fmt_name(ir.u)}_{ir.convention.value}.csv"
    run = _metadata(cfg, "infrared", "lattice_sum", start, None)
    path = write_ir_report(reports, cfg.out_dir / name, run)
    logger.info(f"Wrote {path}")
    return RunResult(path=path, exit_code=EXIT_OK)


def check_exit_code(report: CheckReport) -> int:
    """0 when every record passes or the failures are consistent with noise, else 1."""
    if report.all_passed or report.noise_consistent:
        return EXIT_OK
    return EXIT_INEQUALITY


def check_table(table: TwoPointTable, cfg: RunConfig) -> CheckReport:
    """
    Runs the checker on a table. M defaults to S(S+1)/3 for quantum tables that record S;
    other tables get the amplification and positivity checks only when check.M is set.
    """
    c = cfg.check
    M = c.M
    if M is None and "S" in table.metadata:
        S = float(table.metadata["S"])
        M = S * (S + 1.0) / 3.0
    check_cfg = CheckConfig(sigma_k=c.sigma_k, abs_tol=c.abs_tol, vertex_rp=c.vertex_rp)
    return run_checks(table, check_cfg, M=M, eps=c.eps, random_q=c.random_q, seed=cfg.seed)


def run_check(table_path: Path, cfg: RunConfig) -> RunResult:
    """CheckReport JSON next to the table's stem under out_dir."""
    start = time.perf_counter()
    table = read_table(table_path)
    report = check_table(table, cfg)
    exit_code = check_exit_code(report)
    for record in report.failures():
        logger.warning(
            f"FAIL {record.inequality} at {record.location}: lhs={record.lhs:.6g} rhs={record.rhs:.6g} "
            f"margin={record.margin:.3e}"
        )
    run = _metadata(cfg, "check", table.provenance.value, start, cfg.seed, table.geometry)
    path = write_report(report, cfg.out_dir / f"{Path(table_path).stem}.check.json", run)
    logger.info(f"Wrote {path}: {report.n_records} records, {report.n_failed} failed, exit {exit_code}")
    return RunResult(path=path, exit_code=exit_code)
