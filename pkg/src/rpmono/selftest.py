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
Acceptance suite behind `rpmono selftest`.

Each criterion builds its own small model, runs the relevant engine and reports a
pass flag with a one-line detail. `quick` skips the desk-scale stochastic suite and the
random path model runs.
"""

import math
import time
from typing import Callable, Dict, List, NamedTuple, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, computed_field

from rpmono.enumeration import Enumerator
from rpmono.infrared_bounds import J_limit, J_sum, min_spin_threshold
from rpmono.lattice import EdgeConvention, Reflection, build_rectangular_torus, build_torus
from rpmono.models import CheckConfig, PathKind, ThresholdConvention, TwoPointTable
from rpmono.monotonicity_checker import (
    check_amplification,
    check_axis_dominance,
    check_odd_monotonicity,
    random_partition_checks,
    run_checks,
)
from rpmono.presets import crossing_on
from rpmono.quantum_gibbs import GibbsEngine, GibbsParams, random_half_observables
from rpmono.random_path import RPMParams
from rpmono.spin_algebra import casimir_error, commutator_error, spectrum_error, spin_matrices
from rpmono.utils.logger import logger
from rpmono.worm import worm_estimate

J3_REFERENCE = 1.15672


class CriterionResult(BaseModel):
    name: str
    passed: bool
    detail: str
    runtime_s: float = Field(..., ge=0.0)

    model_config = ConfigDict(frozen=True)


class SelfTestReport(BaseModel):
    results: List[CriterionResult] = Field(default_factory=list)
    quick: bool = False

    model_config = ConfigDict(frozen=True)

    @computed_field(return_type=bool)  # type: ignore[misc]
    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.results)


class _Criterion(NamedTuple):
    name: str
    run: Callable[["_Context"], Tuple[bool, str]]
    slow: bool


class _Context:
    """Tables produced by earlier criteria, reused by the lemma suites."""

    def __init__(self, seed: int) -> None:
        self.seed = seed
        self.engine = GibbsEngine()
        self.quantum_tables: List[TwoPointTable] = []
        self.rpm_tables: List[TwoPointTable] = []


def spin_algebra_criterion(ctx: _Context) -> Tuple[bool, str]:
    worst = 0.0
    for S in (0.5, 1.0, 1.5, 2.0):
        sm = spin_matrices(S)
        worst = max(worst, commutator_error(sm), casimir_error(sm), spectrum_error(sm))
    return worst < 1e-12, f"max algebra error {worst:.2e}"


def infrared_constant_criterion(ctx: _Context) -> Tuple[bool, str]:
    J3, achieved = J_limit(3, 1e-3)
    J3_64 = J_sum(3, 64)
    J4_64 = J_sum(4, 64)
    J6_64 = J_sum(6, 64)
    ok = (
        abs(J3 - J3_REFERENCE) < 1e-3
        and abs(J3_64 - J3_REFERENCE) < 5e-3
        and J4_64 < J3_64
        and abs(J6_64 - 1.0) < abs(J3_64 - 1.0)
    )
    return ok, f"J3={J3:.6f} (tol {achieved:.1e}) J3(64)={J3_64:.6f} J4(64)={J4_64:.6f} J6(64)={J6_64:.6f}"


def threshold_criterion(ctx: _Context) -> Tuple[bool, str]:
    J3, _ = J_limit(3, 1e-3)
    xy = min_spin_threshold(0.0, 3, J3)
    af = min_spin_threshold(-1.0, 3, J3)
    edge = min_spin_threshold(0.0, 3, J3, ThresholdConvention.EDGE_SQ)
    ok = xy.min_spin == 8.0 and af.min_spin == 11.0 and edge.min_spin == 64.0
    return ok, f"vertex_sq: u=0 -> {xy.min_spin:g}, u=-1 -> {af.min_spin:g}; edge_sq: u=0 -> {edge.min_spin:g}"


def _deviation(delta: np.ndarray, sigma: np.ndarray) -> str:
    ratio = float(np.max(delta / np.maximum(sigma, 1e-300)))
    return f"max |delta| {float(delta.max()):.2e}, max |delta|/sigma {ratio:.2f}"


def infinite_temperature_criterion(ctx: _Context) -> Tuple[bool, str]:
    worst = 0.0
    for g, S in ((build_torus(1, 4), 1.0), (build_torus(2, 2), 0.5)):
        t = ctx.engine.dense_correlations(GibbsParams(geometry=g, S=S, u=-1.0, beta=0.0))
        values = t.as_array()
        worst = max(worst, abs(values[0] - S * (S + 1.0) / 3.0), float(np.max(np.abs(values[1:]))))
        ctx.quantum_tables.append(t)
    return worst < 1e-12, f"max deviation {worst:.2e}"


def two_site_criterion(ctx: _Context) -> Tuple[bool, str]:
    g = build_torus(1, 2, EdgeConvention.SIMPLE)
    worst = 0.0
    for beta in (0.5, 1.0, 2.0):
        t = ctx.engine.dense_correlations(GibbsParams(geometry=g, S=0.5, u=1.0, beta=beta))
        ctx.quantum_tables.append(t)
        up, down = math.exp(beta / 2), math.exp(-1.5 * beta)
        exact = (up - down) / (4.0 * (3.0 * up + down))
        worst = max(worst, abs(t.values[1] - exact))
    return worst < 1e-10, f"max deviation from the singlet/triplet formula {worst:.2e}"


def stochastic_agreement_criterion(ctx: _Context) -> Tuple[bool, str]:
    p = GibbsParams(geometry=build_rectangular_torus((4, 2)), S=0.5, u=-1.0, beta=1.0)
    dense = ctx.engine.dense_correlations(p)
    noisy = ctx.engine.stochastic_correlations(p, R=200, seed=ctx.seed)
    ctx.quantum_tables.append(dense)
    delta = np.abs(noisy.as_array() - dense.as_array())
    sigma = noisy.stderr_array()
    ok = bool(np.all(delta <= 3.0 * sigma + 1e-12) and np.all(delta <= 1e-2))
    return ok, _deviation(delta, sigma)


def desk_monotonicity_criterion(ctx: _Context) -> Tuple[bool, str]:
    g = build_torus(2, 4)
    cfg = CheckConfig()
    failures: List[str] = []
    records = {"axis_dominance": 0, "odd_monotonicity": 0}
    for u in (0.0, -1.0):
        for beta in (0.5, 1.0, 2.0):
            p = GibbsParams(geometry=g, S=0.5, u=u, beta=beta)
            t = ctx.engine.stochastic_correlations(p, R=100, seed=ctx.seed)
            for name, check in (("axis_dominance", check_axis_dominance), ("odd_monotonicity", check_odd_monotonicity)):
                report = check(t, cfg)
                records[name] += report.n_records
                failures.extend(f"u={u:g} beta={beta:g} {r.inequality} {r.location}" for r in report.failures())
    return _monotonicity_verdict(records, failures)


def _monotonicity_verdict(records: Dict[str, int], failures: List[str]) -> Tuple[bool, str]:
    """Fails on any failed record and when axis dominance produced no records at all."""
    detail = ", ".join(f"{name}: {n} records" for name, n in records.items()) + f"; {len(failures)} failed"
    if failures:
        detail += " (" + "; ".join(failures[:3]) + ")"
    return not failures and records["axis_dominance"] > 0, detail


def gram_criterion(ctx: _Context) -> Tuple[bool, str]:
    g = build_torus(2, 2)
    r = Reflection.through(axis=0, offset=0.5)
    observables = random_half_observables(g, r, count=20, seed=ctx.seed)
    worst_eig = math.inf
    worst_cs = -math.inf
    for u in (0.0, -1.0):
        for beta in (0.5, 2.0):
            gram = ctx.engine.rp_gram(GibbsParams(geometry=g, S=0.5, u=u, beta=beta), r, observables)
            worst_eig = min(worst_eig, gram.min_eigenvalue)
            worst_cs = max(worst_cs, gram.cauchy_schwarz_violation)
    ok = worst_eig >= -1e-8 and worst_cs <= 1e-10
    return ok, f"min eigenvalue {worst_eig:.2e}, Cauchy-Schwarz excess {worst_cs:.2e}"


def _crossing_params() -> RPMParams:
    return RPMParams(geometry=build_torus(2, 4), N=2, beta=0.5, weight=crossing_on(2), m_max=1)


def rpm_enumeration_criterion(ctx: _Context) -> Tuple[bool, str]:
    t = Enumerator().enumerate_two_point(_crossing_params(), PathKind.CROSSING)
    ctx.rpm_tables.append(t)
    identity = float(t.metadata["identity_max_rel_error"])
    report = run_checks(t, CheckConfig())
    ok = identity <= 1e-12 and report.all_passed
    return ok, f"identity error {identity:.1e}, {report.n_records} monotonicity records, {report.n_failed} failed"


def rpm_worm_criterion(ctx: _Context) -> Tuple[bool, str]:
    p = _crossing_params()
    exact = ctx.rpm_tables[0] if ctx.rpm_tables else Enumerator().enumerate_two_point(p, PathKind.CROSSING)
    mc = worm_estimate(p, PathKind.CROSSING, sweeps=40_000, burn_in=2_000, seed=ctx.seed)
    delta = np.abs(mc.as_array() - exact.as_array())
    sigma = mc.stderr_array()
    ok = bool(np.all(delta <= 3.0 * sigma + 1e-12))
    return ok, _deviation(delta, sigma)


def lemma_suite_criterion(ctx: _Context) -> Tuple[bool, str]:
    cfg = CheckConfig()
    n_records = 0
    failed = 0
    for t in ctx.quantum_tables + ctx.rpm_tables:
        S = t.metadata.get("S")
        M = float(S) * (float(S) + 1.0) / 3.0 if S is not None else float(np.max(t.as_array()))
        for report in (random_partition_checks(t, cfg, 50, seed=ctx.seed), check_amplification(t, cfg, M)):
            n_records += report.n_records
            failed += report.n_failed
    if n_records == 0:
        return False, "no tables to check"
    return failed == 0, f"{len(ctx.quantum_tables) + len(ctx.rpm_tables)} tables, {n_records} records, {failed} failed"


def calibration_criterion(ctx: _Context) -> Tuple[bool, str]:
    g = build_torus(2, 4)
    cfg = CheckConfig()
    flat = run_checks(TwoPointTable.constant(g, 0.1), cfg)
    flat_ok = flat.all_passed and all(abs(r.margin) < 1e-15 for r in flat.records)
    planted = TwoPointTable.constant(g, 0.1).with_values({(1, 1): 0.2, (3, 3): 0.2})
    failed = {(tuple(r.location["z"]), r.location["axis"]) for r in run_checks(planted, cfg).failures()}
    expected = {((1, 1), 0), ((1, 1), 1), ((3, 3), 0), ((3, 3), 1)}
    return flat_ok and failed == expected, f"constant table margins zero: {flat_ok}; planted failures {sorted(failed)}"


CRITERIA: List[_Criterion] = [
    _Criterion("spin_algebra", spin_algebra_criterion, slow=False),
    _Criterion("infrared_constant", infrared_constant_criterion, slow=False),
    _Criterion("min_spin_threshold", threshold_criterion, slow=False),
    _Criterion("infinite_temperature", infinite_temperature_criterion, slow=False),
    _Criterion("two_site_oracle", two_site_criterion, slow=False),
    _Criterion("stochastic_vs_dense", stochastic_agreement_criterion, slow=False),
    _Criterion("desk_monotonicity", desk_monotonicity_criterion, slow=True),
    _Criterion("reflection_positivity", gram_criterion, slow=False),
    _Criterion("rpm_enumeration", rpm_enumeration_criterion, slow=True),
    _Criterion("rpm_worm", rpm_worm_criterion, slow=True),
    _Criterion("lemma_suites", lemma_suite_criterion, slow=False),
    _Criterion("checker_calibration", calibration_criterion, slow=False),
]


def run_selftest(quick: bool = False, seed: int = 0) -> SelfTestReport:
    """Runs every criterion in order (the slow ones only when quick is False)."""
    ctx = _Context(seed)
    results = []
    for criterion in CRITERIA:
        if quick and criterion.slow:
            logger.info(f"Skipping {criterion.name} (quick)")
            continue
        start = time.perf_counter()
        try:
            passed, detail = criterion.run(ctx)
        except Exception as e:
            passed, detail = False, f"{type(e).__name__}: {e}"
        result = CriterionResult(
            name=criterion.name, passed=passed, detail=detail, runtime_s=time.perf_counter() - start
        )
        if passed:
            logger.info(f"PASS {result.name} ({result.runtime_s:.1f}s): {detail}")
        else:
            logger.warning(f"FAIL {result.name} ({result.runtime_s:.1f}s): {detail}")
        results.append(result)
    return SelfTestReport(results=results, quick=quick)
