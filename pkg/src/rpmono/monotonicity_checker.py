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
Site-monotonicity and positivity inequalities checked against a TwoPointTable.

Every check is a pure function of the table, a CheckConfig and its explicit inputs.
Records are linear in the table entries; the slack of a record is
abs_tol + sigma_k * (standard error of lhs - rhs) when the table carries errors.
"""

import math
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from rpmono.exceptions import PreconditionError
from rpmono.lattice import (
    Reflection,
    ReflectionKind,
    TorusGeometry,
    Vertex,
    VertexSet,
    box_Q,
    difference_table,
    reflection_halves,
    reflection_index_map,
    shell_S,
)
from rpmono.models import CheckConfig, CheckRecord, CheckReport, TwoPointTable
from rpmono.statistics import combined_stderr, consistent_with_noise, expected_false_failures
from rpmono.utils.logger import logger


def cesaro_sum(t: TwoPointTable) -> Tuple[float, float]:
    """C~ = |T|^-1 sum_x G(o, x), with its standard error (0.0 for exact tables)."""
    values = t.as_array()
    if not np.all(np.isfinite(values)):
        raise ValueError("Cesaro mean needs a complete table of finite values")
    n = len(values)
    return float(values.mean()), float(np.sqrt(np.sum(t.stderr_array() ** 2)) / n)


def combined_axis_function(t: TwoPointTable, axis: int, x: Sequence[int]) -> float:
    """G^{e_i}(x) = (G(o, x) + G(o, (x . e_i) e_i)) / 2."""
    g = t.geometry
    return 0.5 * (t.value(x) + t.value(g.unit(axis, x[axis])))


def _require_complete(t: TwoPointTable) -> np.ndarray:
    values = t.as_array()
    if not np.all(np.isfinite(values)):
        raise ValueError("Checker needs a complete table of finite values")
    return values


def _require_bound(t: TwoPointTable, cfg: CheckConfig, M: float) -> None:
    top = float(t.as_array().max())
    if top > M + cfg.abs_tol:
        raise PreconditionError(f"M = {M} is below the table maximum {top}; G <= M is required", name="M", value=M)


class _Recorder:
    """Builds records whose sides are linear combinations of table entries."""

    def __init__(self, t: TwoPointTable, cfg: CheckConfig) -> None:
        self.t = t
        self.cfg = cfg
        self.values = _require_complete(t)
        self.errors = t.stderr_array()
        self.records: List[CheckRecord] = []

    def slack(self, coefficients: np.ndarray) -> float:
        if not self.t.has_stderr:
            return self.cfg.abs_tol
        return self.cfg.abs_tol + self.cfg.sigma_k * combined_stderr(coefficients, self.errors)

    def inequality(
        self,
        name: str,
        location: Dict[str, Any],
        lhs: np.ndarray,
        rhs: np.ndarray,
        lhs_const: float = 0.0,
        rhs_const: float = 0.0,
    ) -> CheckRecord:
        record = CheckRecord(
            inequality=name,
            location=location,
            lhs=float(lhs @ self.values) + lhs_const,
            rhs=float(rhs @ self.values) + rhs_const,
            slack=self.slack(lhs - rhs),
        )
        self.records.append(record)
        return record

    def equality(self, name: str, location: Dict[str, Any], difference: np.ndarray) -> CheckRecord:
        record = CheckRecord(
            inequality=name,
            location=location,
            lhs=abs(float(difference @ self.values)),
            rhs=0.0,
            slack=self.slack(difference),
        )
        self.records.append(record)
        return record

    def unit(self, *pairs: Tuple[Vertex, float]) -> np.ndarray:
        coef = np.zeros(len(self.values))
        for x, c in pairs:
            coef[self.t.geometry.index(self.t.geometry.wrap(x))] += c
        return coef


def check_symmetry(t: TwoPointTable, cfg: CheckConfig) -> CheckReport:
    """G(o, x) = G(o, -x), one record per pair {x, -x}."""
    rec = _Recorder(t, cfg)
    g = t.geometry
    for x in g.vertices():
        minus = g.negate(x)
        if g.index(minus) < g.index(x):
            continue
        rec.equality("symmetry", {"x": x, "minus_x": minus}, rec.unit((x, 1.0), (minus, -1.0)))
    return CheckReport.of(rec.records)


def check_translation(t: TwoPointTable, cfg: CheckConfig) -> CheckReport:
    """G(x, y) = G(o, y - x) on the companion full matrix of a dense table."""
    if t.full_matrix is None:
        raise ValueError("Translation check needs a table with its full G(x, y) matrix")
    g = t.geometry
    full = np.asarray(t.full_matrix, dtype=float)
    diff = difference_table(g)
    records = []
    for a in range(g.n_vertices):
        for b in range(g.n_vertices):
            records.append(
                CheckRecord(
                    inequality="translation",
                    location={"x": g.vertex(a), "y": g.vertex(b)},
                    lhs=abs(float(full[a, b] - full[0, diff[a, b]])),
                    rhs=0.0,
                    slack=cfg.abs_tol,
                )
            )
    return CheckReport.of(records)


def check_axis_dominance(t: TwoPointTable, cfg: CheckConfig) -> CheckReport:
    """
    For z_i odd: G(o, z) <= G(o, z_i e_i). For z_i even and non-zero:
    G(o, z) <= (G(o, (z_i - 1) e_i) + G(o, (z_i + 1) e_i)) / 2, and with vertex
    reflections also G(o, z) <= G(o, z_i e_i).
    """
    rec = _Recorder(t, cfg)
    g = t.geometry
    for z in g.vertices():
        lhs = rec.unit((z, 1.0))
        for axis in range(g.d):
            zi = z[axis]
            location = {"z": z, "axis": axis}
            if zi % 2 == 1:
                rec.inequality("axis_dominance.odd", location, lhs, rec.unit((g.unit(axis, zi), 1.0)))
            elif zi != 0:
                rhs = rec.unit((g.unit(axis, zi - 1), 0.5), (g.unit(axis, zi + 1), 0.5))
                rec.inequality("axis_dominance.even", location, lhs, rhs)
                if cfg.vertex_rp:
                    rec.inequality("axis_dominance.vertex", location, lhs, rec.unit((g.unit(axis, zi), 1.0)))
    return CheckReport.of(rec.records)


def check_odd_monotonicity(t: TwoPointTable, cfg: CheckConfig) -> CheckReport:
    """
    n -> G(o, y + n e_i) + G(o, n e_i) is non-increasing over odd n in (0, L_i/2) for every
    y with y_i = 0; with vertex reflections over every n in (0, L_i/2].
    """
    rec = _Recorder(t, cfg)
    g = t.geometry
    for axis in range(g.d):
        half = g.shape[axis] // 2
        if cfg.vertex_rp:
            steps, name = list(range(1, half + 1)), "odd_monotonicity.vertex"
        else:
            steps, name = [n for n in range(1, half) if n % 2 == 1], "odd_monotonicity"
        for y in g.vertices():
            if y[axis] != 0:
                continue
            for n, nxt in zip(steps, steps[1:], strict=False):
                earlier = rec.unit((g.add(y, g.unit(axis, n)), 1.0), (g.unit(axis, n), 1.0))
                later = rec.unit((g.add(y, g.unit(axis, nxt)), 1.0), (g.unit(axis, nxt), 1.0))
                rec.inequality(name, {"axis": axis, "y": y, "n": n, "next_n": nxt}, later, earlier)
    return CheckReport.of(rec.records)


def pair_coefficients(g: TorusGeometry, members: np.ndarray) -> np.ndarray:
    """
    Coefficients of sum over unordered pairs {x, y} of distinct members of
    (G(o, y - x) + G(o, x - y)) / 2.
    """
    members = np.asarray(members, dtype=np.int64)
    diffs = difference_table(g)[np.ix_(members, members)]
    off = ~np.eye(len(members), dtype=bool)
    return np.bincount(diffs[off], minlength=g.n_vertices) * 0.5


def reflected_halves(Q: VertexSet, r: Reflection) -> Tuple[VertexSet, VertexSet]:
    """Q+- = (Q n T+-) u theta(Q n T+-)."""
    g = Q.geometry
    plus, minus = reflection_halves(g, r)
    image = reflection_index_map(g, r)
    out = []
    for half in (plus, minus):
        inside = np.flatnonzero(Q.mask & half.mask)
        mask = np.zeros(g.n_vertices, dtype=bool)
        mask[inside] = True
        mask[image[inside]] = True
        out.append(VertexSet(geometry=g, mask=mask))
    return out[0], out[1]


def check_partition_lemma(t: TwoPointTable, cfg: CheckConfig, Q: VertexSet, r: Reflection) -> CheckReport:
    """
    sum over pairs in Q <= (sum over pairs in Q+ + sum over pairs in Q-) / 2, with
    G(x, y) read as the symmetrised G(o, y - x) and sums over unordered pairs.
    """
    if Q.geometry != t.geometry:
        raise ValueError("Q does not live on the table's torus")
    if r.kind == ReflectionKind.THROUGH_VERTICES and not cfg.vertex_rp:
        raise PreconditionError(
            "Reflection through vertices needs vertex_rp", name="reflection", value=r.model_dump()
        )
    rec = _Recorder(t, cfg)
    g = t.geometry
    q_plus, q_minus = reflected_halves(Q, r)
    lhs = pair_coefficients(g, Q.indices())
    rhs = 0.5 * pair_coefficients(g, q_plus.indices()) + 0.5 * pair_coefficients(g, q_minus.indices())
    location = {"Q": Q.members(), "axis": r.axis, "offset": r.offset}
    rec.inequality("partition_lemma", location, lhs, rhs)
    return CheckReport.of(rec.records)


def random_partition_checks(t: TwoPointTable, cfg: CheckConfig, count: int, seed: int = 0) -> CheckReport:
    """Partition-lemma records for `count` random sets Q (|Q| >= 2) and random edge reflections."""
    g = t.geometry
    rng = np.random.default_rng(seed)
    reports = []
    for _ in range(count):
        size = int(rng.integers(2, g.n_vertices + 1))
        mask = np.zeros(g.n_vertices, dtype=bool)
        mask[rng.choice(g.n_vertices, size=size, replace=False)] = True
        axis = int(rng.integers(g.d))
        r = Reflection(axis=axis, twice_offset=2 * int(rng.integers(g.shape[axis])) + 1)
        reports.append(check_partition_lemma(t, cfg, VertexSet(geometry=g, mask=mask), r))
    return CheckReport.merge(reports)


def _all_odd(x: Sequence[int]) -> bool:
    return all(c % 2 == 1 for c in x)


def check_amplification(t: TwoPointTable, cfg: CheckConfig, M: float) -> CheckReport:
    """
    G(o, y) >= 2^d G(o, z) - (2^d - 1) M for all-odd z and all-odd y in Q_z; with vertex
    reflections for every z and y in Q_z.

    Raises:
        PreconditionError: M is below the table maximum.
    """
    _require_bound(t, cfg, M)
    rec = _Recorder(t, cfg)
    g = t.geometry
    scale = 2.0**g.d
    for z in g.vertices():
        if not cfg.vertex_rp and not _all_odd(z):
            continue
        lhs = rec.unit((z, scale))
        for y in box_Q(g, z).members():
            if not cfg.vertex_rp and not _all_odd(y):
                continue
            rec.inequality("amplification", {"z": z, "y": y}, lhs, rec.unit((y, 1.0)), lhs_const=-(scale - 1.0) * M)
    return CheckReport.of(rec.records)


def positivity_report(t: TwoPointTable, cfg: CheckConfig, M: float, eps: float) -> CheckReport:
    """
    Finite-size positivity bounds from the Cesaro mean C~ standing in for C_1 at this L.

    Records (each a consequence of G <= M and the amplification inequality):
      - witness.x: some x outside the shell S_{r,L}, r_i = ceil(eps L_i), has
        G(o, x) >= M - |T|/|W| (M - C~), W the complement of the shell;
      - witness.z: the same over all-odd vertices outside the shell, with |W_odd|;
      - positivity.ii: G(o, x) >= M - 2^d |T|/|W_odd| (M - C~) at all-odd x with
        |x . e_i| < eps L_i;
      - positivity.iii (vertex reflections): G(o, x) >= M - 2^d |T|/|W| (M - C~) at every
        such x with all |x . e_i| > 0.
    The details carry the nominal eps forms, the eps -> 0 forms, the vacuity flags and the
    nearest-neighbour ratio constant.
    """
    if not 0.0 < eps < 0.5:
        raise ValueError(f"eps must lie in (0, 1/2) (got {eps})")
    _require_bound(t, cfg, M)
    rec = _Recorder(t, cfg)
    g = t.geometry
    V = g.n_vertices
    d = g.d
    c_tilde, c_err = cesaro_sum(t)
    gap = M - c_tilde
    radii = [min(math.ceil(eps * side), side // 2) for side in g.shape]
    outside = shell_S(g, radii).complement()
    w_all = outside.indices()
    w_odd = np.asarray([i for i in w_all if _all_odd(g.vertex(int(i)))], dtype=np.int64)
    mean_coef = np.full(V, 1.0 / V)

    details: Dict[str, Any] = {
        "C_tilde": c_tilde,
        "C_tilde_stderr": c_err,
        "C_tilde_label": "finite-size surrogate for C_1",
        "M": M,
        "eps": eps,
        "shell_radius": radii,
        "W": int(len(w_all)),
        "W_odd": int(len(w_odd)),
        "bound_ii_nominal": M - (0.25 - 0.5 * eps) ** (-d) * gap,
        "bound_iii_nominal": M - (0.5 - eps) ** (-d) * gap,
        "bound_ii_eps0": M - 4.0**d * gap,
        "bound_iii_eps0": M - 2.0**d * gap,
    }

    def witness(name: str, members: np.ndarray) -> Optional[float]:
        if len(members) == 0:
            return None
        factor = V / len(members)
        best = int(members[np.argmax(rec.values[members])])
        # bound = M - factor (M - C~) is linear in the table through C~
        rec.inequality(
            name,
            {"x": g.vertex(best), "factor": factor},
            factor * mean_coef,
            rec.unit((g.vertex(best), 1.0)),
            lhs_const=M - factor * M,
        )
        return factor

    factor_all = witness("witness.x", w_all)
    factor_odd = witness("witness.z", w_odd)

    inside = [
        x
        for x in g.vertices()
        if all(0 < dist < eps * side for dist, side in zip(g.axis_distance(x), g.shape, strict=True))
    ]
    if factor_odd is not None:
        amplified = 2.0**d * factor_odd
        details["bound_ii_finite"] = M - amplified * gap
        for x in inside:
            if _all_odd(x):
                rec.inequality(
                    "positivity.ii", {"x": x}, amplified * mean_coef, rec.unit((x, 1.0)), lhs_const=M - amplified * M
                )
    if cfg.vertex_rp and factor_all is not None:
        amplified = 2.0**d * factor_all
        details["bound_iii_finite"] = M - amplified * gap
        for x in inside:
            rec.inequality(
                "positivity.iii", {"x": x}, amplified * mean_coef, rec.unit((x, 1.0)), lhs_const=M - amplified * M
            )

    bound_keys = [k for k in details if k.startswith("bound_")]
    details["vacuous"] = {k: details[k] <= 0.0 for k in bound_keys}
    if all(details["vacuous"].values()):
        logger.warning(f"All positivity bounds are vacuous at M={M:.6g}, C~={c_tilde:.6g}, d={d}")
    details["nearest_neighbour_ratio"] = nearest_neighbour_ratio(t)
    axis_points = [
        rec.values[g.index(g.unit(axis, n))]
        for axis in range(d)
        for n in range(1, g.shape[axis] // 2 + 1)
        if n < eps * g.shape[axis]
    ]
    details["axis_minimum_in_box"] = float(min(axis_points)) if axis_points else None
    details["half_C_tilde"] = 0.5 * c_tilde
    return CheckReport.of(rec.records, {"positivity": details})


def nearest_neighbour_ratio(t: TwoPointTable) -> Optional[float]:
    """min G(o, x) / G(o, y) over nearest neighbours x ~ y away from o with G(o, y) > 0."""
    values = _require_complete(t)
    best: Optional[float] = None
    for u, v in t.geometry.neighbour_pairs:
        if u == 0 or v == 0:
            continue
        for x, y in ((u, v), (v, u)):
            if values[y] > 0.0:
                ratio = float(values[x] / values[y])
                best = ratio if best is None else min(best, ratio)
    return best


def classify_noise(report: CheckReport, cfg: CheckConfig, statistical: bool) -> CheckReport:
    """Marks a report whose failures are few enough to be expected at sigma_k for a noisy table."""
    if not statistical or report.n_failed == 0:
        return report
    noisy = consistent_with_noise(report.n_failed, report.n_records, cfg.sigma_k)
    details = dict(report.details)
    details["expected_false_failures"] = expected_false_failures(report.n_records, cfg.sigma_k)
    if noisy:
        logger.warning(
            f"{report.n_failed} of {report.n_records} records fail; consistent with noise at {cfg.sigma_k} sigma"
        )
    return report.model_copy(update={"noise_consistent": noisy, "details": details})


def run_checks(
    t: TwoPointTable,
    cfg: CheckConfig,
    M: Optional[float] = None,
    eps: Optional[float] = None,
    random_q: int = 0,
    seed: int = 0,
) -> CheckReport:
    """
    Symmetry, axis dominance and odd monotonicity always; translation when the full matrix
    is present; amplification and the positivity report when M is given (eps for the
    latter); random partition-lemma checks when random_q > 0.
    """
    reports = [check_symmetry(t, cfg), check_axis_dominance(t, cfg), check_odd_monotonicity(t, cfg)]
    if t.full_matrix is not None:
        reports.append(check_translation(t, cfg))
    if random_q > 0:
        reports.append(random_partition_checks(t, cfg, random_q, seed))
    if M is not None:
        reports.append(check_amplification(t, cfg, M))
        if eps is not None:
            reports.append(positivity_report(t, cfg, M, eps))
    report = CheckReport.merge(reports)
    logger.info(f"Checked {report.n_records} records: {report.n_failed} failed")
    return classify_noise(report, cfg, t.has_stderr)
