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
Shared value objects: two-point tables, estimator results, checker records and
reports, infrared reports and run metadata.
"""

import math
from enum import Enum
from typing import Any, Callable, Dict, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, computed_field, model_validator

from rpmono.lattice import TorusGeometry, Vertex


class Provenance(str, Enum):
    """Which engine produced a two-point table."""

    DENSE = "dense"
    STOCHASTIC = "stochastic"
    ENUMERATION = "enumeration"
    MONTE_CARLO = "monte_carlo"
    SYNTHETIC = "synthetic"


class QuantumEngine(str, Enum):
    DENSE = "dense"
    STOCHASTIC = "stochastic"


class RPMEngine(str, Enum):
    ENUMERATE = "enumerate"
    WORM = "worm"


class PathKind(str, Enum):
    """Observable pair inserted at o and x in the random path model."""

    SPIN_SOURCE = "spin_source"
    CROSSING = "crossing"


class ThresholdConvention(str, Enum):
    """Coefficient used in the minimal-spin threshold."""

    EDGE_SQ = "edge_sq"
    VERTEX_SQ = "vertex_sq"


class TwoPointTable(BaseModel):
    """
    G(o, x) for every vertex x of a torus, in vertex index order.

    This is the common currency between the engines and the checker. Optional columns:
    `stderr` (Monte Carlo and stochastic engines) and `p_connect` (crossing RPM tables).
    """

    geometry: TorusGeometry
    provenance: Provenance
    values: List[float] = Field(..., description="G(o, x) in vertex index order")
    stderr: Optional[List[float]] = Field(None, description="Standard error per vertex, same order")
    p_connect: Optional[List[float]] = Field(None, description="P(o <-> x) for crossing RPM tables")
    full_matrix: Optional[List[List[float]]] = Field(
        None, description="Companion G(x, y) over all vertex pairs (dense engine only)", exclude=True
    )
    metadata: Dict[str, Any] = Field(default_factory=dict)

    model_config = ConfigDict(frozen=True)

    @model_validator(mode="after")
    def _check_columns(self) -> "TwoPointTable":
        n = self.geometry.n_vertices
        if len(self.values) != n:
            raise ValueError(f"Table has {len(self.values)} values, torus has {n} vertices")
        if not math.isfinite(self.values[0]):
            raise ValueError("G(o, o) must be finite")
        if self.stderr is not None:
            if len(self.stderr) != n:
                raise ValueError("If stderr is present every value needs a stderr")
            if any(not (e >= 0.0) for e in self.stderr):
                raise ValueError("Standard errors must be non-negative")
        if self.p_connect is not None and len(self.p_connect) != n:
            raise ValueError("p_connect column must cover every vertex")
        if self.full_matrix is not None and (
            len(self.full_matrix) != n or any(len(row) != n for row in self.full_matrix)
        ):
            raise ValueError("Full matrix must be n_vertices x n_vertices")
        return self

    @classmethod
    def from_function(
        cls,
        geometry: TorusGeometry,
        fn: Callable[[Vertex], float],
        provenance: Provenance = Provenance.SYNTHETIC,
    ) -> "TwoPointTable":
        """Tabulates fn over all vertices; used for synthetic and planted tables."""
        return cls(geometry=geometry, provenance=provenance, values=[float(fn(x)) for x in geometry.vertices()])

    @classmethod
    def constant(cls, geometry: TorusGeometry, c: float) -> "TwoPointTable":
        return cls.from_function(geometry, lambda _x: c)

    @property
    def has_stderr(self) -> bool:
        return self.stderr is not None

    def value(self, x: Sequence[int]) -> float:
        return self.values[self.geometry.index(self.geometry.wrap(x))]

    def error(self, x: Sequence[int]) -> float:
        """Standard error at x; 0.0 when the table is exact."""
        if self.stderr is None:
            return 0.0
        return self.stderr[self.geometry.index(self.geometry.wrap(x))]

    def as_array(self) -> np.ndarray:
        return np.asarray(self.values, dtype=float)

    def stderr_array(self) -> np.ndarray:
        if self.stderr is None:
            return np.zeros(len(self.values))
        return np.asarray(self.stderr, dtype=float)

    def with_values(self, updates: Dict[Vertex, float]) -> "TwoPointTable":
        """Copy with some entries replaced; used to plant violations."""
        values = list(self.values)
        for x, v in updates.items():
            values[self.geometry.index(x)] = float(v)
        return self.model_copy(update={"values": values})


class TraceEstimate(BaseModel):
    mean: float
    stderr: float = Field(..., ge=0.0)
    samples: int = Field(..., description="Number of random vectors R", ge=1)
    degree: int = Field(..., description="Chebyshev polynomial degree", ge=0)

    model_config = ConfigDict(frozen=True)


class PartitionValue(BaseModel):
    """log Z_u(beta) = log Tr e^{-beta H_u}."""

    log_z: float
    method: QuantumEngine
    stderr: float = Field(0.0, description="Standard error of log Z (stochastic method)", ge=0.0)

    model_config = ConfigDict(frozen=True)


class GramReport(BaseModel):
    """Reflection-positivity Gram matrix M_ab = <A_a theta(A_b)> and its diagnostics."""

    min_eigenvalue: float
    symmetry_error: float = Field(..., description="max |M_ab - M_ba|", ge=0.0)
    cauchy_schwarz_violation: float = Field(
        ..., description="max over pairs of M_ab^2 - M_aa M_bb (<= 0 when the inequality holds)"
    )
    n_observables: int = Field(..., ge=1)
    matrix: List[List[float]]

    model_config = ConfigDict(frozen=True)


class CheckConfig(BaseModel):
    sigma_k: float = Field(3.0, description="Statistical slack multiplier", gt=0.0)
    abs_tol: float = Field(1e-10, description="Deterministic slack", ge=0.0)
    vertex_rp: bool = Field(False, description="Whether reflections through vertices are available")

    model_config = ConfigDict(frozen=True, extra="forbid")


class CheckRecord(BaseModel):
    """
    One evaluated inequality, normalised to the form lhs <= rhs.

    Equalities are recorded as |difference| <= 0.
    """

    inequality: str
    location: Dict[str, Any]
    lhs: float
    rhs: float
    slack: float = Field(..., ge=0.0)

    model_config = ConfigDict(frozen=True)

    @computed_field(return_type=float)  # type: ignore[misc]
    @property
    def margin(self) -> float:
        return self.rhs - self.lhs

    @computed_field(return_type=bool)  # type: ignore[misc]
    @property
    def passed(self) -> bool:
        return self.margin >= -self.slack

    def sort_key(self) -> Tuple[str, str]:
        return self.inequality, repr(sorted(self.location.items()))


class CheckReport(BaseModel):
    """Records of one or more checks plus summary counts."""

    records: List[CheckRecord] = Field(default_factory=list)
    noise_consistent: bool = Field(False, description="Failures are few enough to be expected at sigma_k")
    details: Dict[str, Any] = Field(default_factory=dict)

    model_config = ConfigDict(frozen=True)

    @classmethod
    def of(cls, records: Sequence[CheckRecord], details: Optional[Dict[str, Any]] = None) -> "CheckReport":
        return cls(records=sorted(records, key=CheckRecord.sort_key), details=details or {})

    @classmethod
    def merge(cls, reports: Sequence["CheckReport"]) -> "CheckReport":
        records: List[CheckRecord] = []
        details: Dict[str, Any] = {}
        for report in reports:
            records.extend(report.records)
            details.update(report.details)
        return cls.of(records, details)

    @computed_field(return_type=int)  # type: ignore[misc]
    @property
    def n_records(self) -> int:
        return len(self.records)

    @computed_field(return_type=int)  # type: ignore[misc]
    @property
    def n_failed(self) -> int:
        return sum(1 for r in self.records if not r.passed)

    @property
    def all_passed(self) -> bool:
        return self.n_failed == 0

    def failures(self) -> List[CheckRecord]:
        return [r for r in self.records if not r.passed]

    def by_inequality(self, prefix: str) -> List[CheckRecord]:
        return [r for r in self.records if r.inequality.startswith(prefix)]


class ThresholdResult(BaseModel):
    """Smallest half-integer spin at which the positivity threshold is met."""

    min_spin: float = Field(..., gt=0.0)
    margin: float = Field(..., description="S^2 + S - (3/4)(1-u) J^2 C at the minimal S")
    coefficient: float = Field(..., description="C(convention, eps, d)")
    convention: ThresholdConvention
    reference: Optional[float] = Field(None, description="Quoted reference value for (u, d), if any")

    model_config = ConfigDict(frozen=True)

    @computed_field(return_type=Optional[bool])  # type: ignore[misc]
    @property
    def reproduces_reference(self) -> Optional[bool]:
        if self.reference is None:
            return None
        return abs(self.min_spin - self.reference) < 1e-12


class IRReport(BaseModel):
    """Infrared-bound constants for one (d, L) or its extrapolated limit."""

    d: int = Field(..., ge=1)
    L: Optional[int] = Field(None, description="Side length; None when extrapolated")
    extrapolated: bool = False
    J: float = Field(..., ge=0.0)
    achieved_tol: Optional[float] = None
    S: float = Field(..., gt=0.0)
    u: float = Field(..., le=0.0)
    c1_bound: float
    convention: ThresholdConvention = ThresholdConvention.VERTEX_SQ
    threshold: Optional[ThresholdResult] = None

    model_config = ConfigDict(frozen=True)

    @computed_field(return_type=float)  # type: ignore[misc]
    @property
    def M(self) -> float:
        return self.S * (self.S + 1.0) / 3.0


class RunMetadata(BaseModel):
    """Side-file written next to every output: how it was produced."""

    command: str
    version: str
    engine: str
    seed: Optional[int] = None
    runtime_s: float = Field(..., ge=0.0)
    geometry: Optional[str] = None
    non_paper_geometry: bool = False
    config: Dict[str, Any] = Field(default_factory=dict)
    extras: Dict[str, Any] = Field(default_factory=dict)

    model_config = ConfigDict(frozen=True)


class LocalStats(NamedTuple):
    """
    Per-vertex statistics of a random path configuration.

    u[i] and v[i] are indexed by colour - 1. v is all zero whenever K > 0.
    """

    u: Tuple[int, ...]
    v: Tuple[int, ...]
    K: int
    n: int
    t: int

    @classmethod
    def empty(cls, N: int) -> "LocalStats":
        return cls(u=(0,) * N, v=(0,) * N, K=0, n=0, t=0)

    @property
    def unpaired(self) -> int:
        return sum(self.u)
