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
Gibbs states of the spin-S model H_u = -2 sum_{xy} (S1_x S1_y + u S2_x S2_y + S3_x S3_y)
on a torus: matrix-free Hamiltonian, spectral bounds, exact and stochastic two-point
tables, the partition function, and reflection-positivity Gram matrices.
"""

import time
from concurrent.futures import ThreadPoolExecutor
from functools import lru_cache
from typing import Any, Dict, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator
from scipy.linalg import eigh
from scipy.sparse.linalg import ArpackNoConvergence, LinearOperator, eigsh

from rpmono.chebyshev import apply_exp_half
from rpmono.exceptions import CapacityExceededError
from rpmono.lattice import Reflection, TorusGeometry, reflection_halves, reflection_index_map
from rpmono.models import GramReport, PartitionValue, Provenance, QuantumEngine, TraceEstimate, TwoPointTable
from rpmono.spin_algebra import apply_two_site, hilbert_dimension, s3_diagonal, spin_matrices, validate_spin
from rpmono.statistics import jackknife_ratio
from rpmono.utils.logger import logger

DENSE_CAP = 2**12
STOCHASTIC_CAP = 2**20
SMALL_DENSE_BOUNDS = 2**8
BOUNDS_INFLATION = 0.05
# Column budget per propagated block; fixed by dimension alone so results do not depend on threads.
BLOCK_ENTRIES = 2**22


class GibbsParams(BaseModel):
    """(geometry, S, u, beta) of the quantum model; the Gibbs state is e^{-beta H_u} / Z."""

    geometry: TorusGeometry
    S: float = Field(..., description="Spin, a positive half-integer", gt=0.0)
    u: float = Field(..., description="Anisotropy; u = 0 is XY, u = 1 Heisenberg", ge=-1.0, le=1.0)
    beta: float = Field(..., description="Inverse temperature", ge=0.0)

    model_config = ConfigDict(frozen=True)

    @model_validator(mode="after")
    def _check_spin(self) -> "GibbsParams":
        validate_spin(self.S)
        return self

    @property
    def n_sites(self) -> int:
        return self.geometry.n_vertices

    @property
    def dimension(self) -> int:
        return hilbert_dimension(self.S, self.n_sites)

    @property
    def M(self) -> float:
        """Uniform bound S(S+1)/3 used by the positivity argument."""
        return self.S * (self.S + 1.0) / 3.0

    @property
    def reflection_positive(self) -> bool:
        """Reflection positivity through edges is claimed only for u <= 0."""
        return self.u <= 0.0


class OperatorDescriptor(BaseModel):
    """coefficient * prod_{s in sites} S3_s; an empty product is the identity."""

    coefficient: float = 1.0
    sites: Tuple[int, ...] = ()

    model_config = ConfigDict(frozen=True)


class SpectralBounds(NamedTuple):
    emin: float
    emax: float
    margin: float

    @property
    def interval(self) -> Tuple[float, float]:
        return self.emin - self.margin, self.emax + self.margin


def bond_block(S: float, u: float) -> np.ndarray:
    """-2 (S1 x S1 + u S2 x S2 + S3 x S3) as a real D^2 x D^2 matrix."""
    sm = spin_matrices(S)
    block = np.kron(sm.S1, sm.S1) + u * np.kron(sm.S2, sm.S2) + np.kron(sm.S3, sm.S3)
    return np.ascontiguousarray(-2.0 * block.real)


def hamiltonian_apply(p: GibbsParams, v: np.ndarray) -> np.ndarray:
    """
    H_u v for v of shape (dim,) or (dim, R), summed edge by edge.

    Doubled edges appear twice in the edge list and so contribute twice.
    """
    if v.shape[0] != p.dimension:
        raise ValueError(f"State has dimension {v.shape[0]}, expected {p.dimension}")
    block = bond_block(p.S, p.u)
    out = np.zeros_like(v, dtype=np.result_type(v.dtype, block.dtype))
    for x, y, _ in p.geometry.edges:
        out += apply_two_site(block, x, y, p.n_sites, v)
    return out


def norm_bound(p: GibbsParams) -> float:
    """Rigorous ||H_u|| <= 2 |E| (2 + |u|) S^2."""
    return 2.0 * p.geometry.n_edges * (2.0 + abs(p.u)) * p.S**2


def dense_hamiltonian(p: GibbsParams) -> np.ndarray:
    return hamiltonian_apply(p, np.eye(p.dimension))


def spectral_bounds(p: GibbsParams, seed: int = 0) -> SpectralBounds:
    """
    Extremal eigenvalue estimates with a 5% safety margin of the spectral width.

    Small systems are diagonalised densely; larger ones use Lanczos on the matrix-free
    operator. The inflated interval is clamped to the rigorous norm bound, which is also
    the fallback when Lanczos does not converge.
    """
    bound = norm_bound(p)
    dim = p.dimension
    if dim <= SMALL_DENSE_BOUNDS:
        eigvals = np.linalg.eigvalsh(dense_hamiltonian(p))
        emin, emax = float(eigvals[0]), float(eigvals[-1])
    else:
        op = LinearOperator((dim, dim), matvec=lambda v: hamiltonian_apply(p, v), dtype=float)
        v0 = np.random.default_rng(seed).standard_normal(dim)
        try:
            emin = float(eigsh(op, k=1, which="SA", v0=v0, tol=1e-8, return_eigenvectors=False)[0])
            emax = float(eigsh(op, k=1, which="LA", v0=v0, tol=1e-8, return_eigenvectors=False)[0])
        except ArpackNoConvergence:
            logger.warning(f"Lanczos did not converge for dim={dim}; using the norm bound {bound:.4g}")
            return SpectralBounds(-bound, bound, 0.0)
    margin = BOUNDS_INFLATION * max(emax - emin, 1e-12)
    lo = max(emin - margin, -bound)
    hi = min(emax + margin, bound)
    return SpectralBounds(emin, emax, max(emin - lo, hi - emax))


@lru_cache(maxsize=4)
def _eigensystem(geometry: TorusGeometry, S: float, u: float) -> Tuple[np.ndarray, np.ndarray]:
    """Eigenpairs of H_u; every beta on the same model shares them."""
    eigvals, eigvecs = eigh(dense_hamiltonian(GibbsParams(geometry=geometry, S=S, u=u, beta=0.0)))
    return eigvals, eigvecs


def _boltzmann_diagonal(p: GibbsParams) -> np.ndarray:
    """Diagonal of e^{-beta H} / Z in the computational basis."""
    eigvals, eigvecs = _eigensystem(p.geometry, p.S, p.u)
    weights = np.exp(-p.beta * (eigvals - eigvals[0]))
    probs = weights / weights.sum()
    return np.asarray((eigvecs**2) @ probs)


def audit_uniform_bound(t: TwoPointTable, S: float) -> Dict[str, Any]:
    """Compares a quantum table with M = S(S+1)/3 and with S^2; violations are logged."""
    M = S * (S + 1.0) / 3.0
    values = t.as_array()
    slack = 3.0 * t.stderr_array() + 1e-12
    over_m = [t.geometry.vertex(int(i)) for i in np.flatnonzero(values > M + slack)]
    over_s2 = [t.geometry.vertex(int(i)) for i in np.flatnonzero(values > S**2 + slack)]
    if over_m:
        logger.warning(f"Table exceeds M = S(S+1)/3 = {M:.6g} at {len(over_m)} sites, first {over_m[0]}")
    if over_s2:
        logger.warning(f"Table exceeds S^2 = {S**2:.6g} at {len(over_s2)} sites")
    return {"M": M, "max_value": float(values.max()), "over_M": over_m, "over_S2": over_s2}


class GibbsEngine:
    """
    Exact and stochastic evaluation of Gibbs expectations under configurable capacity.
    """

    def __init__(
        self,
        dense_cap: int = DENSE_CAP,
        stochastic_cap: int = STOCHASTIC_CAP,
        threads: int = 1,
    ) -> None:
        self.dense_cap = dense_cap
        self.stochastic_cap = stochastic_cap
        self.threads = max(1, threads)

    def _require_dimension(self, p: GibbsParams, cap: int, engine: str) -> None:
        dim = p.dimension
        if dim > cap:
            raise CapacityExceededError(
                f"Hilbert dimension cap exceeded: {engine} engine needs {dim} > {cap}",
                resource="hilbert_dimension",
                limit=cap,
                requested=dim,
            )

    def _base_metadata(self, p: GibbsParams) -> Dict[str, Any]:
        return {
            "S": p.S,
            "u": p.u,
            "beta": p.beta,
            "shape": list(p.geometry.shape),
            "convention": p.geometry.convention.value,
            "doubled_edges": p.geometry.has_doubled_edges,
            "non_paper_geometry": p.geometry.non_paper_geometry,
        }

    def dense_correlations(self, p: GibbsParams) -> TwoPointTable:
        """
        G(x, y) = Tr(S3_x S3_y e^{-beta H}) / Z by full diagonalisation.

        Returns the o-row as the table and the whole matrix as its companion.
        """
        self._require_dimension(p, self.dense_cap, "dense")
        start = time.perf_counter()
        logger.info(f"Dense correlations: shape={p.geometry.shape} S={p.S} u={p.u} beta={p.beta} dim={p.dimension}")
        diag = _boltzmann_diagonal(p)
        m = s3_diagonal(p.S, p.n_sites)
        full = (m * diag) @ m.T
        full = 0.5 * (full + full.T)
        metadata = self._base_metadata(p)
        table = TwoPointTable(
            geometry=p.geometry,
            provenance=Provenance.DENSE,
            values=[float(v) for v in full[0]],
            full_matrix=full.tolist(),
            metadata=metadata,
        )
        metadata["uniform_bound"] = audit_uniform_bound(table, p.S)
        metadata["runtime_s"] = time.perf_counter() - start
        return table.model_copy(update={"metadata": metadata})

    def _propagate_samples(
        self, p: GibbsParams, R: int, degree: Optional[int], seed: int
    ) -> Tuple[np.ndarray, np.ndarray, int, float, SpectralBounds]:
        """
        Per-sample <w, w> and <w, S3_x S3_o w> for w = e^{-beta H/2} r, r ~ N(0, 1)^dim.

        Sample j draws from default_rng([seed, j]), so the result is independent of
        block layout and thread count.
        """
        bounds = spectral_bounds(p, seed=seed)
        dim = p.dimension
        m = s3_diagonal(p.S, p.n_sites)
        pair = m * m[0]
        block = max(1, min(R, BLOCK_ENTRIES // dim))
        starts = list(range(0, R, block))
        den = np.empty(R)
        num = np.empty((R, p.n_sites))
        degrees: List[int] = [0] * len(starts)
        prefactors: List[float] = [0.0] * len(starts)

        def run(slot: int) -> None:
            j0 = starts[slot]
            j1 = min(R, j0 + block)
            r = np.column_stack([np.random.default_rng([seed, j]).standard_normal(dim) for j in range(j0, j1)])
            w, log_pref, used = apply_exp_half(lambda v: hamiltonian_apply(p, v), r, p.beta, bounds.interval, degree)
            w2 = w**2
            den[j0:j1] = w2.sum(axis=0)
            num[j0:j1] = (pair @ w2).T
            degrees[slot] = used
            prefactors[slot] = log_pref

        if self.threads == 1 or len(starts) == 1:
            for slot in range(len(starts)):
                run(slot)
        else:
            with ThreadPoolExecutor(max_workers=self.threads) as pool:
                list(pool.map(run, range(len(starts))))
        return den, num, degrees[0], prefactors[0], bounds

    def stochastic_correlations(
        self, p: GibbsParams, R: int, degree: Optional[int] = None, seed: int = 0
    ) -> TwoPointTable:
        """
        Typicality estimate of G(o, x) with a delete-one jackknife over the R samples.

        Args:
            p: Model parameters.
            R: Number of Gaussian random vectors, >= 2.
            degree: Chebyshev degree; None selects it from the tail threshold.
            seed: Base seed.
        """
        if R < 2:
            raise ValueError(f"Stochastic estimator needs R >= 2 (got {R})")
        self._require_dimension(p, self.stochastic_cap, "stochastic")
        start = time.perf_counter()
        logger.info(f"Stochastic correlations: shape={p.geometry.shape} dim={p.dimension} R={R} seed={seed}")
        den, num, used, _, bounds = self._propagate_samples(p, R, degree, seed)
        estimate, stderr = jackknife_ratio(num, den)
        logger.info(f"Stochastic correlations done: degree={used} in {time.perf_counter() - start:.2f}s")
        metadata = self._base_metadata(p)
        metadata.update(
            {
                "R": R,
                "seed": seed,
                "degree": used,
                "spectral_bounds": list(bounds),
            }
        )
        table = TwoPointTable(
            geometry=p.geometry,
            provenance=Provenance.STOCHASTIC,
            values=[float(v) for v in estimate],
            stderr=[float(e) for e in stderr],
            metadata=metadata,
        )
        metadata["uniform_bound"] = audit_uniform_bound(table, p.S)
        metadata["runtime_s"] = time.perf_counter() - start
        return table.model_copy(update={"metadata": metadata})

    def normalized_trace(self, p: GibbsParams, R: int, degree: Optional[int] = None, seed: int = 0) -> TraceEstimate:
        """Tr(e^{-beta H}) / dim, up to the returned log prefactor stored in log_partition."""
        if R < 2:
            raise ValueError(f"Trace estimate needs R >= 2 (got {R})")
        den, _, used, _, _ = self._propagate_samples(p, R, degree, seed)
        den = den / p.dimension
        return TraceEstimate(mean=float(den.mean()), stderr=float(den.std(ddof=1) / np.sqrt(R)), samples=R, degree=used)

    def log_partition(
        self,
        p: GibbsParams,
        method: QuantumEngine = QuantumEngine.DENSE,
        R: int = 100,
        degree: Optional[int] = None,
        seed: int = 0,
    ) -> PartitionValue:
        """log Tr e^{-beta H_u} from eigenvalues or from the typicality estimate of Tr e^{-beta H}."""
        if method == QuantumEngine.DENSE:
            self._require_dimension(p, self.dense_cap, "dense")
            eigvals, _ = _eigensystem(p.geometry, p.S, p.u)
            shifted = -p.beta * (eigvals - eigvals[0])
            log_z = -p.beta * float(eigvals[0]) + float(np.log(np.sum(np.exp(shifted))))
            return PartitionValue(log_z=log_z, method=method)
        self._require_dimension(p, self.stochastic_cap, "stochastic")
        if R < 2:
            raise ValueError(f"Trace estimate needs R >= 2 (got {R})")
        den, _, _, log_pref, _ = self._propagate_samples(p, R, degree, seed)
        mean = float(den.mean())
        stderr = float(den.std(ddof=1) / np.sqrt(R))
        return PartitionValue(log_z=float(np.log(mean)) + 2.0 * log_pref, method=method, stderr=stderr / mean)

    def rp_gram(
        self, p: GibbsParams, r: Reflection, observables: Sequence[OperatorDescriptor]
    ) -> GramReport:
        """
        Gram matrix M_ab = <A_a theta(A_b)> for S3-product observables on T+.

        theta moves each S3 factor to its mirror site. All factors are diagonal in the
        computational basis, so M = Phi^T diag(rho) Theta with Phi_{b a} = A_a(b).
        """
        if not observables:
            raise ValueError("Gram matrix needs at least one observable")
        self._require_dimension(p, self.dense_cap, "dense")
        if not p.reflection_positive:
            logger.warning(f"u = {p.u} > 0: reflection positivity is not claimed, Gram check is exploratory")
        plus, _ = reflection_halves(p.geometry, r)
        image = reflection_index_map(p.geometry, r)
        for obs in observables:
            outside = [s for s in obs.sites if not plus.mask[s]]
            if outside:
                raise ValueError(f"Observable domain {obs.sites} not contained in T+ (sites {outside})")
        diag = _boltzmann_diagonal(p)
        m = s3_diagonal(p.S, p.n_sites)
        phi = np.column_stack([_product_values(m, obs.sites, obs.coefficient) for obs in observables])
        theta = np.column_stack(
            [_product_values(m, tuple(int(image[s]) for s in obs.sites), obs.coefficient) for obs in observables]
        )
        gram = (phi * diag[:, np.newaxis]).T @ theta
        symmetry_error = float(np.max(np.abs(gram - gram.T)))
        sym = 0.5 * (gram + gram.T)
        diag_g = np.diag(sym)
        cs = float(np.max(sym**2 - np.outer(diag_g, diag_g)))
        min_eig = float(np.linalg.eigvalsh(sym)[0])
        logger.info(f"Gram check: {len(observables)} observables, min eig {min_eig:.3e}, symmetry {symmetry_error:.1e}")
        return GramReport(
            min_eigenvalue=min_eig,
            symmetry_error=symmetry_error,
            cauchy_schwarz_violation=cs,
            n_observables=len(observables),
            matrix=gram.tolist(),
        )

    def rp_gram_min_eig(self, p: GibbsParams, r: Reflection, observables: Sequence[OperatorDescriptor]) -> float:
        return self.rp_gram(p, r, observables).min_eigenvalue


def _product_values(m: np.ndarray, sites: Sequence[int], coefficient: float) -> np.ndarray:
    values = np.full(m.shape[1], coefficient, dtype=float)
    for s in sites:
        values = values * m[s]
    return values


def random_half_observables(
    g: TorusGeometry, r: Reflection, count: int, seed: int, max_factors: int = 3
) -> List[OperatorDescriptor]:
    """
    The identity followed by count - 1 random +-1-coefficient S3 products over T+.
    """
    if count < 1:
        raise ValueError("Need at least one observable")
    plus, _ = reflection_halves(g, r)
    sites = plus.indices()
    rng = np.random.default_rng(seed)
    observables = [OperatorDescriptor()]
    for _ in range(count - 1):
        k = int(rng.integers(1, min(max_factors, len(sites)) + 1))
        chosen = tuple(sorted(int(s) for s in rng.choice(sites, size=k, replace=False)))
        observables.append(OperatorDescriptor(coefficient=float(rng.choice([-1.0, 1.0])), sites=chosen))
    return observables
