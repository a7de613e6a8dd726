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
Spin-S matrices in the S3-diagonal basis (descending eigenvalues) and matrix-free
embedding of one- and two-site operators into the many-body space.

A many-body basis index is sum_s k_s D^s with D = 2S + 1 and digit k_s = S - m_s, so
site s lives on tensor axis n - 1 - s of the C-ordered reshape (D,)*n.
"""

from enum import Enum
from functools import lru_cache

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from rpmono.lattice import TorusGeometry


class LocalOperator(str, Enum):
    S1 = "S1"
    S2 = "S2"
    S3 = "S3"
    IDENTITY = "identity"


class SpinMatrices(BaseModel):
    """S1, S2, S3 for one spin S; S1 real symmetric, S2 imaginary antisymmetric, S3 diagonal."""

    S: float
    S1: np.ndarray
    S2: np.ndarray
    S3: np.ndarray

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    @property
    def dimension(self) -> int:
        return int(round(2 * self.S)) + 1

    def local(self, op: LocalOperator) -> np.ndarray:
        if op == LocalOperator.S1:
            return self.S1
        if op == LocalOperator.S2:
            return self.S2
        if op == LocalOperator.S3:
            return self.S3
        return np.eye(self.dimension, dtype=complex)


class SiteOperator(BaseModel):
    """A single-site operator acting as `local` on the factor at vertex index `site`."""

    site: int = Field(..., ge=0)
    local: LocalOperator
    S: float = Field(..., gt=0.0)

    model_config = ConfigDict(frozen=True)


def validate_spin(S: float) -> float:
    """Returns S if 2S is a positive integer, else raises ValueError."""
    twice = 2.0 * S
    if S <= 0 or abs(twice - round(twice)) > 1e-12:
        raise ValueError(f"Spin S must be a positive half-integer (got {S})")
    return round(twice) / 2.0


def local_dimension(S: float) -> int:
    return int(round(2 * validate_spin(S))) + 1


def hilbert_dimension(S: float, n_sites: int) -> int:
    """(2S + 1)^n as an exact Python integer."""
    return local_dimension(S) ** n_sites


@lru_cache(maxsize=16)
def spin_matrices(S: float) -> SpinMatrices:
    """
    Ladder construction of the spin-S representation.

    S+ |m> = sqrt(S(S+1) - m(m+1)) |m+1>, S1 = (S+ + S-)/2, S2 = (S+ - S-)/(2i).
    """
    S = validate_spin(S)
    D = int(round(2 * S)) + 1
    m = S - np.arange(D)
    raise_op = np.zeros((D, D), dtype=complex)
    # |m_k> -> |m_{k-1}>, one step up in m
    for k in range(1, D):
        raise_op[k - 1, k] = np.sqrt(S * (S + 1) - m[k] * (m[k] + 1))
    lower_op = raise_op.conj().T
    s1 = (raise_op + lower_op) / 2.0
    s2 = (raise_op - lower_op) / 2.0j
    s3 = np.diag(m).astype(complex)
    for mat in (s1, s2, s3):
        mat.setflags(write=False)
    return SpinMatrices(S=S, S1=s1, S2=s2, S3=s3)


def commutator_error(sm: SpinMatrices) -> float:
    """max over cyclic (a, b, c) of ||[Sa, Sb] - i Sc||_max."""
    ops = [sm.S1, sm.S2, sm.S3]
    worst = 0.0
    for a in range(3):
        b, c = (a + 1) % 3, (a + 2) % 3
        comm = ops[a] @ ops[b] - ops[b] @ ops[a]
        worst = max(worst, float(np.max(np.abs(comm - 1j * ops[c]))))
    return worst


def casimir_error(sm: SpinMatrices) -> float:
    """||S1^2 + S2^2 + S3^2 - S(S+1) 1||_max."""
    total = sm.S1 @ sm.S1 + sm.S2 @ sm.S2 + sm.S3 @ sm.S3
    return float(np.max(np.abs(total - sm.S * (sm.S + 1) * np.eye(sm.dimension))))


def spectrum_error(sm: SpinMatrices) -> float:
    """Largest deviation of any Sa from hermiticity or from the spectrum {-S, ..., S}."""
    expected = np.arange(-sm.S, sm.S + 0.5, 1.0)
    worst = 0.0
    for mat in (sm.S1, sm.S2, sm.S3):
        worst = max(worst, float(np.max(np.abs(mat - mat.conj().T))))
        eig = np.sort(np.linalg.eigvalsh(mat))
        worst = max(worst, float(np.max(np.abs(eig - expected))))
    return worst


def _as_tensor(v: np.ndarray, D: int, n_sites: int) -> np.ndarray:
    if v.shape[0] != D**n_sites:
        raise ValueError(f"State has dimension {v.shape[0]}, expected {D}^{n_sites} = {D**n_sites}")
    return v.reshape((D,) * n_sites + (-1,))


def apply_local(matrix: np.ndarray, site: int, n_sites: int, v: np.ndarray) -> np.ndarray:
    """
    Applies a D x D matrix at one site to v of shape (dim,) or (dim, R).

    Cost O(dim * D) per column; no global matrix is formed.
    """
    D = matrix.shape[0]
    tensor = _as_tensor(v, D, n_sites)
    axis = n_sites - 1 - site
    out = np.tensordot(matrix, tensor, axes=([1], [axis]))
    return np.moveaxis(out, 0, axis).reshape(v.shape)


def apply_two_site(block: np.ndarray, x: int, y: int, n_sites: int, v: np.ndarray) -> np.ndarray:
    """
    Applies a D^2 x D^2 operator on sites (x, y), x != y, to v of shape (dim,) or (dim, R).

    The block acts on the ordered product space C^D (site x) tensor C^D (site y), i.e. it
    has the layout of np.kron(A_x, B_y).
    """
    if x == y:
        raise ValueError("Two-site operator needs distinct sites")
    D = int(round(np.sqrt(block.shape[0])))
    tensor = _as_tensor(v, D, n_sites)
    ax, ay = n_sites - 1 - x, n_sites - 1 - y
    out = np.tensordot(block.reshape(D, D, D, D), tensor, axes=([2, 3], [ax, ay]))
    return np.moveaxis(out, [0, 1], [ax, ay]).reshape(v.shape)


def apply_site_operator(op: SiteOperator, g: TorusGeometry, v: np.ndarray) -> np.ndarray:
    """Image of v under op acting on the torus Hilbert space (2S+1)^|T|."""
    if op.site >= g.n_vertices:
        raise ValueError(f"Site {op.site} outside torus with {g.n_vertices} vertices")
    if op.local == LocalOperator.IDENTITY:
        _as_tensor(v, local_dimension(op.S), g.n_vertices)
        return v.copy()
    sm = spin_matrices(op.S)
    return apply_local(sm.local(op.local), op.site, g.n_vertices, v)


def s3_diagonal(S: float, n_sites: int) -> np.ndarray:
    """
    Diagonal of S3_s in the computational basis for every site s: shape (n_sites, dim).

    Row s holds m_s(b) = S - k_s(b) for each basis index b.
    """
    D = local_dimension(S)
    index = np.arange(D**n_sites, dtype=np.int64)
    rows = np.empty((n_sites, D**n_sites))
    for s in range(n_sites):
        rows[s] = S - (index // D**s) % D
    return rows
