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
Infrared-bound constants: the dispersion eps(k), the momentum sum J_{d,L}, its large-L
extrapolation, the Cesaro lower bound c_1 and the minimal-spin threshold.

J_{d,L} = L^{-d} sum_{k != o} sqrt(eps(k + pi) / eps(k)) only depends on the folded
indices min(n_i, L - n_i) up to permutation, so the sum runs over multisets of folded
indices weighted by their number of preimages.
"""

import math
from typing import Dict, List, Optional, Tuple

import numpy as np
from scipy.special import comb

from rpmono.exceptions import ConvergenceError
from rpmono.models import IRReport, ThresholdConvention, ThresholdResult
from rpmono.spin_algebra import validate_spin
from rpmono.utils.logger import logger

# Minimal spins quoted for (u, d); compared against, never assumed.
REFERENCE_THRESHOLDS: Dict[Tuple[float, int], float] = {
    (0.0, 3): 8.0,
    (-1.0, 3): 11.0,
}

J_LIMIT_START = 16
MAX_MULTISETS = 5_000_000
MAX_SPIN_SCAN = 100_000


def epsilon_dispersion(k: np.ndarray) -> float:
    """eps(k) = 2 sum_i (1 - cos k_i), in [0, 4d]."""
    k = np.atleast_1d(np.asarray(k, dtype=float))
    return float(2.0 * np.sum(1.0 - np.cos(k)))


def multiset_count(d: int, L: int) -> int:
    """Number of multisets of size d drawn from the L/2 + 1 folded indices."""
    return int(comb(L // 2 + d, d, exact=True))


def _folded_terms(d: int, L: int) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    (A, B, W) over multisets of folded indices: A = sum_i (1 - cos k_i),
    B = sum_i (1 + cos k_i), W = number of momenta k mapping to the multiset.

    1 + cos(2 pi n / L) is evaluated as 1 - cos(2 pi (L/2 - n) / L) so that B vanishes
    exactly at k = pi.
    """
    half = L // 2
    n = np.arange(half + 1)
    a = 1.0 - np.cos(2.0 * np.pi * n / L)
    b = 1.0 - np.cos(2.0 * np.pi * (half - n) / L)
    a[0] = 0.0
    b[half] = 0.0
    preimages = np.where((n == 0) | (n == half), 1.0, 2.0)

    last = n.copy()
    run = np.ones(half + 1, dtype=np.int64)
    A = a.copy()
    B = b.copy()
    W = preimages.copy()
    for _ in range(d - 1):
        reps = half - last + 1
        parent = np.repeat(np.arange(last.size), reps)
        offsets = np.arange(int(reps.sum())) - np.repeat(np.cumsum(reps) - reps, reps)
        j = last[parent] + offsets
        run = np.where(offsets == 0, run[parent] + 1, 1)
        # W carries prod(preimages) / prod(run lengths)!, completed by d! below
        W = W[parent] * preimages[j] / run
        A = A[parent] + a[j]
        B = B[parent] + b[j]
        last = j
    return A, B, W * math.factorial(d)


def J_sum(d: int, L: int) -> float:
    """
    J_{d,L} = (1/L^d) sum_{k in dual lattice, k != o} sqrt(eps(k + pi) / eps(k)).

    Args:
        d: Dimension, >= 1.
        L: Even side length, >= 2.
    """
    if d < 1:
        raise ValueError(f"d must be >= 1 (got {d})")
    if L < 2 or L % 2 != 0:
        raise ValueError(f"L must be even and >= 2 (got {L})")
    count = multiset_count(d, L)
    if count > MAX_MULTISETS:
        raise ValueError(f"J_sum(d={d}, L={L}) needs {count} terms, above {MAX_MULTISETS}")
    A, B, W = _folded_terms(d, L)
    keep = A > 0.0
    terms = W[keep] * np.sqrt(B[keep] / A[keep])
    return float(np.sum(np.sort(terms)) / float(L) ** d)


def richardson(coarse: float, fine: float, order: float) -> float:
    """Two-point Richardson step for an error ~ L^{-order} between L and 2L."""
    factor = 2.0**order
    return fine + (fine - coarse) / (factor - 1.0)


def J_limit(d: int, tol: float = 1e-3, max_L: Optional[int] = None) -> Tuple[float, float]:
    """
    Extrapolates J_{d,L} to L -> infinity over L = 16, 32, 64, ...

    The lattice sum misses the integrable 1/|k| singularity at the origin by
    O(L^{-(d-1)}), which sets the Richardson order. Iteration stops once successive
    extrapolants differ by less than tol.

    Returns:
        (extrapolated J, achieved tolerance).

    Raises:
        ConvergenceError: the next L would exceed the term budget (or max_L) first.
    """
    if d < 2:
        raise ValueError(f"J_limit needs d >= 2 (got {d})")
    if tol < 1e-4:
        raise ValueError(f"J_limit tolerance must be >= 1e-4 (got {tol})")
    order = float(d - 1)
    L = J_LIMIT_START
    sums: List[float] = [J_sum(d, L)]
    extrapolants: List[float] = []
    achieved = math.inf
    while True:
        next_L = 2 * L
        if multiset_count(d, next_L) > MAX_MULTISETS or (max_L is not None and next_L > max_L):
            raise ConvergenceError(
                f"J_limit(d={d}) reached only {achieved:.3g} > tol={tol:g} by L={L}",
                achieved_tol=achieved,
                last_size=L,
            )
        L = next_L
        sums.append(J_sum(d, L))
        extrapolants.append(richardson(sums[-2], sums[-1], order))
        if len(extrapolants) >= 2:
            achieved = abs(extrapolants[-1] - extrapolants[-2])
            logger.debug(f"J_limit d={d} L={L}: J={sums[-1]:.8f} extrapolant={extrapolants[-1]:.8f}")
            if achieved < tol:
                logger.info(f"J_limit(d={d}) = {extrapolants[-1]:.6f} (achieved {achieved:.2e} at L={L})")
                return extrapolants[-1], achieved


def c1_bound(S: float, u: float, d: int, J: float) -> float:
    """
    Cesaro lower bound M - (sqrt(1 - u) / 2) sqrt(M) J with M = S(S+1)/3.

    d enters only through J.
    """
    S = validate_spin(S)
    if u > 0:
        raise ValueError(f"c1_bound needs u <= 0 (got {u})")
    if d < 1:
        raise ValueError(f"d must be >= 1 (got {d})")
    M = S * (S + 1.0) / 3.0
    return M - 0.5 * math.sqrt(1.0 - u) * math.sqrt(M) * J


def threshold_coefficient(convention: ThresholdConvention, eps: float, d: int) -> float:
    """(1/2 - eps)^{-2d} for vertex_sq, (1/4 - eps/2)^{-2d} for edge_sq."""
    if not 0.0 <= eps < 0.5:
        raise ValueError(f"eps must lie in [0, 1/2) (got {eps})")
    if convention == ThresholdConvention.VERTEX_SQ:
        return float((0.5 - eps) ** (-2 * d))
    return float((0.25 - 0.5 * eps) ** (-2 * d))


def min_spin_threshold(
    u: float,
    d: int,
    J: float,
    convention: ThresholdConvention = ThresholdConvention.VERTEX_SQ,
    eps: float = 0.0,
) -> ThresholdResult:
    """
    Smallest S in {1/2, 1, 3/2, ...} with S^2 + S - (3/4)(1 - u) J^2 C > 0.
    """
    if u > 0:
        raise ValueError(f"min_spin_threshold needs u <= 0 (got {u})")
    coefficient = threshold_coefficient(convention, eps, d)
    target = 0.75 * (1.0 - u) * J**2 * coefficient
    # first half-integer above the positive root of S^2 + S - target
    twice = max(1, int(math.floor(2.0 * (-0.5 + math.sqrt(0.25 + target)))) - 2)
    while twice <= 2 * MAX_SPIN_SCAN:
        S = twice / 2.0
        margin = S * S + S - target
        if margin > 0:
            break
        twice += 1
    else:
        raise ConvergenceError(f"No spin up to {MAX_SPIN_SCAN} meets the threshold", achieved_tol=target, last_size=d)
    reference = REFERENCE_THRESHOLDS.get((float(u), d))
    result = ThresholdResult(
        min_spin=S, margin=margin, coefficient=coefficient, convention=convention, reference=reference
    )
    if result.reproduces_reference is False:
        logger.warning(
            f"{convention.value} threshold gives S={S} for (u={u}, d={d}); quoted reference is {reference}"
        )
    return result


def infrared_report(
    d: int,
    S: float,
    u: float,
    L: Optional[int] = None,
    tol: float = 1e-3,
    convention: ThresholdConvention = ThresholdConvention.VERTEX_SQ,
    eps: float = 0.0,
    min_spin: bool = False,
) -> IRReport:
    """J at fixed L (or extrapolated when L is None), c_1 and optionally the threshold."""
    if L is None:
        J, achieved = J_limit(d, tol)
    else:
        J, achieved = J_sum(d, L), None
    threshold = min_spin_threshold(u, d, J, convention, eps) if min_spin else None
    return IRReport(
        d=d,
        L=L,
        extrapolated=L is None,
        J=J,
        achieved_tol=achieved,
        S=validate_spin(S),
        u=u,
        c1_bound=c1_bound(S, u, d, J),
        convention=convention,
        threshold=threshold,
    )
