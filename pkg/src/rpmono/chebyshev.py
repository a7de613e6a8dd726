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
Chebyshev propagation of e^{-beta H / 2} for a matrix-free Hamiltonian.

With the spectrum inside [a, b], write H = c + h y with c = (a + b)/2, h = (b - a)/2 and
y in [-1, 1]. Then e^{-beta H / 2} = e^{-beta c / 2} e^{-tau y} with tau = beta h / 2 and

    e^{-tau y} = I_0(tau) T_0(y) + 2 sum_{k >= 1} (-1)^k I_k(tau) T_k(y).

Coefficients are taken from the exponentially scaled Bessel function `ive`, so the
overall factor e^{-beta c / 2 + tau} is returned separately as a logarithm.
"""

from typing import Callable, Optional, Tuple

import numpy as np
from scipy.special import ive

from rpmono.exceptions import ConvergenceError

TAIL_TOL = 1e-12
MAX_DEGREE = 200_000

Operator = Callable[[np.ndarray], np.ndarray]


def exp_coefficients(tau: float, degree: int) -> np.ndarray:
    """Scaled coefficients a_k e^{-tau}, k = 0..degree, of e^{-tau y} in Chebyshev polynomials."""
    if tau < 0:
        raise ValueError(f"tau must be non-negative (got {tau})")
    k = np.arange(degree + 1)
    coeffs = 2.0 * ((-1.0) ** k) * ive(k, tau)
    coeffs[0] = ive(0, tau)
    return np.asarray(coeffs, dtype=float)


def tail_ratio(tau: float, degree: int) -> float:
    """|a_{degree+1}| / a_0: the first dropped coefficient relative to the leading one."""
    return float(2.0 * ive(degree + 1, tau) / ive(0, tau))


def auto_degree(tau: float, tol: float = TAIL_TOL) -> int:
    """
    Smallest degree whose dropped coefficients are all below tol relative to a_0.

    Beyond k = tau the coefficients decrease monotonically, so the first index past tau
    under the threshold bounds the whole tail.
    """
    if tau == 0.0:
        return 0
    k = int(np.ceil(tau))
    step = max(16, int(np.sqrt(tau)) + 16)
    a0 = ive(0, tau)
    while k <= MAX_DEGREE:
        ks = np.arange(k, k + step)
        ratios = 2.0 * ive(ks, tau) / a0
        below = np.flatnonzero(ratios < tol)
        if below.size:
            return max(0, int(ks[below[0]]) - 1)
        k += step
    raise ConvergenceError(
        f"No Chebyshev degree up to {MAX_DEGREE} reaches tail {tol} at tau={tau}",
        achieved_tol=tail_ratio(tau, MAX_DEGREE),
        last_size=MAX_DEGREE,
    )


def resolve_degree(tau: float, degree: Optional[int], tol: float = TAIL_TOL) -> int:
    """Validates a requested degree against the tail test, or picks one automatically."""
    if degree is None:
        return auto_degree(tau, tol)
    if degree < 0:
        raise ValueError(f"Chebyshev degree must be non-negative (got {degree})")
    ratio = tail_ratio(tau, degree) if tau > 0 else 0.0
    if ratio >= tol:
        raise ValueError(
            f"Chebyshev degree {degree} too small for tau={tau:.4g}: tail coefficient {ratio:.3g} >= {tol:g}"
        )
    return degree


def apply_exp_half(
    apply_h: Operator,
    v: np.ndarray,
    beta: float,
    bounds: Tuple[float, float],
    degree: Optional[int] = None,
    tol: float = TAIL_TOL,
) -> Tuple[np.ndarray, float, int]:
    """
    Propagates v (shape (dim,) or (dim, R)) through e^{-beta H / 2}.

    Returns:
        (w, log_prefactor, degree) with e^{-beta H / 2} v = e^{log_prefactor} w.
    """
    lo, hi = bounds
    if hi <= lo:
        raise ValueError(f"Invalid spectral interval [{lo}, {hi}]")
    centre = 0.5 * (hi + lo)
    half_width = 0.5 * (hi - lo)
    tau = 0.5 * beta * half_width
    degree = resolve_degree(tau, degree, tol)
    coeffs = exp_coefficients(tau, degree)
    log_prefactor = -0.5 * beta * centre + tau

    t_prev = v
    w = coeffs[0] * t_prev
    if degree == 0:
        return w, log_prefactor, degree
    t_curr = (apply_h(v) - centre * v) / half_width
    w = w + coeffs[1] * t_curr
    for k in range(2, degree + 1):
        t_next = 2.0 * (apply_h(t_curr) - centre * t_curr) / half_width - t_prev
        w = w + coeffs[k] * t_next
        t_prev, t_curr = t_curr, t_next
    return w, log_prefactor, degree
