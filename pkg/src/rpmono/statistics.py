# Copyright (c) 2025 CoReason, Inc.
#
# This software is proprietary and dual-licensed.
# Licensed under the Prosperity Public License 3.0 (the "License").
# A copy of the license is available at https://prosperitylicense.com/versions/3.0.0
# For details, see the LICENSE file.
# Commercial use beyond a 30-day trial requires a separate license.
#
# Source Code: https://github.com/CoReason-AI/rpmono

"""Error estimation helpers shared by the stochastic engines and the checker."""

import math
from typing import Sequence, Tuple

import numpy as np
from scipy.stats import norm, poisson

from rpmono.exceptions import ConvergenceError

# Expected-by-chance failure counts at or above this are never treated as noise.
NOISE_MAX_FAILURES = 5
NOISE_P_VALUE = 1e-3
MIN_FILLED_SAMPLES = 2


def jackknife_ratio(numerators: np.ndarray, denominators: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """
    Delete-one jackknife for the ratio of sums sum_r num_r / sum_r den_r.

    Args:
        numerators: Shape (R,) or (R, k); one row per sample.
        denominators: Shape (R,).

    Returns:
        (estimate, stderr), each of shape numerators.shape[1:].

    Raises:
        ConvergenceError: Fewer than two samples carry denominator weight, so some
            leave-one-out ratio is undefined.
    """
    num = np.asarray(numerators, dtype=float)
    den = np.asarray(denominators, dtype=float)
    n = den.shape[0]
    if n < 2:
        raise ValueError("Jackknife needs at least 2 samples")
    if num.shape[0] != n:
        raise ValueError("Numerator and denominator sample counts differ")
    total_den = den.sum()
    leave_out_den = total_den - den
    filled = int(np.count_nonzero(den))
    if filled < MIN_FILLED_SAMPLES or np.any(leave_out_den == 0.0):
        raise ConvergenceError(
            f"Denominator weight in {filled} of {n} samples; the jackknife needs at least {MIN_FILLED_SAMPLES}",
            achieved_tol=math.inf,
            last_size=n,
        )
    total_num = num.sum(axis=0)
    estimate = total_num / total_den
    shape = (n,) + (1,) * (num.ndim - 1)
    leave_out = (total_num[np.newaxis, ...] - num) / leave_out_den.reshape(shape)
    ave = leave_out.mean(axis=0)
    variance = np.sum((leave_out - ave) ** 2, axis=0) * ((n - 1) / n)
    return estimate, np.sqrt(variance)


def batch_sums(series: np.ndarray, n_batches: int) -> np.ndarray:
    """Sums a time series (T, ...) over n_batches contiguous equal blocks; a remainder is dropped."""
    series = np.asarray(series, dtype=float)
    if n_batches < 2:
        raise ValueError("Batched means need at least 2 batches")
    size = series.shape[0] // n_batches
    if size == 0:
        raise ValueError(f"Series of length {series.shape[0]} too short for {n_batches} batches")
    trimmed = series[: size * n_batches]
    return trimmed.reshape((n_batches, size) + series.shape[1:]).sum(axis=1)


def combined_stderr(coefficients: Sequence[float], errors: Sequence[float]) -> float:
    """Standard error of sum_j c_j X_j for independent X_j: sqrt(sum (c_j e_j)^2)."""
    c = np.asarray(coefficients, dtype=float)
    e = np.asarray(errors, dtype=float)
    return float(np.sqrt(np.sum((c * e) ** 2)))


def expected_false_failures(n_records: int, sigma_k: float) -> float:
    """Expected number of one-sided sigma_k exceedances among n_records unbiased records."""
    return float(n_records * norm.sf(sigma_k))


def consistent_with_noise(n_failed: int, n_records: int, sigma_k: float) -> bool:
    """
    Whether n_failed statistical failures are plausible by chance.

    True when 0 < n_failed < 5 and a Poisson count with the expected false-failure mean
    reaches n_failed with probability at least 1e-3.
    """
    if n_failed <= 0 or n_failed >= NOISE_MAX_FAILURES:
        return False
    mean = expected_false_failures(n_records, sigma_k)
    return bool(poisson.sf(n_failed - 1, mean) >= NOISE_P_VALUE)
