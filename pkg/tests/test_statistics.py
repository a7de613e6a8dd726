# Copyright (c) 2025 CoReason, Inc.
#
# This software is proprietary and dual-licensed.
# Licensed under the Prosperity Public License 3.0 (the "License").
# A copy of the license is available at https://prosperitylicense.com/versions/3.0.0
# For details, see the LICENSE file.
# Commercial use beyond a 30-day trial requires a separate license.
#
# Source Code: https://github.com/CoReason-AI/rpmono

import numpy as np
import pytest
from rpmono.exceptions import ConvergenceError
from rpmono.statistics import (
    batch_sums,
    combined_stderr,
    consistent_with_noise,
    expected_false_failures,
    jackknife_ratio,
)


def test_jackknife_ratio_of_constant_samples() -> None:
    """Identical samples give the exact ratio with zero error."""
    num = np.full((5, 2), 2.0)
    den = np.full(5, 4.0)
    estimate, stderr = jackknife_ratio(num, den)
    assert np.allclose(estimate, [0.5, 0.5])
    assert np.allclose(stderr, 0.0)


def test_jackknife_mean_matches_standard_error() -> None:
    """With unit denominators the jackknife error is the usual standard error of the mean."""
    x = np.array([1.0, 2.0, 4.0, 7.0])
    estimate, stderr = jackknife_ratio(x, np.ones(4))
    assert abs(float(estimate) - x.mean()) < 1e-12
    assert abs(float(stderr) - x.std(ddof=1) / 2.0) < 1e-12


def test_jackknife_input_checks() -> None:
    with pytest.raises(ValueError, match="at least 2"):
        jackknife_ratio(np.ones(1), np.ones(1))
    with pytest.raises(ValueError, match="differ"):
        jackknife_ratio(np.ones(3), np.ones(4))


def test_batch_sums_drop_remainder() -> None:
    sums = batch_sums(np.arange(7, dtype=float), 3)
    assert np.allclose(sums, [1.0, 5.0, 9.0])
    with pytest.raises(ValueError, match="too short"):
        batch_sums(np.ones(2), 3)
    with pytest.raises(ValueError, match="2 batches"):
        batch_sums(np.ones(10), 1)


def test_jackknife_over_batch_sums() -> None:
    num = np.ones((8, 3))
    den = np.full(8, 2.0)
    estimate, stderr = jackknife_ratio(batch_sums(num, 4), batch_sums(den, 4))
    assert np.allclose(estimate, 0.5)
    assert np.allclose(stderr, 0.0)


def test_jackknife_refuses_a_single_filled_denominator() -> None:
    """All of the normalisation in one batch leaves every other leave-one-out ratio undefined."""
    num = np.array([[0.0], [0.3], [0.0], [0.1]])
    with pytest.raises(ConvergenceError, match="1 of 4 samples") as info:
        jackknife_ratio(num, np.array([0.0, 2.0, 0.0, 0.0]))
    assert info.value.last_size == 4
    with pytest.raises(ConvergenceError):
        jackknife_ratio(np.zeros(3), np.zeros(3))


def test_jackknife_accepts_two_filled_denominators() -> None:
    estimate, stderr = jackknife_ratio(np.array([1.0, 0.0, 3.0]), np.array([1.0, 0.0, 1.0]))
    assert abs(float(estimate) - 2.0) < 1e-12
    assert np.isfinite(stderr).all()


def test_combined_stderr() -> None:
    assert abs(combined_stderr([1.0, -1.0], [0.3, 0.4]) - 0.5) < 1e-12


def test_noise_classification() -> None:
    assert expected_false_failures(0, 3.0) == 0.0
    assert not consistent_with_noise(0, 1000, 3.0)
    assert consistent_with_noise(1, 1000, 3.0)
    assert not consistent_with_noise(5, 100000, 3.0)
    assert not consistent_with_noise(3, 10, 3.0)
