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
from rpmono import chebyshev
from rpmono.chebyshev import apply_exp_half, auto_degree, exp_coefficients, resolve_degree, tail_ratio
from rpmono.exceptions import ConvergenceError
from scipy.linalg import expm


def test_zero_tau_needs_degree_zero() -> None:
    assert auto_degree(0.0) == 0
    assert np.allclose(exp_coefficients(0.0, 3), [1.0, 0.0, 0.0, 0.0])


def test_auto_degree_meets_tail() -> None:
    for tau in (0.5, 3.0, 40.0):
        degree = auto_degree(tau)
        assert tail_ratio(tau, degree) < 1e-12
        assert degree >= int(np.ceil(tau)) - 1


def test_resolve_degree_rejects_short_expansion() -> None:
    with pytest.raises(ValueError, match="too small"):
        resolve_degree(10.0, 2)
    with pytest.raises(ValueError, match="non-negative"):
        resolve_degree(1.0, -1)
    assert resolve_degree(1.0, 60) == 60


def test_negative_tau_rejected() -> None:
    with pytest.raises(ValueError):
        exp_coefficients(-1.0, 4)


def test_apply_exp_half_matches_expm() -> None:
    """Chebyshev propagation agrees with scipy's matrix exponential."""
    rng = np.random.default_rng(1)
    a = rng.standard_normal((12, 12))
    h = 0.5 * (a + a.T)
    eig = np.linalg.eigvalsh(h)
    beta = 1.3
    v = rng.standard_normal((12, 3))
    w, log_pref, degree = apply_exp_half(lambda x: h @ x, v, beta, (eig[0] - 0.1, eig[-1] + 0.1))
    assert degree > 0
    exact = expm(-0.5 * beta * h) @ v
    assert np.max(np.abs(np.exp(log_pref) * w - exact)) < 1e-9


def test_apply_exp_half_rejects_empty_interval() -> None:
    with pytest.raises(ValueError, match="interval"):
        apply_exp_half(lambda x: x, np.ones(2), 1.0, (1.0, 1.0))


def test_auto_degree_gives_up_past_max_degree(monkeypatch: pytest.MonkeyPatch) -> None:
    monkeypatch.setattr(chebyshev, "MAX_DEGREE", 64)
    with pytest.raises(ConvergenceError, match="No Chebyshev degree") as info:
        auto_degree(2.0, tol=0.0)
    assert info.value.last_size == 64


def test_zero_beta_propagation_is_identity() -> None:
    v = np.arange(4.0)
    w, log_pref, degree = apply_exp_half(lambda x: 3.0 * x, v, 0.0, (-1.0, 5.0))
    assert degree == 0
    assert log_pref == 0.0
    assert np.array_equal(w, v)
