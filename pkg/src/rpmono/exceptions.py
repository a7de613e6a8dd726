# Copyright (c) 2025 CoReason, Inc.
#
# This software is proprietary and dual-licensed.
# Licensed under the Prosperity Public License 3.0 (the "License").
# A copy of the license is available at https://prosperitylicense.com/versions/3.0.0
# For details, see the LICENSE file.
# Commercial use beyond a 30-day trial requires a separate license.
#
# Source Code: https://github.com/CoReason-AI/rpmono

from typing import Any


class CapacityExceededError(Exception):
    """
    Raised when a request exceeds a configured computational capacity
    (Hilbert dimension cap, enumeration budget).
    """

    def __init__(self, message: str, resource: str, limit: float, requested: float) -> None:
        super().__init__(message)
        self.resource = resource
        self.limit = limit
        self.requested = requested


class ConvergenceError(Exception):
    """
    Raised when an iterative procedure cannot reach its tolerance within its budget.
    """

    def __init__(self, message: str, achieved_tol: float, last_size: int) -> None:
        super().__init__(message)
        self.achieved_tol = achieved_tol
        self.last_size = last_size


class NonErgodicPresetError(Exception):
    """
    Raised when a weight function vanishes on a pattern the worm sampler must visit.
    """

    def __init__(self, message: str, preset: str) -> None:
        super().__init__(message)
        self.preset = preset


class PreconditionError(ValueError):
    """
    Raised when a checker input violates the hypothesis of the inequality under test.
    """

    def __init__(self, message: str, name: str, value: Any) -> None:
        super().__init__(message)
        self.name = name
        self.value = value
