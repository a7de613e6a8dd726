# Copyright (c) 2025 CoReason, Inc.
#
# This software is proprietary and dual-licensed.
# Licensed under the Prosperity Public License 3.0 (the "License").
# A copy of the license is available at https://prosperitylicense.com/versions/3.0.0
# For details, see the LICENSE file.
# Commercial use beyond a 30-day trial requires a separate license.
#
# Source Code: https://github.com/CoReason-AI/rpmono

from rpmono.enumeration import Enumerator, even_subgraph_partition
from rpmono.exceptions import CapacityExceededError, ConvergenceError, NonErgodicPresetError, PreconditionError
from rpmono.infrared_bounds import J_limit, J_sum, c1_bound, infrared_report, min_spin_threshold
from rpmono.lattice import EdgeConvention, Reflection, TorusGeometry, VertexSet, box_Q, build_torus, shell_S
from rpmono.models import CheckConfig, CheckReport, PathKind, Provenance, TwoPointTable
from rpmono.monotonicity_checker import run_checks
from rpmono.presets import crossing_on, get_preset, loop_on, table_weight
from rpmono.quantum_gibbs import GibbsEngine, GibbsParams
from rpmono.random_path import PathConfig, RPMParams
from rpmono.worm import worm_estimate

__version__ = "0.1.0"

__all__ = [
    "__version__",
    "build_torus",
    "TorusGeometry",
    "EdgeConvention",
    "Reflection",
    "VertexSet",
    "box_Q",
    "shell_S",
    "GibbsEngine",
    "GibbsParams",
    "RPMParams",
    "PathConfig",
    "PathKind",
    "get_preset",
    "loop_on",
    "crossing_on",
    "table_weight",
    "Enumerator",
    "even_subgraph_partition",
    "worm_estimate",
    "J_sum",
    "J_limit",
    "c1_bound",
    "min_spin_threshold",
    "infrared_report",
    "run_checks",
    "CheckConfig",
    "CheckReport",
    "TwoPointTable",
    "Provenance",
    "CapacityExceededError",
    "ConvergenceError",
    "NonErgodicPresetError",
    "PreconditionError",
]
