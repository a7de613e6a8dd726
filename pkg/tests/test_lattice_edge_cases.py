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
from rpmono.lattice import Reflection, VertexSet, build_rectangular_torus, build_torus, shell_S


def test_reflection_through_rejects_non_half_integer() -> None:
    with pytest.raises(ValueError, match="half-integer"):
        Reflection.through(0, 0.25)


def test_reflection_validate_for_rejects_bad_axis() -> None:
    g = build_torus(2, 4)
    with pytest.raises(ValueError):
        Reflection(axis=2, twice_offset=1).validate_for(g)
    with pytest.raises(ValueError):
        Reflection(axis=0, twice_offset=8).validate_for(g)


def test_vertex_validation() -> None:
    g = build_torus(2, 4)
    with pytest.raises(ValueError):
        g.validate_vertex((4, 0))
    with pytest.raises(ValueError):
        g.validate_vertex((0,))


def test_vertex_set_mask_shape_checked() -> None:
    g = build_torus(1, 4)
    with pytest.raises(ValueError):
        VertexSet(geometry=g, mask=np.zeros(3, dtype=bool))
    with pytest.raises(ValueError):
        VertexSet(geometry=g, mask=np.zeros(4, dtype=int))


def test_shell_radius_bounds() -> None:
    g = build_torus(2, 4)
    with pytest.raises(ValueError, match="Shell radius"):
        shell_S(g, 3)
    with pytest.raises(ValueError, match="Shell radius"):
        shell_S(g, -1)
    assert len(shell_S(g, 2)) == 16


def test_per_axis_shell_on_rectangle() -> None:
    g = build_rectangular_torus((4, 2))
    assert len(shell_S(g, (1, 0)).complement()) == 4
