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
from rpmono.lattice import (
    EdgeConvention,
    Reflection,
    ReflectionKind,
    TorusGeometry,
    VertexSet,
    apply_reflections,
    box_Q,
    build_rectangular_torus,
    build_torus,
    difference_table,
    dual_momenta,
    reflect_vertex,
    reflection_halves,
    reflection_image,
    reflection_index_map,
    shell_S,
)


@pytest.fixture  # type: ignore
def square() -> TorusGeometry:
    return build_torus(2, 4)


def test_build_torus_counts() -> None:
    """Vertex and edge counts are L^d and d L^d."""
    g2 = build_torus(2, 4)
    assert g2.n_vertices == 16
    assert g2.n_edges == 32
    g3 = build_torus(3, 4)
    assert g3.n_vertices == 64
    assert g3.n_edges == 192


def test_build_torus_rejects_odd_side() -> None:
    with pytest.raises(ValueError, match="L must be even"):
        build_torus(2, 3)
    with pytest.raises(ValueError, match="L must be even"):
        build_torus(1, 0)


def test_doubled_convention_keeps_coordination() -> None:
    """On L = 2 the doubled convention gives every vertex 2d incident edges."""
    g = build_torus(2, 2)
    assert g.has_doubled_edges
    assert g.n_edges == 8
    assert all(len(inc) == 4 for inc in g.incidence)


def test_simple_convention_dimer() -> None:
    """d = 1, L = 2 simple is a single edge."""
    g = build_torus(1, 2, EdgeConvention.SIMPLE)
    assert g.n_edges == 1
    assert not g.has_doubled_edges
    assert g.neighbour_pairs == [(0, 1)]


def test_index_round_trip(square: TorusGeometry) -> None:
    for i in range(square.n_vertices):
        assert square.index(square.vertex(i)) == i


def test_coordinate_arithmetic(square: TorusGeometry) -> None:
    assert square.wrap((5, -1)) == (1, 3)
    assert square.add((3, 3), (1, 2)) == (0, 1)
    assert square.subtract((0, 0), (1, 0)) == (3, 0)
    assert square.negate((1, 2)) == (3, 2)
    assert square.axis_distance((3, 2)) == (1, 2)
    assert square.unit(1, 3) == (0, 3)


def test_reflect_vertex_examples(square: TorusGeometry) -> None:
    """Edge and vertex reflections along the first axis."""
    half = Reflection.through(0, 0.5)
    assert reflect_vertex(square, half, (0, 0)) == (1, 0)
    assert reflect_vertex(square, half, (2, 1)) == (3, 1)
    whole = Reflection.through(0, 1.0)
    assert reflect_vertex(square, whole, (0, 0)) == (2, 0)


def test_reflection_kind() -> None:
    assert Reflection.through(0, 0.5).kind == ReflectionKind.THROUGH_EDGES
    assert Reflection.through(1, 2.0).kind == ReflectionKind.THROUGH_VERTICES
    assert Reflection.through(0, 1.5).offset == 1.5


def test_reflection_is_involution(square: TorusGeometry) -> None:
    for twice in range(8):
        image = reflection_index_map(square, Reflection(axis=1, twice_offset=twice))
        assert np.array_equal(image[image], np.arange(square.n_vertices))


def test_reflection_halves_through_edges() -> None:
    g = build_torus(1, 4)
    plus, minus = reflection_halves(g, Reflection.through(0, 0.5))
    assert plus.members() == [(1,), (2,)]
    assert minus.members() == [(0,), (3,)]
    assert plus.reflect(Reflection.through(0, 0.5)) == minus


def test_reflection_halves_through_vertices() -> None:
    """Fixed points of a vertex reflection go to T+."""
    g = build_torus(1, 4)
    plus, minus = reflection_halves(g, Reflection.through(0, 0.0))
    assert plus.members() == [(0,), (1,), (2,)]
    assert minus.members() == [(3,)]


def test_reflection_image_staircase(square: TorusGeometry) -> None:
    one = reflection_image(square, (1, 0))
    assert one == [Reflection.through(0, 0.5)]
    assert apply_reflections(square, one, (0, 0)) == (1, 0)
    two = reflection_image(square, (1, 1))
    assert len(two) == 2
    assert apply_reflections(square, two, (0, 0)) == (1, 1)
    far = reflection_image(square, (3, 2), order=[1, 0])
    assert apply_reflections(square, far, (0, 0)) == (3, 2)


def test_dual_momenta() -> None:
    k = dual_momenta(build_torus(1, 4))
    assert np.allclose(k[:, 0], [0.0, np.pi / 2, np.pi, 3 * np.pi / 2])
    assert dual_momenta(build_torus(2, 2)).shape == (4, 2)


def test_box_Q_examples(square: TorusGeometry) -> None:
    assert box_Q(square, (1, 1)).members() == [(0, 0), (0, 1), (1, 0), (1, 1)]
    assert box_Q(square, (0, 0)).members() == [(0, 0)]
    assert len(box_Q(build_torus(1, 4), (2,))) == 4


def test_shell_S_examples(square: TorusGeometry) -> None:
    inner = shell_S(square, 1).complement()
    assert inner.members() == [(1, 1), (1, 2), (2, 1), (2, 2)]
    assert len(shell_S(square, 0)) == 0
    assert len(shell_S(build_torus(3, 6), 1).complement()) == 64


def test_difference_table(square: TorusGeometry) -> None:
    table = difference_table(square)
    a, b = square.index((3, 1)), square.index((1, 2))
    assert table[a, b] == square.index((2, 1))
    assert np.all(np.diag(table) == 0)


def test_vertex_set_operations(square: TorusGeometry) -> None:
    a = VertexSet.from_vertices(square, [(0, 0), (1, 0)])
    b = VertexSet.from_vertices(square, [(1, 0), (2, 0)])
    assert len(a.union(b)) == 3
    assert a.intersection(b).members() == [(1, 0)]
    assert len(a.complement()) == 14
    assert (0, 0) in a
    assert (2, 0) not in a


def test_rectangular_torus_is_flagged() -> None:
    g = build_rectangular_torus((4, 2))
    assert g.non_paper_geometry
    assert g.L is None
    assert g.label == "4x2"
    assert g.n_vertices == 8


def test_geometry_rejects_malformed_input(square: TorusGeometry) -> None:
    with pytest.raises(ValueError, match="dimension"):
        TorusGeometry(shape=())
    with pytest.raises(ValueError, match="dimension"):
        build_torus(0, 4)
    with pytest.raises(ValueError, match="L must be even"):
        build_rectangular_torus((4, 3))
    with pytest.raises(ValueError, match="out of range"):
        square.vertex(16)
    with pytest.raises(ValueError, match="coordinates"):
        square.index((1, 1, 1))
    with pytest.raises(ValueError, match="outside torus"):
        square.index((4, 0))
    with pytest.raises(ValueError, match="permutation"):
        reflection_image(square, (1, 1), order=[0, 0])


def test_reflection_validation(square: TorusGeometry) -> None:
    with pytest.raises(ValueError, match="half-integer"):
        Reflection.through(0, 0.3)
    with pytest.raises(ValueError, match="axis"):
        reflect_vertex(square, Reflection(axis=2, twice_offset=1), (0, 0))
    with pytest.raises(ValueError, match="offset"):
        reflection_index_map(square, Reflection(axis=0, twice_offset=8))


def test_shell_radius_per_axis() -> None:
    g = build_rectangular_torus((4, 2))
    assert len(shell_S(g, [1, 0]).complement()) == 4
    with pytest.raises(ValueError, match="Shell radius"):
        shell_S(g, 2)


def test_vertex_set_membership_and_hashing(square: TorusGeometry) -> None:
    a = VertexSet.from_vertices(square, [(0, 0)])
    b = VertexSet.from_vertices(square, [(0, 0)])
    assert [0, 0] not in a
    assert len({a, b}) == 1
    assert a != "(0, 0)"
    assert square.label == "4"
    with pytest.raises(ValueError, match="boolean array"):
        VertexSet(geometry=square, mask=np.zeros(4, dtype=bool))
