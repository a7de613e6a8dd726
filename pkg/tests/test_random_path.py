# Copyright (c) 2025 CoReason, Inc.
#
# This software is proprietary and dual-licensed.
# Licensed under the Prosperity Public License 3.0 (the "License").
# A copy of the license is available at https://prosperitylicense.com/versions/3.0.0
# For details, see the LICENSE file.
# Commercial use beyond a 30-day trial requires a separate license.
#
# Source Code: https://github.com/CoReason-AI/rpmono

from itertools import permutations
from typing import Dict, List, Tuple

import pytest
from rpmono.lattice import TorusGeometry, build_torus
from rpmono.models import LocalStats
from rpmono.presets import crossing_on, loop_on
from rpmono.random_path import (
    PathConfig,
    RPMParams,
    component_vertices,
    config_weight,
    local_stats,
    stats_from_elements,
    trace_loops,
)

Elements = Dict[int, Tuple[Tuple[Tuple[int, int], ...], ...]]


def _edge(g: TorusGeometry, x: Tuple[int, ...], axis: int) -> int:
    """Index of the edge from x to x + e_axis."""
    u = g.index(x)
    return next(e for e, (a, _, ax) in enumerate(g.edges) if a == u and ax == axis)


def _config(g: TorusGeometry, N: int, links: Dict[int, Tuple[int, ...]], pairs: Elements) -> PathConfig:
    m = [0] * g.n_edges
    colours: List[Tuple[int, ...]] = [()] * g.n_edges
    for e, cols in links.items():
        m[e] = len(cols)
        colours[e] = cols
    pairings = [pairs.get(x, ()) for x in range(g.n_vertices)]
    return PathConfig(geometry=g, N=N, m=tuple(m), colours=tuple(colours), pairings=tuple(pairings))


@pytest.fixture  # type: ignore
def square() -> TorusGeometry:
    return build_torus(2, 4)


def _unit_square(g: TorusGeometry, N: int = 1, colour: int = 1) -> PathConfig:
    bottom, right = _edge(g, (0, 0), 0), _edge(g, (1, 0), 1)
    top, left = _edge(g, (0, 1), 0), _edge(g, (0, 0), 1)
    pairs: Elements = {
        g.index((0, 0)): (((bottom, 0), (left, 0)),),
        g.index((1, 0)): (((bottom, 0), (right, 0)),),
        g.index((1, 1)): (((right, 0), (top, 0)),),
        g.index((0, 1)): (((top, 0), (left, 0)),),
    }
    return _config(g, N, {e: (colour,) for e in (bottom, right, top, left)}, pairs)


def test_stats_from_elements() -> None:
    """Same-colour pair, unpaired link and cross-colour pair."""
    same = stats_from_elements(2, [((0, 1), (1, 1))])
    assert same == LocalStats(u=(0, 0), v=(1, 0), K=0, n=1, t=0)
    single = stats_from_elements(2, [((0, 2),)])
    assert single.u == (0, 1)
    assert single.n == 1
    cross = stats_from_elements(2, [((0, 1), (1, 2)), ((2, 1), (3, 1))])
    assert cross.K == 1
    assert cross.v == (0, 0)
    assert cross.n == 2


def test_empty_configuration(square: TorusGeometry) -> None:
    w = PathConfig.empty(square, 2)
    p = RPMParams(geometry=square, N=2, beta=0.7, weight=loop_on(2))
    assert config_weight(w, p) == 1.0
    decomposition = trace_loops(w)
    assert decomposition.loops == []
    assert decomposition.walks == []
    assert local_stats(w, (0, 0)) == LocalStats.empty(2)


def test_unit_square_loop(square: TorusGeometry) -> None:
    """A monochromatic unit square has weight beta^4 and is a single loop of length 4."""
    w = _unit_square(square)
    p = RPMParams(geometry=square, N=1, beta=0.5, weight=loop_on(1))
    assert abs(config_weight(w, p) - 0.5**4) < 1e-15
    assert local_stats(w, (1, 1)) == LocalStats(u=(0,), v=(1,), K=0, n=1, t=0)
    decomposition = trace_loops(w)
    assert len(decomposition.loops) == 1
    assert len(decomposition.loops[0]) == 4
    assert decomposition.walks == []
    assert component_vertices(square, decomposition.loops[0]) == {
        square.index(x) for x in [(0, 0), (1, 0), (1, 1), (0, 1)]
    }


def test_vanishing_vertex_weight(square: TorusGeometry) -> None:
    """crossing_on forbids unpaired links, so a lone link has weight zero."""
    e = _edge(square, (0, 0), 0)
    w = _config(square, 2, {e: (1,)}, {square.index((0, 0)): (((e, 0),),), square.index((1, 0)): (((e, 0),),)})
    assert config_weight(w, RPMParams(geometry=square, N=2, beta=1.0, weight=crossing_on(2))) == 0.0
    decomposition = trace_loops(w)
    assert len(decomposition.walks) == 1
    assert set(decomposition.walks[0].ends) == {square.index((0, 0)), square.index((1, 0))}


def test_double_link_loop(square: TorusGeometry) -> None:
    """Two links on one edge paired at both ends: one loop of length 2 and t = 1."""
    e = _edge(square, (0, 0), 0)
    element = (((e, 0), (e, 1)),)
    w = _config(square, 1, {e: (1, 1)}, {square.index((0, 0)): element, square.index((1, 0)): element})
    decomposition = trace_loops(w)
    assert len(decomposition.loops) == 1
    assert len(decomposition.loops[0]) == 2
    assert local_stats(w, (0, 0)).t == 1
    assert local_stats(w, square.index((1, 0))).t == 1
    p = RPMParams(geometry=square, N=1, beta=2.0, weight=loop_on(1))
    assert abs(config_weight(w, p) - 2.0) < 1e-15


def _relabel(w: PathConfig, e: int, sigma: Tuple[int, ...]) -> PathConfig:
    """Moves link i of edge e to position sigma[i], carrying its colour and its pairings along."""
    colours = list(w.colours)
    moved = [0] * w.m[e]
    for i, c in enumerate(w.colours[e]):
        moved[sigma[i]] = c
    colours[e] = tuple(moved)
    pairings = tuple(
        tuple(tuple((f, sigma[i]) if f == e else (f, i) for f, i in element) for element in elements)
        for elements in w.pairings
    )
    return PathConfig(geometry=w.geometry, N=w.N, m=w.m, colours=tuple(colours), pairings=pairings)


def test_weight_ignores_link_labels_within_an_edge(square: TorusGeometry) -> None:
    """A colour-1 square sharing its bottom edge with a colour-2 double link."""
    bottom, right = _edge(square, (0, 0), 0), _edge(square, (1, 0), 1)
    top, left = _edge(square, (0, 1), 0), _edge(square, (0, 0), 1)
    double = ((bottom, 1), (bottom, 2))
    pairs: Elements = {
        square.index((0, 0)): (((bottom, 0), (left, 0)), double),
        square.index((1, 0)): (((bottom, 0), (right, 0)), double),
        square.index((1, 1)): (((right, 0), (top, 0)),),
        square.index((0, 1)): (((top, 0), (left, 0)),),
    }
    links = {bottom: (1, 2, 2), right: (1,), top: (1,), left: (1,)}
    w = _config(square, 2, links, pairs)
    p = RPMParams(geometry=square, N=2, beta=0.5, weight=loop_on(2))
    weight = config_weight(w, p)
    assert abs(weight - 0.5**6 / 6) < 1e-15
    for sigma in permutations(range(3)):
        relabelled = _relabel(w, bottom, sigma)
        assert config_weight(relabelled, p) == weight
        for x in range(square.n_vertices):
            assert local_stats(relabelled, x) == local_stats(w, x)


def test_path_config_validation(square: TorusGeometry) -> None:
    e = _edge(square, (0, 0), 0)
    with pytest.raises(ValueError, match="exactly one element"):
        _config(square, 1, {e: (1,)}, {square.index((0, 0)): (((e, 0),),)})
    with pytest.raises(ValueError, match="colours must lie"):
        _config(square, 1, {e: (2,)}, {square.index((0, 0)): (((e, 0),),), square.index((1, 0)): (((e, 0),),)})
    with pytest.raises(ValueError, match="one entry per edge"):
        PathConfig(geometry=square, N=1, m=(0,), colours=((),), pairings=((),) * 16)
    n_edges = square.n_edges
    with pytest.raises(ValueError, match="one entry per vertex"):
        PathConfig(geometry=square, N=1, m=(0,) * n_edges, colours=((),) * n_edges, pairings=((),))
    with pytest.raises(ValueError, match="must equal m_e"):
        PathConfig(geometry=square, N=1, m=(1,) + (0,) * (n_edges - 1), colours=((),) * n_edges, pairings=((),) * 16)
    triple = (((e, 0), (e, 1), (e, 2)),)
    with pytest.raises(ValueError, match="one or two links"):
        _config(square, 1, {e: (1, 1, 1)}, {square.index((0, 0)): triple, square.index((1, 0)): triple})


def test_params_colour_mismatch(square: TorusGeometry) -> None:
    with pytest.raises(ValueError, match="Weight function has N=2"):
        RPMParams(geometry=square, N=3, beta=1.0, weight=loop_on(2))
    w = PathConfig.empty(build_torus(1, 4), 1)
    with pytest.raises(ValueError, match="torus"):
        config_weight(w, RPMParams(geometry=square, N=1, beta=1.0, weight=loop_on(1)))
