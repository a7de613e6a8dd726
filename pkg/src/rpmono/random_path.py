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
Random path model configurations: link counts m, link colours c and vertex pairings pi,
their local statistics, the measure and the decomposition into loops and walks.

A link is (edge, index) with index < m_edge. At each endpoint the incident links are
partitioned into pairs and singletons; singletons are unpaired links.
"""

import math
from typing import Dict, Iterable, List, Optional, Sequence, Set, Tuple, Union

from pydantic import BaseModel, ConfigDict, Field, model_validator

from rpmono.lattice import TorusGeometry
from rpmono.models import LocalStats
from rpmono.presets import WeightFunction

Link = Tuple[int, int]
LinkEnd = Tuple[int, int, int]
Element = Tuple[Link, ...]


class RPMParams(BaseModel):
    geometry: TorusGeometry
    N: int = Field(..., description="Number of colours", ge=1)
    beta: float = Field(..., description="Link fugacity", ge=0.0)
    weight: WeightFunction
    m_max: Optional[int] = Field(None, description="Link cap per edge (enumeration, optional for the worm)", ge=0)

    model_config = ConfigDict(frozen=True)

    @model_validator(mode="after")
    def _check_colours(self) -> "RPMParams":
        if self.weight.N != self.N:
            raise ValueError(f"Weight function has N={self.weight.N}, parameters have N={self.N}")
        return self


class PathConfig(BaseModel):
    """The triple (m, c, pi) on a torus with N colours."""

    geometry: TorusGeometry
    N: int = Field(..., ge=1)
    m: Tuple[int, ...]
    colours: Tuple[Tuple[int, ...], ...]
    pairings: Tuple[Tuple[Element, ...], ...] = Field(..., description="Per vertex index: pairs and singletons")

    model_config = ConfigDict(frozen=True)

    @model_validator(mode="after")
    def _check_structure(self) -> "PathConfig":
        g = self.geometry
        if len(self.m) != g.n_edges or len(self.colours) != g.n_edges:
            raise ValueError("m and colours need one entry per edge")
        if len(self.pairings) != g.n_vertices:
            raise ValueError("pairings need one entry per vertex")
        for e, (count, cols) in enumerate(zip(self.m, self.colours, strict=True)):
            if count < 0 or len(cols) != count:
                raise ValueError(f"Edge {e}: |c_e| must equal m_e = {count}")
            if any(not 1 <= c <= self.N for c in cols):
                raise ValueError(f"Edge {e}: colours must lie in 1..{self.N}")
        for x in range(g.n_vertices):
            expected = sorted((e, i) for e, _ in g.incidence[x] for i in range(self.m[e]))
            seen: List[Link] = []
            for element in self.pairings[x]:
                if not 1 <= len(element) <= 2:
                    raise ValueError(f"Vertex {g.vertex(x)}: partition elements hold one or two links")
                seen.extend(element)
            if sorted(seen) != expected:
                raise ValueError(f"Vertex {g.vertex(x)}: every incident link must appear in exactly one element")
        return self

    @classmethod
    def empty(cls, geometry: TorusGeometry, N: int) -> "PathConfig":
        return cls(
            geometry=geometry,
            N=N,
            m=(0,) * geometry.n_edges,
            colours=((),) * geometry.n_edges,
            pairings=((),) * geometry.n_vertices,
        )

    def colour(self, link: Link) -> int:
        return self.colours[link[0]][link[1]]

    @property
    def total_links(self) -> int:
        return sum(self.m)


class Walk(BaseModel):
    links: List[Link]
    ends: Tuple[int, int] = Field(..., description="Vertex indices of the two unpaired ends")

    model_config = ConfigDict(frozen=True)


class LoopDecomposition(BaseModel):
    loops: List[List[Link]] = Field(default_factory=list)
    walks: List[Walk] = Field(default_factory=list)

    model_config = ConfigDict(frozen=True)


def stats_from_elements(N: int, elements: Iterable[Sequence[Tuple[int, int]]]) -> LocalStats:
    """
    LocalStats from partition elements given as (edge, colour) per link.

    Pairs of two links on the same edge count towards t.
    """
    u = [0] * N
    v = [0] * N
    K = n = t = 0
    for element in elements:
        n += 1
        if len(element) == 1:
            u[element[0][1] - 1] += 1
            continue
        (e1, c1), (e2, c2) = element
        if c1 == c2:
            v[c1 - 1] += 1
        else:
            K += 1
        if e1 == e2:
            t += 1
    if K:
        v = [0] * N
    return LocalStats(u=tuple(u), v=tuple(v), K=K, n=n, t=t)


def local_stats(w: PathConfig, x: Union[Sequence[int], int]) -> LocalStats:
    """u, v, K, n, t at vertex x (coordinates or index)."""
    index = x if isinstance(x, int) else w.geometry.index(x)
    return stats_from_elements(
        w.N, ([(link[0], w.colour(link)) for link in element] for element in w.pairings[index])
    )


def edge_factor(beta: float, m: int) -> float:
    return beta**m / math.factorial(m)


def config_weight(w: PathConfig, p: RPMParams) -> float:
    """prod_e beta^{m_e} / m_e! * prod_x U(local_stats(w, x))."""
    if w.geometry != p.geometry or w.N != p.N:
        raise ValueError("Configuration does not live on the model's torus and colour set")
    weight = 1.0
    for count in w.m:
        weight *= edge_factor(p.beta, count)
    for x in range(p.geometry.n_vertices):
        if weight == 0.0:
            return 0.0
        weight *= p.weight(local_stats(w, x))
    return weight


def partner_map(w: PathConfig) -> Dict[LinkEnd, Optional[LinkEnd]]:
    """For every link end (edge, index, side), the paired link end at the same vertex, or None."""
    g = w.geometry
    side_at: Dict[Tuple[int, int], int] = {}
    partners: Dict[LinkEnd, Optional[LinkEnd]] = {}
    for x in range(g.n_vertices):
        side_at.clear()
        for e, side in g.incidence[x]:
            side_at[(e, x)] = side
        for element in w.pairings[x]:
            ends = [(link[0], link[1], side_at[(link[0], x)]) for link in element]
            if len(ends) == 1:
                partners[ends[0]] = None
            else:
                partners[ends[0]] = ends[1]
                partners[ends[1]] = ends[0]
    return partners


def trace_loops(w: PathConfig) -> LoopDecomposition:
    """
    Follows pairings link to link. Walks start from their smallest unpaired end; loops
    start from their smallest link and leave it through its side-1 end.
    """
    g = w.geometry
    partners = partner_map(w)
    visited: Set[Link] = set()
    walks: List[Walk] = []
    loops: List[List[Link]] = []

    for start in sorted(end for end, partner in partners.items() if partner is None):
        if (start[0], start[1]) in visited:
            continue
        links: List[Link] = []
        end: LinkEnd = start
        while True:
            link = (end[0], end[1])
            links.append(link)
            visited.add(link)
            far: LinkEnd = (end[0], end[1], 1 - end[2])
            nxt = partners[far]
            if nxt is None:
                break
            end = nxt
        walks.append(
            Walk(links=links, ends=(g.edge_end_vertex(start[0], start[2]), g.edge_end_vertex(far[0], far[2])))
        )

    for e, count in enumerate(w.m):
        for i in range(count):
            if (e, i) in visited:
                continue
            links = []
            end = (e, i, 0)
            while (end[0], end[1]) not in visited:
                links.append((end[0], end[1]))
                visited.add((end[0], end[1]))
                nxt = partners[(end[0], end[1], 1 - end[2])]
                # the walk pass consumed every component with an unpaired end
                assert nxt is not None
                end = nxt
            loops.append(links)
    return LoopDecomposition(loops=loops, walks=walks)


def component_vertices(g: TorusGeometry, links: Sequence[Link]) -> Set[int]:
    """Vertices touched by a loop or walk."""
    vertices: Set[int] = set()
    for e, _ in links:
        u, v, _ = g.edges[e]
        vertices.add(u)
        vertices.add(v)
    return vertices
