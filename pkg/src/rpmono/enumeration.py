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
Exhaustive evaluation of random path two-point functions on tiny tori.

Link-count vectors are generated by depth-first search over the edges with parity
pruning: every vertex has even degree, except that the spin-source numerator allows odd
degree at o and at one other vertex. For each vector the vertex pairings are enumerated,
and colours are summed in closed form for the presets or explicitly for table weights.
"""

import math
import time
from functools import lru_cache
from itertools import product
from typing import Callable, Dict, Iterator, List, Optional, Sequence, Set, Tuple

import networkx as nx
import numpy as np
from scipy.special import gammainc

from rpmono.exceptions import CapacityExceededError
from rpmono.lattice import TorusGeometry
from rpmono.models import PathKind, Provenance, TwoPointTable
from rpmono.presets import PresetFamily
from rpmono.random_path import PathConfig, RPMParams, edge_factor, stats_from_elements
from rpmono.utils.logger import logger

ENUMERATION_BUDGET = 1e9
IDENTITY_TOL = 1e-12
TRUNCATION_WARN = 1e-6
CYCLE_SPACE_CAP = 2**22

Partition = Tuple[Tuple[int, ...], ...]


@lru_cache(maxsize=None)
def partitions(k: int, singletons: int) -> Tuple[Partition, ...]:
    """All partitions of range(k) into pairs and exactly `singletons` singletons."""

    def rec(items: Tuple[int, ...], left: int) -> List[List[Tuple[int, ...]]]:
        if not items:
            return [[]] if left == 0 else []
        first, rest = items[0], items[1:]
        out: List[List[Tuple[int, ...]]] = []
        if left > 0:
            out.extend([(first,)] + tail for tail in rec(rest, left - 1))
        for j, other in enumerate(rest):
            remaining = rest[:j] + rest[j + 1 :]
            out.extend([(first, other)] + tail for tail in rec(remaining, left))
        return out

    if k < singletons or (k - singletons) % 2:
        return ()
    return tuple(tuple(p) for p in rec(tuple(range(k)), singletons))


def truncation_bound(beta: float, m_max: int) -> float:
    """Per-edge weight dropped by the link cap: sum_{m > m_max} beta^m / m! = e^beta P(m_max + 1, beta)."""
    if beta == 0.0:
        return 0.0
    return float(math.exp(beta) * gammainc(m_max + 1, beta))


def estimate_configurations(p: RPMParams, kind: PathKind) -> float:
    """
    Rough size of the enumeration: parity-reduced link vectors times the mean number of
    pairings per vertex to the power |T|.
    """
    if p.m_max is None:
        raise ValueError("Enumeration needs a link cap m_max")
    g = p.geometry
    vectors = float(p.m_max + 1) ** g.n_edges / 2.0 ** (g.n_vertices - 1)
    if kind == PathKind.SPIN_SOURCE:
        vectors *= g.n_vertices
    degree = np.ones(1)
    for _ in range(len(g.incidence[0])):
        degree = np.convolve(degree, np.ones(p.m_max + 1) / (p.m_max + 1))
    even = np.arange(0, degree.size, 2)
    matchings = np.array([_double_factorial(k - 1) for k in even], dtype=float)
    mean = float(np.sum(degree[even] * matchings) / np.sum(degree[even]))
    return vectors * mean**g.n_vertices


def _double_factorial(n: int) -> int:
    return 1 if n <= 0 else n * _double_factorial(n - 2)


def link_vectors(
    g: TorusGeometry,
    m_max: int,
    allow_source_pair: bool,
    max_links: Optional[int],
    visit: Callable[[Tuple[int, ...], int], None],
) -> None:
    """
    Calls visit(m, y) for every m in [0, m_max]^E with all degrees even (y = -1) or, if
    allowed, odd exactly at o and at y != o.
    """
    edges = g.edges
    n_edges = len(edges)
    last = [-1] * g.n_vertices
    for e, (u, v, _) in enumerate(edges):
        last[u] = e
        last[v] = e
    finishing: List[List[int]] = [[] for _ in range(n_edges)]
    for x, e in enumerate(last):
        finishing[e].append(x)
    degree = [0] * g.n_vertices
    m = [0] * n_edges

    def rec(e: int, other: int, o_odd: Optional[bool]) -> None:
        if e == n_edges:
            if o_odd == (other >= 0):
                visit(tuple(m), other)
            return
        u, v, _ = edges[e]
        for k in range(m_max + 1):
            if max_links is not None and (degree[u] + k > max_links or degree[v] + k > max_links):
                break
            degree[u] += k
            degree[v] += k
            m[e] = k
            new_other, new_o_odd, ok = other, o_odd, True
            for x in finishing[e]:
                odd = degree[x] % 2 == 1
                if x == 0:
                    new_o_odd = odd
                elif odd:
                    if not allow_source_pair or new_other >= 0:
                        ok = False
                        break
                    new_other = x
            if ok and new_o_odd is False and new_other >= 0:
                ok = False
            if ok:
                rec(e + 1, new_other, new_o_odd)
            degree[u] -= k
            degree[v] -= k
        m[e] = 0

    rec(0, -1, None)


class _Links:
    """Links of one link vector, with end codes 2 * link + side."""

    def __init__(self, g: TorusGeometry, m: Tuple[int, ...]) -> None:
        self.edge: List[int] = []
        self.index: List[int] = []
        for e, count in enumerate(m):
            for i in range(count):
                self.edge.append(e)
                self.index.append(i)
        first = [0] * len(m)
        acc = 0
        for e, count in enumerate(m):
            first[e] = acc
            acc += count
        self.code_vertex: List[int] = []
        for e in self.edge:
            u, v, _ = g.edges[e]
            self.code_vertex.extend((u, v))
        self.ends_at: List[List[int]] = []
        for x in range(g.n_vertices):
            self.ends_at.append(
                [2 * (first[e] + i) + side for e, side in g.incidence[x] for i in range(m[e])]
            )

    @property
    def n_links(self) -> int:
        return len(self.edge)


def _vertex_options(
    links: _Links, x: int, singletons: int, max_elements: Optional[int]
) -> List[Tuple[Tuple[int, ...], ...]]:
    ends = links.ends_at[x]
    options = []
    for part in partitions(len(ends), singletons):
        if max_elements is not None and len(part) > max_elements:
            continue
        options.append(tuple(tuple(ends[i] for i in element) for element in part))
    return options


def _partner_array(n_links: int, choice: Sequence[Tuple[Tuple[int, ...], ...]]) -> List[int]:
    partner = [-1] * (2 * n_links)
    for option in choice:
        for element in option:
            if len(element) == 2:
                a, b = element
                partner[a] = b
                partner[b] = a
    return partner


def trace_components(
    n_links: int, partner: Sequence[int], code_vertex: Sequence[int]
) -> Tuple[List[Set[int]], List[Tuple[int, int]]]:
    """Vertex sets of the loops and end vertices of the walks of a pairing."""
    seen = [False] * n_links
    walks: List[Tuple[int, int]] = []
    for code in range(2 * n_links):
        if partner[code] != -1 or seen[code >> 1]:
            continue
        cur = code
        while True:
            seen[cur >> 1] = True
            far = cur ^ 1
            nxt = partner[far]
            if nxt == -1:
                break
            cur = nxt
        walks.append((code_vertex[code], code_vertex[far]))
    loops: List[Set[int]] = []
    for link in range(n_links):
        if seen[link]:
            continue
        vertices: Set[int] = set()
        cur = 2 * link
        while not seen[cur >> 1]:
            seen[cur >> 1] = True
            far = cur ^ 1
            vertices.add(code_vertex[cur])
            vertices.add(code_vertex[far])
            cur = partner[far]
        loops.append(vertices)
    return loops, walks


class _Accumulator:
    def __init__(self, n_vertices: int) -> None:
        self.Z = 0.0
        self.G = np.zeros(n_vertices)
        self.P = np.zeros(n_vertices)
        self.configurations = 0


class Enumerator:
    """
    Exact two-point functions by exhaustive enumeration under a link cap.
    """

    def __init__(self, budget: float = ENUMERATION_BUDGET, force_generic: bool = False) -> None:
        self.budget = budget
        self.force_generic = force_generic

    def _check(self, p: RPMParams, kind: PathKind) -> int:
        if p.m_max is None:
            raise ValueError("Enumeration needs a link cap m_max")
        if kind == PathKind.CROSSING and p.N < 2:
            raise ValueError(f"Crossing observables need N >= 2 (got N={p.N})")
        estimate = estimate_configurations(p, kind)
        if estimate > self.budget:
            raise CapacityExceededError(
                f"Enumeration budget exceeded: about {estimate:.3g} configurations > {self.budget:.3g}",
                resource="enumeration",
                limit=self.budget,
                requested=estimate,
            )
        return p.m_max

    def _run(self, p: RPMParams, kind: PathKind, m_max: int, open_sector: bool) -> Tuple[_Accumulator, bool]:
        g = p.geometry
        acc = _Accumulator(g.n_vertices)
        weight = p.weight
        generic = self.force_generic or not weight.colour_blind
        max_elements = 1 if weight.family == PresetFamily.CROSSING_ON and not generic else None

        def visit(m: Tuple[int, ...], other: int) -> None:
            base = 1.0
            for count in m:
                base *= edge_factor(p.beta, count)
            if base == 0.0:
                return
            links = _Links(g, m)
            options = []
            for x in range(g.n_vertices):
                singles = 1 if other >= 0 and (x == 0 or x == other) else 0
                options.append(_vertex_options(links, x, singles, max_elements))
            if generic:
                self._generic_sum(p, kind, links, options, other, base, acc)
            else:
                self._preset_sum(p, kind, links, options, other, base, acc)

        link_vectors(g, m_max, open_sector, weight.max_links_per_vertex, visit)
        return acc, generic

    def partition_function(self, p: RPMParams) -> float:
        """Z^loop: the weighted sum over closed configurations (every degree even)."""
        m_max = self._check(p, PathKind.SPIN_SOURCE)
        acc, _ = self._run(p, PathKind.SPIN_SOURCE, m_max, open_sector=False)
        return acc.Z

    def enumerate_two_point(self, p: RPMParams, kind: PathKind) -> TwoPointTable:
        """
        G(o, x) for every x, normalised by Z^loop (spin_source) or Z^mono (crossing).

        Crossing tables also carry p_connect = G / (2 C(N, 2)); the independently traced
        P(o <-> x) is compared with it and the largest relative deviation is recorded.
        """
        m_max = self._check(p, kind)
        g = p.geometry
        weight = p.weight
        start = time.perf_counter()
        logger.info(f"Enumerating {kind.value} on shape={g.shape} N={p.N} beta={p.beta} m_max={m_max}")
        acc, generic = self._run(p, kind, m_max, open_sector=kind == PathKind.SPIN_SOURCE)
        if acc.Z <= 0.0:
            raise ValueError("Normalising partition function vanishes for this weight function")
        values = acc.G / acc.Z
        values[0] = 0.0
        tail = truncation_bound(p.beta, m_max)
        if tail * g.n_edges > TRUNCATION_WARN:
            logger.warning(f"Link cap m_max={m_max} drops up to {tail:.3g} per edge at beta={p.beta}")
        metadata: Dict[str, object] = {
            "kind": kind.value,
            "preset": weight.name,
            "N": p.N,
            "beta": p.beta,
            "m_max": m_max,
            "shape": list(g.shape),
            "convention": g.convention.value,
            "doubled_edges": g.has_doubled_edges,
            "non_paper_geometry": g.non_paper_geometry,
            "Z": acc.Z,
            "configurations": acc.configurations,
            "truncation_bound_per_edge": tail,
            "colour_sum": "explicit" if generic else "closed_form",
        }
        p_connect = None
        if kind == PathKind.CROSSING:
            pairs = p.N * (p.N - 1)
            p_connect_arr = values / pairs
            p_loop = acc.P / acc.Z
            diff = np.abs(p_connect_arr - p_loop)[1:]
            scale = np.maximum(np.abs(p_connect_arr), np.abs(p_loop))[1:]
            relative = np.divide(diff, scale, out=np.zeros_like(diff), where=scale > 0.0)
            max_dev = float(relative.max()) if relative.size else 0.0
            metadata["p_loop"] = p_loop.tolist()
            metadata["identity_max_rel_error"] = max_dev
            if max_dev > IDENTITY_TOL:
                logger.warning(f"G = 2 C(N,2) P(o<->x) violated by relative {max_dev:.3g} for preset {weight.name}")
            p_connect = p_connect_arr.tolist()
        metadata["runtime_s"] = time.perf_counter() - start
        logger.info(f"Enumeration done: {acc.configurations} weighted patterns in {metadata['runtime_s']:.2f}s")
        return TwoPointTable(
            geometry=g,
            provenance=Provenance.ENUMERATION,
            values=[float(v) for v in values],
            p_connect=p_connect,
            metadata=metadata,
        )

    def _preset_sum(
        self,
        p: RPMParams,
        kind: PathKind,
        links: _Links,
        options: List[List[Tuple[Tuple[int, ...], ...]]],
        other: int,
        base: float,
        acc: _Accumulator,
    ) -> None:
        N = p.N
        weight = p.weight
        if weight.family == PresetFamily.LOOP_ON:
            if other >= 0 and not weight.sources:
                return
            if N == 1:
                # every pairing is monochromatic with U = 1
                count = 1
                for opts in options:
                    count *= len(opts)
                acc.configurations += count
                if other >= 0:
                    if kind == PathKind.SPIN_SOURCE:
                        acc.G[other] += base * count
                else:
                    acc.Z += base * count
                return
        for choice in product(*options):
            partner = _partner_array(links.n_links, choice)
            loops, walks = trace_components(links.n_links, partner, links.code_vertex)
            acc.configurations += 1
            colour_factor = float(N) ** len(loops)
            if weight.family == PresetFamily.LOOP_ON:
                if other >= 0:
                    if kind == PathKind.SPIN_SOURCE:
                        # the walk carries colour 1
                        acc.G[other] += base * colour_factor
                    continue
                acc.Z += base * colour_factor
                if kind == PathKind.CROSSING:
                    self._connect(loops, base * colour_factor, acc)
                continue
            # crossing_on: closed self-avoiding loops only
            if walks:
                continue
            acc.Z += base * colour_factor
            if kind == PathKind.CROSSING:
                self._connect(loops, base * colour_factor, acc)
                for vertices in loops:
                    if 0 in vertices:
                        # two colours N(N-1) on the two arcs, U = sqrt(N) at o and at x
                        defect = base * colour_factor * (N - 1) * N
                        for x in vertices:
                            if x != 0:
                                acc.G[x] += defect

    def _connect(self, loops: List[Set[int]], w: float, acc: _Accumulator) -> None:
        linked: Set[int] = set()
        for vertices in loops:
            if 0 in vertices:
                linked |= vertices
        for x in linked:
            acc.P[x] += w

    def _generic_sum(
        self,
        p: RPMParams,
        kind: PathKind,
        links: _Links,
        options: List[List[Tuple[Tuple[int, ...], ...]]],
        other: int,
        base: float,
        acc: _Accumulator,
    ) -> None:
        N = p.N
        V = len(options)
        for choice in product(*options):
            partner = _partner_array(links.n_links, choice)
            loops, _ = trace_components(links.n_links, partner, links.code_vertex)
            for colours in product(range(1, N + 1), repeat=links.n_links):
                w = base
                K = [0] * V
                for x, option in enumerate(choice):
                    stats = stats_from_elements(
                        N, ([(links.edge[c >> 1], colours[c >> 1]) for c in element] for element in option)
                    )
                    K[x] = stats.K
                    w *= p.weight(stats)
                    if w == 0.0:
                        break
                if w == 0.0:
                    continue
                acc.configurations += 1
                if kind == PathKind.SPIN_SOURCE:
                    if other < 0:
                        acc.Z += w
                        continue
                    single = [element[0] for x in (0, other) for element in choice[x] if len(element) == 1]
                    if all(colours[c >> 1] == 1 for c in single):
                        acc.G[other] += w
                    continue
                defects = [x for x in range(V) if K[x]]
                if not defects:
                    acc.Z += w
                    self._connect(loops, w, acc)
                elif len(defects) == 2 and defects[0] == 0 and K[0] == 1 and K[defects[1]] == 1:
                    acc.G[defects[1]] += w


def iter_configurations(p: RPMParams, kind: PathKind) -> Iterator[Tuple[PathConfig, int]]:
    """
    Every (m, c, pi) of the enumeration as a PathConfig with the odd vertex y (or -1).

    Reference path for tests on tiny tori; it materialises each configuration.
    """
    if p.m_max is None:
        raise ValueError("Enumeration needs a link cap m_max")
    g = p.geometry
    found: List[Tuple[Tuple[int, ...], int]] = []
    link_vectors(g, p.m_max, kind == PathKind.SPIN_SOURCE, None, lambda m, y: found.append((m, y)))
    for m, other in found:
        links = _Links(g, m)
        options = [
            _vertex_options(links, x, 1 if other >= 0 and x in (0, other) else 0, None) for x in range(g.n_vertices)
        ]
        for choice in product(*options):
            pairings = tuple(
                tuple(tuple((links.edge[c >> 1], links.index[c >> 1]) for c in element) for element in option)
                for option in choice
            )
            for colours in product(range(1, p.N + 1), repeat=links.n_links):
                per_edge: List[List[int]] = [[] for _ in m]
                for link, colour in enumerate(colours):
                    per_edge[links.edge[link]].append(colour)
                yield (
                    PathConfig(
                        geometry=g,
                        N=p.N,
                        m=m,
                        colours=tuple(tuple(c) for c in per_edge),
                        pairings=pairings,
                    ),
                    other,
                )


def _pairing_counts(max_degree: int) -> np.ndarray:
    """Partitions of k link ends into pairs plus at most one singleton: (k - 1)!! for even k, k!! for odd k."""
    return np.array(
        [_double_factorial(k - 1) if k % 2 == 0 else _double_factorial(k) for k in range(max_degree + 1)],
        dtype=float,
    )


class _CycleSpace:
    """All even subgraphs of a simple torus graph, one boolean row per subgraph."""

    def __init__(self, g: TorusGeometry) -> None:
        if g.has_doubled_edges:
            raise ValueError("Even-subgraph oracle needs a simple graph; use the simple convention for L = 2")
        self.graph = nx.Graph()
        self.graph.add_nodes_from(range(g.n_vertices))
        self.edge_id: Dict[Tuple[int, int], int] = {}
        for e, (u, v, _) in enumerate(g.edges):
            self.graph.add_edge(u, v)
            self.edge_id[(min(u, v), max(u, v))] = e
        cycles = nx.cycle_basis(self.graph)
        if 2 ** len(cycles) > CYCLE_SPACE_CAP:
            raise CapacityExceededError(
                f"Cycle space of dimension {len(cycles)} exceeds the oracle cap",
                resource="cycle_space",
                limit=CYCLE_SPACE_CAP,
                requested=2.0 ** len(cycles),
            )
        basis = np.zeros((len(cycles), g.n_edges), dtype=np.int64)
        for i, cycle in enumerate(cycles):
            basis[i, self._edges(cycle + cycle[:1])] = 1
        bits = (np.arange(2 ** len(cycles))[:, np.newaxis] >> np.arange(len(cycles))) & 1
        self.subgraphs = (bits @ basis) % 2 == 1
        self.incidence = np.zeros((g.n_vertices, g.n_edges), dtype=np.int64)
        for e, (u, v, _) in enumerate(g.edges):
            self.incidence[u, e] += 1
            self.incidence[v, e] += 1
        self.counts = _pairing_counts(int(self.incidence.sum(axis=1).max()))

    def _edges(self, path: Sequence[int]) -> List[int]:
        return [self.edge_id[(min(a, b), max(a, b))] for a, b in zip(path[:-1], path[1:], strict=True)]

    def path(self, x: int) -> np.ndarray:
        vec = np.zeros(self.incidence.shape[1], dtype=bool)
        vec[self._edges(nx.shortest_path(self.graph, 0, x))] = True
        return vec

    def weighted_sum(self, beta: float, shift: Optional[np.ndarray] = None) -> float:
        """sum over H in (even subgraphs XOR shift) of beta^{|H|} prod_x pairing_counts[deg_H(x)]."""
        subgraphs = self.subgraphs if shift is None else self.subgraphs ^ shift
        degrees = subgraphs.astype(np.int64) @ self.incidence.T
        sizes = subgraphs.sum(axis=1)
        return float(np.sum(beta**sizes * np.prod(self.counts[degrees], axis=1)))


def even_subgraph_partition(g: TorusGeometry, beta: float) -> float:
    """
    sum over even subgraphs H of beta^{|H|} prod_x (deg_H(x) - 1)!!, via the cycle space.

    This is Z^loop of the one-colour loop preset with m_max = 1, computed without any
    pairing enumeration. Needs a simple graph (no doubled edges).
    """
    return _CycleSpace(g).weighted_sum(beta)


def even_subgraph_two_point(g: TorusGeometry, beta: float) -> np.ndarray:
    """
    Spin-source G(o, x) of the one-colour loop preset with m_max = 1, via the cycle space.

    Subgraphs odd exactly at o and x are a fixed o-x path XOR an even subgraph; the walk
    end at an odd vertex of degree k has k!! pairings with one singleton.
    """
    space = _CycleSpace(g)
    Z = space.weighted_sum(beta)
    values = np.zeros(g.n_vertices)
    for x in range(1, g.n_vertices):
        values[x] = space.weighted_sum(beta, space.path(x)) / Z
    return values
