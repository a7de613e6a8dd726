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
Torus geometry: even tori Z^d/LZ^d (and even rectangular tori), reflections through
edges and vertices, reflection halves, the canonical reflection path to a vertex,
the Fourier dual lattice, and the box/shell vertex sets used by the amplification
argument.

Vertices are coordinate tuples; internally they are indexed in lexicographic order
(first coordinate most significant), which is also the row order of every table.
"""

from enum import Enum
from functools import lru_cache
from itertools import product
from typing import Iterable, Iterator, List, Optional, Sequence, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, computed_field, model_validator

Vertex = Tuple[int, ...]
Edge = Tuple[int, int, int]


class EdgeConvention(str, Enum):
    """How an axis of length 2 is wired. Axes of length >= 4 are always simple."""

    DOUBLED = "doubled"
    SIMPLE = "simple"


class ReflectionKind(str, Enum):
    THROUGH_EDGES = "through_edges"
    THROUGH_VERTICES = "through_vertices"


class TorusGeometry(BaseModel):
    """
    An even torus with side lengths `shape`.

    Along an axis of length 2 the neighbours x + e_i and x - e_i coincide; the DOUBLED
    convention keeps two distinct edges between them so that every vertex keeps
    coordination number 2d.
    """

    shape: Tuple[int, ...] = Field(..., description="Side lengths L_1..L_d, all even and >= 2")
    convention: EdgeConvention = Field(EdgeConvention.DOUBLED, description="Wiring of length-2 axes")

    model_config = ConfigDict(frozen=True)

    @model_validator(mode="after")
    def _check_shape(self) -> "TorusGeometry":
        if len(self.shape) < 1:
            raise ValueError("Torus dimension d must be >= 1")
        for side in self.shape:
            if side < 2 or side % 2 != 0:
                raise ValueError(f"L must be even and >= 2 (got side length {side})")
        return self

    @computed_field(return_type=int)  # type: ignore[misc]
    @property
    def d(self) -> int:
        return len(self.shape)

    @computed_field(return_type=Optional[int])  # type: ignore[misc]
    @property
    def L(self) -> Optional[int]:
        """Common side length of a cubic torus, None for a rectangular one."""
        return self.shape[0] if self.is_cubic else None

    @property
    def is_cubic(self) -> bool:
        return all(side == self.shape[0] for side in self.shape)

    @computed_field(return_type=bool)  # type: ignore[misc]
    @property
    def non_paper_geometry(self) -> bool:
        """Rectangular tori are an engine-level generalisation."""
        return not self.is_cubic

    @computed_field(return_type=bool)  # type: ignore[misc]
    @property
    def has_doubled_edges(self) -> bool:
        return self.convention == EdgeConvention.DOUBLED and 2 in self.shape

    @property
    def n_vertices(self) -> int:
        return int(np.prod(self.shape))

    @property
    def label(self) -> str:
        """Side-length label used in file headers: "4" for cubic, "4x2" otherwise."""
        if self.is_cubic:
            return str(self.shape[0])
        return "x".join(str(side) for side in self.shape)

    @property
    def strides(self) -> Tuple[int, ...]:
        return _strides(self.shape)

    @property
    def coordinates(self) -> np.ndarray:
        """Read-only integer array of shape (n_vertices, d) in index order."""
        return _coordinates(self.shape)

    def vertices(self) -> Iterator[Vertex]:
        return iter(product(*(range(side) for side in self.shape)))

    def index(self, x: Sequence[int]) -> int:
        self.validate_vertex(x)
        return int(sum(c * s for c, s in zip(x, self.strides, strict=True)))

    def vertex(self, index: int) -> Vertex:
        if not 0 <= index < self.n_vertices:
            raise ValueError(f"Vertex index {index} out of range for {self.n_vertices} vertices")
        return tuple(int(c) for c in self.coordinates[index])

    def validate_vertex(self, x: Sequence[int]) -> None:
        if len(x) != self.d:
            raise ValueError(f"Vertex {tuple(x)} has {len(x)} coordinates, torus has d={self.d}")
        for c, side in zip(x, self.shape, strict=True):
            if not 0 <= c < side:
                raise ValueError(f"Vertex {tuple(x)} outside torus of shape {self.shape}")

    def wrap(self, x: Sequence[int]) -> Vertex:
        return tuple(int(c) % side for c, side in zip(x, self.shape, strict=True))

    def add(self, x: Sequence[int], y: Sequence[int]) -> Vertex:
        return self.wrap([a + b for a, b in zip(x, y, strict=True)])

    def subtract(self, x: Sequence[int], y: Sequence[int]) -> Vertex:
        return self.wrap([a - b for a, b in zip(x, y, strict=True)])

    def negate(self, x: Sequence[int]) -> Vertex:
        return self.wrap([-c for c in x])

    def axis_distance(self, x: Sequence[int]) -> Tuple[int, ...]:
        """Per-axis torus distance |x . e_i| = min(x_i, L_i - x_i)."""
        return tuple(min(c % side, side - c % side) for c, side in zip(x, self.shape, strict=True))

    def unit(self, axis: int, n: int = 1) -> Vertex:
        """The vertex n e_axis."""
        return self.wrap([n if i == axis else 0 for i in range(self.d)])

    @property
    def edges(self) -> List[Edge]:
        """Edges (u, v, axis) with v = u + e_axis, in lexicographic order of (u, axis)."""
        return _edges(self.shape, self.convention)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    @property
    def incidence(self) -> List[List[Tuple[int, int]]]:
        """For each vertex, its incident (edge id, side) pairs; side 0 is the edge's u end."""
        return _incidence(self.shape, self.convention)

    def edge_end_vertex(self, e: int, side: int) -> int:
        u, v, _ = self.edges[e]
        return u if side == 0 else v

    @property
    def neighbour_pairs(self) -> List[Tuple[int, int]]:
        """Distinct nearest-neighbour vertex pairs (u, v) with u < v, in first-seen edge order."""
        return _neighbour_pairs(self.shape, self.convention)


# Geometry tables are cached per (shape, convention) outside the model so that
# pydantic equality on TorusGeometry never compares numpy arrays.
@lru_cache(maxsize=64)
def _strides(shape: Tuple[int, ...]) -> Tuple[int, ...]:
    strides = []
    acc = 1
    for side in reversed(shape):
        strides.append(acc)
        acc *= side
    return tuple(reversed(strides))


@lru_cache(maxsize=64)
def _coordinates(shape: Tuple[int, ...]) -> np.ndarray:
    coords = np.ascontiguousarray(np.indices(shape).reshape(len(shape), -1).T, dtype=np.int64)
    coords.setflags(write=False)
    return coords


@lru_cache(maxsize=64)
def _edges(shape: Tuple[int, ...], convention: EdgeConvention) -> List[Edge]:
    strides = _strides(shape)
    edges: List[Edge] = []
    for u_index, x in enumerate(product(*(range(side) for side in shape))):
        for axis, side in enumerate(shape):
            if side == 2 and convention == EdgeConvention.SIMPLE and x[axis] != 0:
                continue
            v_index = u_index + (((x[axis] + 1) % side) - x[axis]) * strides[axis]
            edges.append((u_index, v_index, axis))
    return edges


@lru_cache(maxsize=64)
def _incidence(shape: Tuple[int, ...], convention: EdgeConvention) -> List[List[Tuple[int, int]]]:
    incident: List[List[Tuple[int, int]]] = [[] for _ in range(int(np.prod(shape)))]
    for e, (u, v, _) in enumerate(_edges(shape, convention)):
        incident[u].append((e, 0))
        incident[v].append((e, 1))
    return incident


@lru_cache(maxsize=64)
def _neighbour_pairs(shape: Tuple[int, ...], convention: EdgeConvention) -> List[Tuple[int, int]]:
    seen = set()
    pairs = []
    for u, v, _ in _edges(shape, convention):
        key = (min(u, v), max(u, v))
        if key not in seen:
            seen.add(key)
            pairs.append(key)
    return pairs


class Reflection(BaseModel):
    """
    Reflection x_axis -> 2m - x_axis (mod L_axis). The offset m is stored doubled so
    half-integers stay exact: twice_offset = 2m.
    """

    axis: int = Field(..., description="Reflected coordinate (0-based)", ge=0)
    twice_offset: int = Field(..., description="2m, with m in [0, L_axis)", ge=0)

    model_config = ConfigDict(frozen=True)

    @classmethod
    def through(cls, axis: int, offset: float) -> "Reflection":
        twice = 2.0 * offset
        if abs(twice - round(twice)) > 1e-12:
            raise ValueError(f"Reflection offset must be a half-integer (got {offset})")
        return cls(axis=axis, twice_offset=int(round(twice)))

    @property
    def offset(self) -> float:
        return self.twice_offset / 2.0

    @computed_field(return_type=ReflectionKind)  # type: ignore[misc]
    @property
    def kind(self) -> ReflectionKind:
        if self.twice_offset % 2 == 0:
            return ReflectionKind.THROUGH_VERTICES
        return ReflectionKind.THROUGH_EDGES

    def validate_for(self, g: TorusGeometry) -> None:
        if self.axis >= g.d:
            raise ValueError(f"Reflection axis {self.axis} invalid for d={g.d}")
        if self.twice_offset >= 2 * g.shape[self.axis]:
            raise ValueError(f"Reflection offset {self.offset} outside [0, {g.shape[self.axis]})")


class VertexSet(BaseModel):
    """Subset of torus vertices held as a membership bitmap in index order."""

    geometry: TorusGeometry
    mask: np.ndarray

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    @model_validator(mode="after")
    def _check_mask(self) -> "VertexSet":
        if self.mask.shape != (self.geometry.n_vertices,) or self.mask.dtype != np.bool_:
            raise ValueError("VertexSet mask must be a boolean array over all vertices")
        self.mask.setflags(write=False)
        return self

    @classmethod
    def from_vertices(cls, g: TorusGeometry, vertices: Iterable[Sequence[int]]) -> "VertexSet":
        mask = np.zeros(g.n_vertices, dtype=bool)
        for x in vertices:
            mask[g.index(x)] = True
        return cls(geometry=g, mask=mask)

    def __contains__(self, x: object) -> bool:
        if not isinstance(x, tuple):
            return False
        return bool(self.mask[self.geometry.index(x)])

    def __len__(self) -> int:
        return int(self.mask.sum())

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, VertexSet):
            return NotImplemented
        return self.geometry == other.geometry and bool(np.array_equal(self.mask, other.mask))

    def __hash__(self) -> int:
        return hash((self.geometry, self.mask.tobytes()))

    def indices(self) -> np.ndarray:
        return np.flatnonzero(self.mask)

    def members(self) -> List[Vertex]:
        """Sorted coordinate tuples; the JSON form of the set."""
        return [self.geometry.vertex(int(i)) for i in self.indices()]

    def complement(self) -> "VertexSet":
        return VertexSet(geometry=self.geometry, mask=~self.mask)

    def union(self, other: "VertexSet") -> "VertexSet":
        return VertexSet(geometry=self.geometry, mask=self.mask | other.mask)

    def intersection(self, other: "VertexSet") -> "VertexSet":
        return VertexSet(geometry=self.geometry, mask=self.mask & other.mask)

    def reflect(self, r: Reflection) -> "VertexSet":
        image = reflection_index_map(self.geometry, r)
        mask = np.zeros_like(self.mask)
        mask[image[self.indices()]] = True
        return VertexSet(geometry=self.geometry, mask=mask)


def build_torus(d: int, L: int, convention: Optional[EdgeConvention] = None) -> TorusGeometry:
    """
    Builds the cubic torus Z^d/LZ^d.

    Args:
        d: Dimension, >= 1.
        L: Side length, even and >= 2.
        convention: Wiring of L = 2 axes. Defaults to DOUBLED.

    Returns:
        The torus geometry.
    """
    if d < 1:
        raise ValueError(f"Torus dimension d must be >= 1 (got {d})")
    if L < 2 or L % 2 != 0:
        raise ValueError(f"L must be even and >= 2 (got {L})")
    return TorusGeometry(shape=(L,) * d, convention=convention or EdgeConvention.DOUBLED)


def build_rectangular_torus(shape: Sequence[int], convention: Optional[EdgeConvention] = None) -> TorusGeometry:
    """Builds an L_1 x ... x L_d torus with all sides even."""
    return TorusGeometry(shape=tuple(int(s) for s in shape), convention=convention or EdgeConvention.DOUBLED)


def reflect_vertex(g: TorusGeometry, r: Reflection, x: Sequence[int]) -> Vertex:
    """Image of x: coordinate `axis` becomes (2m - x_axis) mod L_axis, others unchanged."""
    g.validate_vertex(x)
    r.validate_for(g)
    y = list(x)
    y[r.axis] = (r.twice_offset - y[r.axis]) % g.shape[r.axis]
    return tuple(y)


def reflection_index_map(g: TorusGeometry, r: Reflection) -> np.ndarray:
    """Vectorised reflect_vertex: image index of every vertex index."""
    r.validate_for(g)
    coords = g.coordinates.copy()
    coords[:, r.axis] = (r.twice_offset - coords[:, r.axis]) % g.shape[r.axis]
    return coords @ np.asarray(g.strides, dtype=np.int64)


def reflection_halves(g: TorusGeometry, r: Reflection) -> Tuple[VertexSet, VertexSet]:
    """
    Partition (T+, T-) of the torus by the reflection plane.

    T+ holds the vertices with (x_axis - m) mod L in (0, L/2); for a reflection through
    vertices the two fixed hyperplanes (x_axis - m = 0 and L/2) are assigned to T+.
    """
    r.validate_for(g)
    side = g.shape[r.axis]
    # doubled units keep half-integer offsets exact
    delta = (2 * g.coordinates[:, r.axis] - r.twice_offset) % (2 * side)
    if r.kind == ReflectionKind.THROUGH_EDGES:
        plus = (delta > 0) & (delta < side)
    else:
        plus = delta <= side
    return VertexSet(geometry=g, mask=plus), VertexSet(geometry=g, mask=~plus)


def reflection_image(g: TorusGeometry, x: Sequence[int], order: Optional[Sequence[int]] = None) -> List[Reflection]:
    """
    Edge reflections along the staircase path from o to x.

    The path takes all steps along the first axis in `order`, then the second, and so
    on (default order 0..d-1); step t -> t + e_i is reflected through the plane at
    m = t_i + 1/2. Applying the returned reflections to o in sequence yields x.
    """
    g.validate_vertex(x)
    axes = list(order) if order is not None else list(range(g.d))
    if sorted(axes) != list(range(g.d)):
        raise ValueError(f"Axis order {axes} is not a permutation of 0..{g.d - 1}")
    reflections: List[Reflection] = []
    for axis in axes:
        for t in range(x[axis]):
            reflections.append(Reflection(axis=axis, twice_offset=2 * t + 1))
    return reflections


def apply_reflections(g: TorusGeometry, reflections: Sequence[Reflection], x: Sequence[int]) -> Vertex:
    y: Vertex = tuple(x)
    for r in reflections:
        y = reflect_vertex(g, r, y)
    return y


def difference_table(g: TorusGeometry) -> np.ndarray:
    """(|T|, |T|) array whose entry [a, b] is the index of b - a."""
    return _difference_table(g.shape)


@lru_cache(maxsize=16)
def _difference_table(shape: Tuple[int, ...]) -> np.ndarray:
    coords = _coordinates(shape)
    delta = (coords[None, :, :] - coords[:, None, :]) % np.asarray(shape, dtype=np.int64)
    table = delta @ np.asarray(_strides(shape), dtype=np.int64)
    table.setflags(write=False)
    return table


def dual_momenta(g: TorusGeometry) -> np.ndarray:
    """
    All momenta k = (2 pi / L_i) n_i, n_i in {0..L_i - 1}, as rows of a (|T|, d) array in
    lexicographic order; the first row is k = o.
    """
    scale = 2.0 * np.pi / np.asarray(g.shape, dtype=float)
    return g.coordinates.astype(float) * scale


def box_Q(g: TorusGeometry, z: Sequence[int]) -> VertexSet:
    """Q_z = {x : for all i, x_i <= |z_i| or x_i > L_i - |z_i|}."""
    g.validate_vertex(z)
    reach = np.asarray(g.axis_distance(z), dtype=np.int64)
    sides = np.asarray(g.shape, dtype=np.int64)
    coords = g.coordinates
    inside = (coords <= reach) | (coords > sides - reach)
    return VertexSet(geometry=g, mask=inside.all(axis=1))


def shell_S(g: TorusGeometry, r: Union[int, Sequence[int]]) -> VertexSet:
    """
    S_{r,L} = {z : exists i with z_i < r or L_i - z_i <= r}.

    The complement is {z : r <= z_i < L_i - r for all i}, of size prod(L_i - 2r).
    A per-axis radius may be passed for rectangular tori.
    """
    radii = np.asarray([r] * g.d if isinstance(r, int) else list(r), dtype=np.int64)
    sides = np.asarray(g.shape, dtype=np.int64)
    if radii.shape != (g.d,) or np.any(radii < 0) or np.any(2 * radii > sides):
        raise ValueError(f"Shell radius must satisfy 0 <= r <= L/2 (got {r} for shape {g.shape})")
    coords = g.coordinates
    near = (coords < radii) | (sides - coords <= radii)
    return VertexSet(geometry=g, mask=near.any(axis=1))
