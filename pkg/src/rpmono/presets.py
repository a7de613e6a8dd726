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
Vertex weight functions U(u, v, K, n, t) for the random path model, and the registry of
named presets.

- loop_on(N): monochromatic pairings only (K = 0); at most one unpaired link per vertex,
  of colour 1, so that the spin-source observable has support. Loops of every colour and
  any number of pairings per vertex have weight 1.
- crossing_on(N): at most one partition element per vertex, no unpaired links, and at
  most one cross-colour pairing, weighted sqrt(N) against 1 for a same-colour pairing.
  With these weights G(o, x) = 2 C(N, 2) P(o <-> x) holds exactly for x != o.
"""

import math
from enum import Enum
from typing import Callable, Dict, Mapping, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, PrivateAttr

from rpmono.exceptions import NonErgodicPresetError
from rpmono.models import LocalStats, PathKind


class PresetFamily(str, Enum):
    LOOP_ON = "loop_on"
    CROSSING_ON = "crossing_on"
    TABLE = "table"


class WeightFunction(BaseModel):
    """A named, non-negative vertex weight U evaluated on LocalStats."""

    name: str
    family: PresetFamily
    N: int = Field(..., description="Number of colours", ge=1)
    sources: bool = Field(True, description="loop_on: allow one unpaired colour-1 link per vertex")
    max_links_per_vertex: Optional[int] = Field(
        None, description="Links per vertex beyond which U vanishes for every pairing; used for pruning", ge=0
    )
    entries: Tuple[Tuple[LocalStats, float], ...] = Field((), description="Table family: explicit values")
    default: float = Field(0.0, description="Table family: value of unlisted patterns", ge=0.0)

    model_config = ConfigDict(frozen=True)

    _lookup: Dict[LocalStats, float] = PrivateAttr(default_factory=dict)

    def model_post_init(self, __context: object) -> None:
        for stats, value in self.entries:
            if value < 0:
                raise ValueError(f"Weight function values must be non-negative (got {value} at {stats})")
            if len(stats.u) != self.N or len(stats.v) != self.N:
                raise ValueError(f"Table pattern {stats} does not have {self.N} colours")
        self._lookup = {LocalStats(*s): float(val) for s, val in self.entries}

    @property
    def colour_blind(self) -> bool:
        """Presets whose colour sums are known in closed form."""
        return self.family != PresetFamily.TABLE

    def __call__(self, s: LocalStats) -> float:
        if self.family == PresetFamily.LOOP_ON:
            if s.K != 0 or any(s.u[1:]):
                return 0.0
            return 1.0 if s.u[0] <= (1 if self.sources else 0) else 0.0
        if self.family == PresetFamily.CROSSING_ON:
            if s.unpaired or s.n > 1 or s.K > 1:
                return 0.0
            return math.sqrt(self.N) if s.K == 1 else 1.0
        return self._lookup.get(s, self.default)


def loop_on(N: int, sources: bool = True) -> WeightFunction:
    return WeightFunction(name="loop_on", family=PresetFamily.LOOP_ON, N=N, sources=sources)


def crossing_on(N: int) -> WeightFunction:
    return WeightFunction(name="crossing_on", family=PresetFamily.CROSSING_ON, N=N, max_links_per_vertex=2)


def table_weight(
    N: int, entries: Mapping[LocalStats, float], default: float = 0.0, name: str = "table"
) -> WeightFunction:
    """A user weight given by explicit pattern values."""
    return WeightFunction(
        name=name,
        family=PresetFamily.TABLE,
        N=N,
        entries=tuple(entries.items()),
        default=default,
    )


DEFAULT_PRESETS: Dict[str, Callable[[int], WeightFunction]] = {
    "loop_on": loop_on,
    "crossing_on": crossing_on,
}


def get_preset(name: str, N: int) -> WeightFunction:
    if name not in DEFAULT_PRESETS:
        raise ValueError(f"Unknown preset: {name}. Known presets: {sorted(DEFAULT_PRESETS)}")
    return DEFAULT_PRESETS[name](N)


def _pattern(N: int, u1: int = 0, v1: int = 0, K: int = 0, n: int = 0) -> LocalStats:
    u = (u1,) + (0,) * (N - 1)
    v = (v1,) + (0,) * (N - 1)
    return LocalStats(u=u, v=v, K=K, n=n, t=0)


def check_ergodic(weight: WeightFunction, kind: PathKind) -> None:
    """
    Raises NonErgodicPresetError when U vanishes on a local pattern the worm must pass
    through: the empty vertex, a single same-colour pairing, and the kind's source pattern.
    """
    required = {
        "empty vertex": _pattern(weight.N),
        "single same-colour pairing": _pattern(weight.N, v1=1, n=1),
    }
    if kind == PathKind.SPIN_SOURCE:
        required["single unpaired colour-1 link"] = _pattern(weight.N, u1=1, n=1)
    else:
        if weight.N < 2:
            raise NonErgodicPresetError(f"Crossing observables need N >= 2 (got N={weight.N})", preset=weight.name)
        required["single cross-colour pairing"] = _pattern(weight.N, K=1, n=1)
    for label, stats in required.items():
        if weight(stats) <= 0.0:
            raise NonErgodicPresetError(
                f"Preset {weight.name} vanishes on the {label} pattern; the worm cannot reach the {kind.value} sector",
                preset=weight.name,
            )
