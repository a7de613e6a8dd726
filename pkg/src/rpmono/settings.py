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
Run configuration: flat `section.key = value` files, RPMONO_ environment overrides and
command-line flags merged into one validated RunConfig.
"""

from pathlib import Path
from typing import Any, Dict, Mapping, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict

from rpmono.lattice import EdgeConvention
from rpmono.models import PathKind, QuantumEngine, RPMEngine, ThresholdConvention
from rpmono.quantum_gibbs import DENSE_CAP, STOCHASTIC_CAP


def _count(value: Any) -> Any:
    """Accepts counts written as floats ("1e6")."""
    if isinstance(value, str):
        try:
            number = float(value)
        except ValueError:
            return value
        if number.is_integer():
            return int(number)
    if isinstance(value, float) and value.is_integer():
        return int(value)
    return value


class QuantumSection(BaseModel):
    d: int = Field(2, ge=1)
    L: Optional[int] = Field(None, description="Side length; required to run")
    S: float = Field(0.5, gt=0.0)
    u: float = Field(-1.0, ge=-1.0, le=1.0)
    beta: float = Field(1.0, ge=0.0)
    engine: QuantumEngine = QuantumEngine.DENSE
    R: int = Field(100, ge=2, description="Random vectors for the stochastic engine")
    degree: Optional[int] = Field(None, ge=1, description="Chebyshev degree; None selects automatically")
    convention: EdgeConvention = EdgeConvention.DOUBLED
    dense_cap: int = Field(DENSE_CAP, ge=1)
    stochastic_cap: int = Field(STOCHASTIC_CAP, ge=1)
    seed: Optional[int] = None

    model_config = ConfigDict(extra="forbid")

    parse_counts = field_validator("R", mode="before")(_count)


class RPMSection(BaseModel):
    d: int = Field(2, ge=1)
    L: Optional[int] = None
    N: int = Field(2, ge=1)
    beta: float = Field(0.5, ge=0.0)
    preset: str = "crossing_on"
    kind: Optional[PathKind] = Field(None, description="Defaults to crossing for crossing_on, spin_source otherwise")
    m_max: Optional[int] = Field(1, ge=0)
    engine: RPMEngine = RPMEngine.ENUMERATE
    sweeps: int = Field(100_000, ge=1)
    burn_in: int = Field(1_000, ge=0)
    batches: int = Field(20, ge=2)
    chains: int = Field(1, ge=1)
    convention: EdgeConvention = EdgeConvention.DOUBLED
    seed: Optional[int] = None

    model_config = ConfigDict(extra="forbid")

    parse_counts = field_validator("sweeps", "burn_in", mode="before")(_count)

    @property
    def resolved_kind(self) -> PathKind:
        if self.kind is not None:
            return self.kind
        return PathKind.CROSSING if self.preset == "crossing_on" else PathKind.SPIN_SOURCE


class InfraredSection(BaseModel):
    d: int = Field(3, ge=1)
    L: Optional[int] = None
    tol: float = Field(1e-3, gt=0.0)
    S: float = Field(1.0, gt=0.0)
    u: float = Field(0.0, ge=-1.0, le=0.0)
    eps: float = Field(0.0, ge=0.0, lt=0.5)
    convention: ThresholdConvention = ThresholdConvention.VERTEX_SQ
    extrapolate: bool = False
    min_spin: bool = False

    model_config = ConfigDict(extra="forbid")


class CheckSection(BaseModel):
    sigma_k: float = Field(3.0, gt=0.0)
    abs_tol: float = Field(1e-10, ge=0.0)
    vertex_rp: bool = False
    M: Optional[float] = None
    eps: Optional[float] = Field(None, gt=0.0, lt=0.5)
    random_q: int = Field(0, ge=0)

    model_config = ConfigDict(extra="forbid")


class RunConfig(BaseSettings):  # type: ignore[misc]
    out_dir: Path = Path("out")
    seed: int = 0
    threads: int = Field(1, ge=1)
    quantum: QuantumSection = Field(default_factory=QuantumSection)
    rpm: RPMSection = Field(default_factory=RPMSection)
    infrared: InfraredSection = Field(default_factory=InfraredSection)
    check: CheckSection = Field(default_factory=CheckSection)

    model_config = SettingsConfigDict(env_prefix="RPMONO_", env_nested_delimiter="__", extra="forbid")


def _parse_scalar(text: str) -> Any:
    lowered = text.lower()
    if lowered in ("none", "null", ""):
        return None
    return text


def load_config_file(path: Union[str, Path]) -> Dict[str, Any]:
    """
    Parses a flat config file into nested sections.

    Lines are `key = value` or `section.key = value`; `#` starts a comment.
    """
    p = Path(path)
    if not p.exists():
        raise ValueError(f"Config file not found: {p}")
    flat: Dict[str, Any] = {}
    for number, raw in enumerate(p.read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{p}:{number}: expected 'key = value'")
        key, value = (part.strip() for part in line.split("=", 1))
        if not key:
            raise ValueError(f"{p}:{number}: empty key")
        flat[key] = _parse_scalar(value)
    return nest(flat)


def nest(flat: Mapping[str, Any]) -> Dict[str, Any]:
    """{"rpm.N": 2} -> {"rpm": {"N": 2}}; keys deeper than one section are rejected."""
    nested: Dict[str, Any] = {}
    for key, value in flat.items():
        parts = key.split(".")
        if len(parts) == 1:
            nested[key] = value
        elif len(parts) == 2:
            section = nested.setdefault(parts[0], {})
            if not isinstance(section, dict):
                raise ValueError(f"Key '{parts[0]}' is both a value and a section")
            section[parts[1]] = value
        else:
            raise ValueError(f"Config key '{key}' nests too deep; use section.key")
    return nested


def _merge(base: Dict[str, Any], override: Mapping[str, Any]) -> Dict[str, Any]:
    merged = dict(base)
    for key, value in override.items():
        if isinstance(value, Mapping) and isinstance(merged.get(key), dict):
            merged[key] = _merge(merged[key], value)
        else:
            merged[key] = value
    return merged


def resolve_config(path: Optional[Union[str, Path]] = None, overrides: Optional[Mapping[str, Any]] = None) -> RunConfig:
    """
    File keys, then dotted overrides (command-line flags) on top; environment variables
    fill whatever neither sets.
    """
    data = load_config_file(path) if path is not None else {}
    if overrides:
        data = _merge(data, nest({k: v for k, v in overrides.items() if v is not None}))
    return RunConfig(**data)
