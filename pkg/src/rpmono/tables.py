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
File formats: TwoPointTable CSV (v1) with a JSON side-file, CheckReport JSON and the
infrared CSV row.

Table CSV v1::

    # rpmono-table v1
    d,L,provenance
    x1,...,xd,G,stderr[,p_connect]

The second line holds values (L is written as "4x2" for rectangular tori). Floats are
printed with 17 significant digits, which round-trips IEEE doubles exactly; an absent
stderr is an empty field.
"""

import json
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

from rpmono.lattice import EdgeConvention, TorusGeometry
from rpmono.models import CheckReport, IRReport, Provenance, RunMetadata, TwoPointTable

TABLE_HEADER = "# rpmono-table v1"

PathLike = Union[str, Path]


def _fmt(value: float) -> str:
    return f"{value:.17g}"


def side_file(path: PathLike) -> Path:
    """foo.csv -> foo.csv.json"""
    p = Path(path)
    return p.with_name(p.name + ".json")


def format_table(t: TwoPointTable) -> str:
    g = t.geometry
    side = str(g.L) if g.is_cubic else "x".join(str(s) for s in g.shape)
    lines = [TABLE_HEADER, f"{g.d},{side},{t.provenance.value}"]
    for i, x in enumerate(g.vertices()):
        fields = [str(c) for c in x]
        fields.append(_fmt(t.values[i]))
        fields.append(_fmt(t.stderr[i]) if t.stderr is not None else "")
        if t.p_connect is not None:
            fields.append(_fmt(t.p_connect[i]))
        lines.append(",".join(fields))
    return "\n".join(lines) + "\n"


def parse_table(text: str, convention: EdgeConvention = EdgeConvention.DOUBLED) -> TwoPointTable:
    """Parses table CSV v1; the edge convention is not part of the CSV and defaults to doubled."""
    lines = [line.strip() for line in text.splitlines() if line.strip()]
    if not lines or lines[0] != TABLE_HEADER:
        raise ValueError(f"Not an rpmono table: first line must be '{TABLE_HEADER}'")
    if len(lines) < 2:
        raise ValueError("Table is missing its d,L,provenance line")
    try:
        d_text, side_text, provenance_text = lines[1].split(",")
        d = int(d_text)
        shape = tuple(int(s) for s in side_text.split("x"))
    except ValueError as e:
        raise ValueError(f"Malformed d,L,provenance line: '{lines[1]}'") from e
    if len(shape) == 1:
        shape = shape * d
    if len(shape) != d:
        raise ValueError(f"Side '{side_text}' does not match d={d}")
    g = TorusGeometry(shape=shape, convention=convention)
    provenance = Provenance(provenance_text)
    rows = lines[2:]
    if len(rows) != g.n_vertices:
        raise ValueError(f"Table has {len(rows)} rows, torus has {g.n_vertices} vertices")
    values: List[float] = [0.0] * g.n_vertices
    stderr: List[Optional[float]] = [None] * g.n_vertices
    p_connect: List[Optional[float]] = [None] * g.n_vertices
    for row in rows:
        fields = row.split(",")
        if len(fields) not in (d + 2, d + 3):
            raise ValueError(f"Row '{row}' needs {d} coordinates, G and stderr")
        index = g.index([int(c) for c in fields[:d]])
        values[index] = float(fields[d])
        stderr[index] = float(fields[d + 1]) if fields[d + 1] else None
        if len(fields) == d + 3:
            p_connect[index] = float(fields[d + 2])
    return TwoPointTable(
        geometry=g,
        provenance=provenance,
        values=values,
        stderr=_column(stderr, "stderr"),
        p_connect=_column(p_connect, "p_connect"),
    )


def _column(entries: List[Optional[float]], name: str) -> Optional[List[float]]:
    present = [e for e in entries if e is not None]
    if not present:
        return None
    if len(present) != len(entries):
        raise ValueError(f"Column {name} must be given for every row or for none")
    return present


def write_table(t: TwoPointTable, path: PathLike, run: Optional[RunMetadata] = None) -> Path:
    """Writes the CSV and its side-file; returns the CSV path."""
    p = Path(path)
    p.parent.mkdir(parents=True, exist_ok=True)
    p.write_text(format_table(t))
    side: Dict[str, Any] = {
        "convention": t.geometry.convention.value,
        "table": t.metadata,
    }
    if run is not None:
        side["run"] = run.model_dump(mode="json")
    if t.full_matrix is not None:
        side["full_matrix"] = t.full_matrix
    side_file(p).write_text(json.dumps(side, indent=2, sort_keys=True, default=str))
    return p


def read_table(path: PathLike) -> TwoPointTable:
    """Reads a table CSV; metadata, convention and a full matrix come from the side-file when present."""
    p = Path(path)
    if not p.exists():
        raise ValueError(f"Table file not found: {p}")
    meta_path = side_file(p)
    side: Dict[str, Any] = json.loads(meta_path.read_text()) if meta_path.exists() else {}
    convention = EdgeConvention(side.get("convention", EdgeConvention.DOUBLED.value))
    table = parse_table(p.read_text(), convention)
    update: Dict[str, Any] = {"metadata": side.get("table", {})}
    if "full_matrix" in side:
        update["full_matrix"] = side["full_matrix"]
    return table.model_copy(update=update)


def write_report(report: CheckReport, path: PathLike, run: Optional[RunMetadata] = None) -> Path:
    """CheckReport JSON: the record array with margins and pass flags plus the summary."""
    p = Path(path)
    p.parent.mkdir(parents=True, exist_ok=True)
    payload = report.model_dump(mode="json")
    payload["summary"] = {
        "n_records": report.n_records,
        "n_failed": report.n_failed,
        "noise_consistent": report.noise_consistent,
    }
    if run is not None:
        payload["run"] = run.model_dump(mode="json")
    p.write_text(json.dumps(payload, indent=2, default=str))
    return p


IR_COLUMNS = ["d", "L", "extrapolated", "J", "achieved_tol", "S", "u", "M", "c1_bound", "convention", "min_spin"]


def format_ir_rows(reports: List[IRReport]) -> str:
    lines = [",".join(IR_COLUMNS)]
    for r in reports:
        row = [
            str(r.d),
            "" if r.L is None else str(r.L),
            str(r.extrapolated).lower(),
            _fmt(r.J),
            "" if r.achieved_tol is None else _fmt(r.achieved_tol),
            _fmt(r.S),
            _fmt(r.u),
            _fmt(r.M),
            _fmt(r.c1_bound),
            r.convention.value,
            "" if r.threshold is None else _fmt(r.threshold.min_spin),
        ]
        lines.append(",".join(row))
    return "\n".join(lines) + "\n"


def write_ir_report(reports: List[IRReport], path: PathLike, run: Optional[RunMetadata] = None) -> Path:
    p = Path(path)
    p.parent.mkdir(parents=True, exist_ok=True)
    p.write_text(format_ir_rows(reports))
    side: Dict[str, Any] = {"reports": [r.model_dump(mode="json") for r in reports]}
    if run is not None:
        side["run"] = run.model_dump(mode="json")
    side_file(p).write_text(json.dumps(side, indent=2, default=str))
    return p
