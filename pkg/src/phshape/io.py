"""Text formats for polymers, diagrams, P.H. points and analysis outputs.

Floats are written with 17 significant digits so that reading a file back
reproduces the in-memory values exactly.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Optional

import numpy as np

from .core import Convention, Diagram, PHPoints, Polymer, PolymerKind

AXES = ("x", "y", "z")


class FormatError(ValueError):
    pass


def fmt(v: float) -> str:
    return format(float(v), ".17g")


def _row(values) -> str:
    return ",".join(fmt(v) for v in values)


def write_json(path, obj) -> None:
    Path(path).write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


# ------------------------------------------------------------------ polymer

def polymer_text(p: Polymer) -> str:
    dim = p.ambient_dim
    adj = p.adjacency
    header = {"dim": dim, "radius": p.ball_radius, "kind": p.kind.value, "seed": p.seed,
              "n": p.n, "n_edges": 0 if adj is None else len(adj)}
    lines = [json.dumps(header, sort_keys=True), ",".join(AXES[:dim])]
    lines += [_row(c) for c in p.centers]
    if adj is not None:
        lines.append("i,j")
        lines += [f"{int(i)},{int(j)}" for i, j in adj]
    return "\n".join(lines) + "\n"


def write_polymer(p: Polymer, path) -> None:
    Path(path).write_text(polymer_text(p))


def read_polymer(path) -> Polymer:
    try:
        lines = Path(path).read_text().splitlines()
    except OSError as exc:
        raise FormatError(f"cannot read {path}: {exc}") from exc
    try:
        header = json.loads(lines[0])
        dim, n = int(header["dim"]), int(header["n"])
        n_edges = int(header.get("n_edges", 0))
        if dim not in (2, 3) or lines[1].strip() != ",".join(AXES[:dim]):
            raise FormatError(f"{path}: bad column line {lines[1]!r}")
        centers = np.array([[float(v) for v in ln.split(",")] for ln in lines[2:2 + n]], dtype=float)
        if centers.shape != (n, dim):
            raise FormatError(f"{path}: expected {n} centers of dimension {dim}")
        adj = None
        rest = [ln for ln in lines[2 + n:] if ln.strip()]
        if rest:
            if rest[0].strip() != "i,j":
                raise FormatError(f"{path}: expected 'i,j' adjacency header")
            adj = np.array([[int(v) for v in ln.split(",")] for ln in rest[1:]], dtype=np.int64)
            adj = adj.reshape(-1, 2)
            if len(adj) != n_edges:
                raise FormatError(f"{path}: expected {n_edges} adjacency rows, found {len(adj)}")
        return Polymer(centers, float(header["radius"]), PolymerKind(header["kind"]),
                       int(header.get("seed", 0)), adj)
    except FormatError:
        raise
    except (IndexError, KeyError, ValueError, json.JSONDecodeError) as exc:
        raise FormatError(f"{path}: not a polymer file ({exc})") from exc


# ------------------------------------------------------------------ diagrams

def write_diagram(d: Diagram, path) -> None:
    """CSV "degree,birth,death" plus a JSON sidecar next to it."""
    path = Path(path)
    lines = ["degree,birth,death"]
    lines += [f"{int(k)},{fmt(b)},{fmt(e)}" for k, b, e in zip(d.degrees, d.births, d.deaths)]
    path.write_text("\n".join(lines) + "\n")
    write_json(sidecar(path), {
        "convention": d.convention.value, "r": d.radius,
        "essential_count": list(d.essential_count), "pair_count": d.pair_count,
        "truncated_rows": [int(i) for i in np.flatnonzero(d.truncated)],
    })


def sidecar(path) -> Path:
    path = Path(path)
    return path.with_name(path.name + ".json")


def read_diagram(path) -> Diagram:
    path = Path(path)
    rows = _read_csv(path, "degree,birth,death")
    meta = json.loads(sidecar(path).read_text()) if sidecar(path).exists() else {}
    tr = np.zeros(len(rows), bool)
    tr[meta.get("truncated_rows", [])] = True
    return Diagram(rows[:, 0].astype(np.int64), rows[:, 1], rows[:, 2],
                   Convention(meta.get("convention", Convention.ALPHA.value)), meta.get("r", 0.0),
                   tuple(meta.get("essential_count", (1,))), tr, meta.get("pair_count", -1))


def _read_csv(path, header: str) -> np.ndarray:
    try:
        lines = [ln for ln in Path(path).read_text().splitlines() if ln.strip()]
    except OSError as exc:
        raise FormatError(f"cannot read {path}: {exc}") from exc
    if not lines or lines[0].strip() != header:
        raise FormatError(f"{path}: expected header {header!r}")
    ncol = header.count(",") + 1
    try:
        rows = np.array([[float(v) for v in ln.split(",")] for ln in lines[1:]], dtype=float)
    except ValueError as exc:
        raise FormatError(f"{path}: {exc}") from exc
    rows = rows.reshape(-1, ncol)
    return rows


def write_points(pts: PHPoints, path) -> None:
    lines = ["degree,size,aspect"]
    lines += [f"{int(k)},{fmt(x)},{fmt(y)}" for k, x, y in zip(pts.degrees, pts.sizes, pts.aspects)]
    Path(path).write_text("\n".join(lines) + "\n")


def read_points(path) -> PHPoints:
    rows = _read_csv(path, "degree,size,aspect")
    return PHPoints(rows[:, 0].astype(np.int64), rows[:, 1], rows[:, 2])


# ------------------------------------------------------------------ debug and analysis outputs

def write_filtration(fc, path) -> None:
    """Dump "alpha,dim,v0,v1[,v2[,v3]]", one simplex per line in filtration order."""
    with open(path, "w") as fh:
        cols = ",".join(f"v{k}" for k in range(fc.max_dim + 1))
        fh.write(f"alpha,dim,{cols}\n")
        for verts, dim, value in fc:
            fh.write(",".join([fmt(value), str(dim)] + [str(v) for v in verts]) + "\n")


def write_table(path, header: str, rows) -> None:
    out = [header]
    for row in rows:
        out.append(",".join(str(v) if isinstance(v, (int, np.integer)) else fmt(v) for v in row))
    Path(path).write_text("\n".join(out) + "\n")


def write_fcurve(fc, path) -> None:
    write_table(path, "size,F", zip(fc.sizes, fc.counts))


def write_histogram(h, path) -> None:
    rows = []
    for i in range(len(h.x_edges) - 1):
        for j in range(len(h.y_edges) - 1):
            rows.append((h.x_edges[i], h.x_edges[i + 1], h.y_edges[j], h.y_edges[j + 1],
                         h.density[i, j]))
    write_table(path, "x_lo,x_hi,y_lo,y_hi,density", rows)


def write_aspect_chart(chart, path) -> None:
    write_table(path, "lo,hi,frac_a,frac_b,ratio", chart.rows())


def load_points_many(paths, degree: Optional[int] = None) -> list[PHPoints]:
    out = []
    for p in paths:
        pts = read_points(p)
        out.append(pts if degree is None else pts.select(degree))
    return out
